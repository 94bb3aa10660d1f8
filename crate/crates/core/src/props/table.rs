//! Ordered atom-contribution table and the local-environment rule language.
//!
//! Each table row carries a type id, a predicate over an atom's immediate
//! environment, and the logP and MR contributions for atoms matching it
//! (hydrogen terms are folded into the row, so a row for a CH3 carbon
//! already includes three hydrogens). The first matching row wins, and a
//! parse-time check guarantees every possible environment matches some row.

use std::fmt;

use crate::molgraph::{Element, MolGraph};

/// Table file or predicate syntax problem. Line numbers are 1-based.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("table has no unconditional fallback for {element} with {h} hydrogens")]
    Incomplete { element: Element, h: u32 },
}

/// One neighbor descriptor inside a `has=` or `only=` condition.
#[derive(Debug, Clone, Copy, PartialEq)]
enum NeighborDesc {
    /// Specific element; uppercase symbols are aliphatic, lowercase aromatic.
    Elem(Element, bool),
    /// `ar`: any aromatic atom.
    AnyAromatic,
    /// `A`: any aliphatic atom.
    AnyAliphatic,
    /// `X`: aliphatic N, O, P, S or halogen.
    Hetero,
    /// `Q`: aliphatic B, Si or Sn.
    Metalloid,
}

impl NeighborDesc {
    fn parse(token: &str) -> Option<NeighborDesc> {
        match token {
            "ar" => return Some(NeighborDesc::AnyAromatic),
            "A" => return Some(NeighborDesc::AnyAliphatic),
            "X" => return Some(NeighborDesc::Hetero),
            "Q" => return Some(NeighborDesc::Metalloid),
            _ => {}
        }
        if let Some(el) = Element::from_symbol(token) {
            return Some(NeighborDesc::Elem(el, false));
        }
        // Lowercase single letters name aromatic atoms, as in SMILES.
        let upper = token.to_ascii_uppercase();
        if token.len() == 1 && token != upper {
            if let Some(el) = Element::from_symbol(&upper) {
                if el.aromatic_capable() {
                    return Some(NeighborDesc::Elem(el, true));
                }
            }
        }
        None
    }

    fn matches(&self, element: Element, aromatic: bool) -> bool {
        use Element::*;
        match *self {
            NeighborDesc::Elem(el, ar) => element == el && aromatic == ar,
            NeighborDesc::AnyAromatic => aromatic,
            NeighborDesc::AnyAliphatic => !aromatic,
            NeighborDesc::Hetero => {
                !aromatic && matches!(element, N | O | P | S | F | Cl | Br | I)
            }
            NeighborDesc::Metalloid => !aromatic && matches!(element, B | Si | Sn),
        }
    }
}

/// Everything a predicate can see about one atom.
#[derive(Debug)]
pub struct AtomEnv {
    pub element: Element,
    pub aromatic: bool,
    pub hydrogens: u32,
    /// Immediate neighbors as (element, aromatic flag).
    pub neighbors: Vec<(Element, bool)>,
}

impl AtomEnv {
    pub fn of(g: &MolGraph, idx: usize) -> AtomEnv {
        let atom = &g.atoms[idx];
        let mut neighbors = Vec::new();
        for b in &g.bonds {
            let other = if b.i == idx {
                b.j
            } else if b.j == idx {
                b.i
            } else {
                continue;
            };
            neighbors.push((g.atoms[other].element, g.atoms[other].aromatic));
        }
        AtomEnv {
            element: atom.element,
            aromatic: atom.aromatic,
            hydrogens: g.implicit_hydrogens(idx),
            neighbors,
        }
    }
}

#[derive(Debug, Clone)]
struct Predicate {
    element: Option<Element>,
    aromatic: Option<bool>,
    hydrogens: Option<u32>,
    degree: Option<usize>,
    /// Distinct neighbors must satisfy each descriptor (greedy assignment;
    /// the shipped table only uses single-descriptor lists).
    has: Vec<NeighborDesc>,
    /// Every neighbor must satisfy at least one descriptor.
    only: Vec<NeighborDesc>,
}

impl Predicate {
    fn unconditional_for(&self, element: Element, h: u32) -> bool {
        (self.element.is_none() || self.element == Some(element))
            && self.aromatic.is_none()
            && (self.hydrogens.is_none() || self.hydrogens == Some(h))
            && self.degree.is_none()
            && self.has.is_empty()
            && self.only.is_empty()
    }

    fn matches(&self, env: &AtomEnv) -> bool {
        if let Some(el) = self.element {
            if env.element != el {
                return false;
            }
        }
        if let Some(ar) = self.aromatic {
            if env.aromatic != ar {
                return false;
            }
        }
        if let Some(h) = self.hydrogens {
            if env.hydrogens != h {
                return false;
            }
        }
        if let Some(d) = self.degree {
            if env.neighbors.len() != d {
                return false;
            }
        }
        if !self.has.is_empty() {
            let mut used = vec![false; env.neighbors.len()];
            for desc in &self.has {
                let found = env.neighbors.iter().enumerate().position(|(k, &(el, ar))| {
                    !used[k] && desc.matches(el, ar)
                });
                match found {
                    Some(k) => used[k] = true,
                    None => return false,
                }
            }
        }
        if !self.only.is_empty() {
            for &(el, ar) in &env.neighbors {
                if !self.only.iter().any(|d| d.matches(el, ar)) {
                    return false;
                }
            }
        }
        true
    }
}

fn parse_predicate(text: &str, line: usize) -> Result<Predicate, TableError> {
    let fail = |message: String| TableError::Malformed { line, message };
    let mut p = Predicate {
        element: None,
        aromatic: None,
        hydrogens: None,
        degree: None,
        has: Vec::new(),
        only: Vec::new(),
    };
    for cond in text.split(';') {
        let (key, value) = cond
            .split_once('=')
            .ok_or_else(|| fail(format!("condition '{cond}' is not key=value")))?;
        match key {
            "elem" => {
                let el = Element::from_symbol(value)
                    .ok_or_else(|| fail(format!("unknown element '{value}'")))?;
                p.element = Some(el);
            }
            "arom" => {
                p.aromatic = Some(match value {
                    "0" => false,
                    "1" => true,
                    _ => return Err(fail(format!("arom must be 0 or 1, got '{value}'"))),
                });
            }
            "h" => {
                p.hydrogens =
                    Some(value.parse().map_err(|_| fail(format!("bad h count '{value}'")))?);
            }
            "deg" => {
                p.degree =
                    Some(value.parse().map_err(|_| fail(format!("bad degree '{value}'")))?);
            }
            "has" | "only" => {
                let mut descs = Vec::new();
                for token in value.split(',') {
                    let d = NeighborDesc::parse(token)
                        .ok_or_else(|| fail(format!("unknown neighbor descriptor '{token}'")))?;
                    descs.push(d);
                }
                if key == "has" {
                    p.has = descs;
                } else {
                    p.only = descs;
                }
            }
            _ => return Err(fail(format!("unknown condition key '{key}'"))),
        }
    }
    Ok(p)
}

/// One contribution row.
#[derive(Debug, Clone)]
pub struct Entry {
    pub type_id: String,
    predicate: Predicate,
    pub logp: f64,
    pub mr: f64,
}

/// Ordered, total atom-contribution table.
#[derive(Debug, Clone)]
pub struct ContributionTable {
    entries: Vec<Entry>,
}

impl ContributionTable {
    /// Parses the tab-separated table format. Blank lines and lines starting
    /// with '#' are skipped. Fails if any supported environment would fall
    /// through every row.
    pub fn parse(text: &str) -> Result<ContributionTable, TableError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 4 {
                return Err(TableError::Malformed {
                    line,
                    message: format!("expected 4 tab-separated fields, got {}", fields.len()),
                });
            }
            let logp: f64 = fields[2].parse().map_err(|_| TableError::Malformed {
                line,
                message: format!("bad logp value '{}'", fields[2]),
            })?;
            let mr: f64 = fields[3].parse().map_err(|_| TableError::Malformed {
                line,
                message: format!("bad mr value '{}'", fields[3]),
            })?;
            entries.push(Entry {
                type_id: fields[0].to_string(),
                predicate: parse_predicate(fields[1], line)?,
                logp,
                mr,
            });
        }
        let table = ContributionTable { entries };
        table.check_total()?;
        Ok(table)
    }

    /// The built-in table.
    pub fn builtin() -> &'static ContributionTable {
        static TABLE: std::sync::OnceLock<ContributionTable> = std::sync::OnceLock::new();
        TABLE.get_or_init(|| {
            ContributionTable::parse(include_str!("crippen.tsv"))
                .expect("built-in contribution table is well-formed")
        })
    }

    /// Totality: every element must have a row that matches regardless of
    /// aromaticity, degree, or neighbors, for every reachable hydrogen
    /// count. A bare atom fills to the smallest valence, so that is the
    /// hydrogen maximum.
    fn check_total(&self) -> Result<(), TableError> {
        for idx in 0..Element::COUNT {
            let element = Element::from_index(idx).unwrap();
            let max_h = *element.fill_valences().first().unwrap();
            for h in 0..=max_h {
                let covered = self
                    .entries
                    .iter()
                    .any(|e| e.predicate.unconditional_for(element, h));
                if !covered {
                    return Err(TableError::Incomplete { element, h });
                }
            }
        }
        Ok(())
    }

    /// First matching entry. Totality is checked at parse time, so this
    /// cannot fail on tables built through [`ContributionTable::parse`].
    pub fn classify(&self, env: &AtomEnv) -> &Entry {
        self.entries
            .iter()
            .find(|e| e.predicate.matches(env))
            .expect("contribution table is total")
    }

    /// Type ids for every atom, in atom order. Mostly useful in tests and
    /// for debugging property disagreements.
    pub fn assign_types(&self, g: &MolGraph) -> Vec<&str> {
        (0..g.atom_count())
            .map(|i| self.classify(&AtomEnv::of(g, i)).type_id.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for ContributionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "contribution table with {} entries", self.entries.len())
    }
}
