use std::fmt;

/// The twelve elements the pipeline models.
///
/// The variant order is load-bearing: it is the column order of the atom
/// annotation block in the graph matrix and the index order everywhere a
/// dense per-element table appears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    B,
    C,
    N,
    O,
    F,
    Si,
    P,
    S,
    Cl,
    Br,
    Sn,
    I,
}

impl Element {
    pub const COUNT: usize = 12;

    pub const ALL: [Element; Element::COUNT] = [
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::Si,
        Element::P,
        Element::S,
        Element::Cl,
        Element::Br,
        Element::Sn,
        Element::I,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Element> {
        Element::ALL.get(i).copied()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::Si => "Si",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::Sn => "Sn",
            Element::I => "I",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Element> {
        Element::ALL.iter().copied().find(|e| e.symbol() == s)
    }

    /// Hard valence cap used by the validity rules and by bond repair.
    pub fn max_valence(self) -> u32 {
        match self {
            Element::B => 3,
            Element::C => 4,
            Element::N => 3,
            Element::O => 2,
            Element::F => 1,
            Element::Si => 4,
            Element::P => 5,
            Element::S => 6,
            Element::Cl => 1,
            Element::Br => 1,
            Element::Sn => 4,
            Element::I => 1,
        }
    }

    /// Elements allowed to carry the aromatic flag.
    pub fn aromatic_capable(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        )
    }

    /// Valence states implicit hydrogens fill up to, in ascending order.
    pub(crate) fn fill_valences(self) -> &'static [u32] {
        match self {
            Element::B => &[3],
            Element::C => &[4],
            Element::N => &[3],
            Element::O => &[2],
            Element::F => &[1],
            Element::Si => &[4],
            Element::P => &[3, 5],
            Element::S => &[2, 4, 6],
            Element::Cl => &[1],
            Element::Br => &[1],
            Element::Sn => &[4],
            Element::I => &[1],
        }
    }

    /// Weight of one aromatic bond in half-valence units when counting
    /// implicit hydrogens.
    ///
    /// Two-coordinate ring heteroatoms (S, O) contribute both ring bonds
    /// as singles in any Kekule assignment, so their aromatic bonds weigh
    /// 1.0; for the rest the usual 1.5 applies. This reproduces the
    /// hydrogen counts of the common aromatics: one H on benzene carbons,
    /// none on pyridine nitrogen or thiophene sulfur.
    pub(crate) fn aromatic_half_units(self) -> u32 {
        match self {
            Element::S | Element::O => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Bond orders. Variant order is the column order of a bond block in the
/// graph matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    pub const COUNT: usize = 4;

    pub const ALL: [BondOrder; BondOrder::COUNT] = [
        BondOrder::Single,
        BondOrder::Double,
        BondOrder::Triple,
        BondOrder::Aromatic,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<BondOrder> {
        BondOrder::ALL.get(i).copied()
    }

    /// Bond order in half units: single 2, double 4, triple 6, aromatic 3.
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }
}

/// An atom: element plus aromatic flag. Hydrogens are implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            aromatic: false,
        }
    }

    pub fn aromatic(element: Element) -> Atom {
        Atom {
            element,
            aromatic: true,
        }
    }
}

/// An undirected bond between atom indices `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub order: BondOrder,
}

impl Bond {
    /// Normalizes the endpoint order so `i < j` when both are distinct.
    pub fn new(i: usize, j: usize, order: BondOrder) -> Bond {
        if j < i {
            Bond { i: j, j: i, order }
        } else {
            Bond { i, j, order }
        }
    }
}

/// A molecular graph: hydrogen-suppressed, undirected, connected when valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
}

/// Identifiers for the validity rules. One violation record names the rule
/// it breaks, so reports stay machine-checkable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleId {
    /// Atom count must be in `1..=max_atoms` (upper bound only when the
    /// check runs against a schema).
    AtomCount,
    /// Bond endpoints must be distinct indices inside the atom list.
    BondEndpoints,
    /// At most one bond per atom pair.
    DuplicateBond,
    /// The graph must be a single connected component.
    Connectivity,
    /// Sum of bond orders at an atom (aromatic counting 1.5) must not
    /// exceed the element's valence cap.
    Valence,
    /// Every aromatic bond must lie on a cycle made of aromatic bonds.
    AromaticCycle,
    /// An atom with aromatic bonds must have two or three of them.
    AromaticNeighbors,
    /// The aromatic flag on an atom must match incidence of aromatic bonds.
    AromaticFlag,
    /// Only B, C, N, O, P, S may be aromatic.
    AromaticElement,
    /// No single bond may join two aromatic atoms.
    AromaticSingleBond,
}

/// Where a violation sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Graph,
    Atom(usize),
    Bond(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub rule: RuleId,
    pub site: Site,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.site {
            Site::Graph => write!(f, "{:?}: {}", self.rule, self.message),
            Site::Atom(i) => write!(f, "{:?} at atom {}: {}", self.rule, i, self.message),
            Site::Bond(i, j) => write!(f, "{:?} at bond {}-{}: {}", self.rule, i, j, self.message),
        }
    }
}

/// Result of a validity check. Valid if and only if `violations` is empty.
#[derive(Debug, Clone, Default)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid() {
            return f.write_str("valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl MolGraph {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> MolGraph {
        MolGraph { atoms, bonds }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Adjacency lists `(neighbor, order)`, both directions per bond.
    /// Bonds with out-of-range or equal endpoints are skipped so this is
    /// usable on graphs that have not passed validation yet.
    pub fn adjacency(&self) -> Vec<Vec<(usize, BondOrder)>> {
        let n = self.atoms.len();
        let mut adj = vec![Vec::new(); n];
        for b in &self.bonds {
            if b.i < n && b.j < n && b.i != b.j {
                adj[b.i].push((b.j, b.order));
                adj[b.j].push((b.i, b.order));
            }
        }
        adj
    }

    pub fn bond_between(&self, i: usize, j: usize) -> Option<BondOrder> {
        self.bonds
            .iter()
            .find(|b| (b.i == i && b.j == j) || (b.i == j && b.j == i))
            .map(|b| b.order)
    }

    /// Sum of bond orders at `idx` in half units, aromatic counting 1.5.
    pub fn valence_half_units(&self, idx: usize) -> u32 {
        self.bonds
            .iter()
            .filter(|b| b.i == idx || b.j == idx)
            .map(|b| b.order.half_units())
            .sum()
    }

    /// Number of implicit hydrogens on atom `idx`.
    ///
    /// The bond order sum (aromatic weighted per element, see
    /// [`Element::aromatic_half_units`]) is rounded up to a whole valence;
    /// hydrogens fill the gap to the smallest fill valence that
    /// accommodates it. Atoms over their largest fill valence get none.
    pub fn implicit_hydrogens(&self, idx: usize) -> u32 {
        let el = self.atoms[idx].element;
        let half: u32 = self
            .bonds
            .iter()
            .filter(|b| b.i == idx || b.j == idx)
            .map(|b| match b.order {
                BondOrder::Aromatic => el.aromatic_half_units(),
                other => other.half_units(),
            })
            .sum();
        let used = half.div_ceil(2);
        for &fill in el.fill_valences() {
            if fill >= used {
                return fill - used;
            }
        }
        0
    }

    /// Heavy-atom degree of atom `idx`.
    pub fn degree(&self, idx: usize) -> usize {
        self.bonds
            .iter()
            .filter(|b| b.i == idx || b.j == idx)
            .count()
    }

    /// Checks all validity rules against a maximum atom count.
    pub fn validate(&self, max_atoms: usize) -> ValidityReport {
        self.check(Some(max_atoms))
    }

    /// Checks all validity rules except the atom count cap. Used where no
    /// schema applies, for example when writing SMILES for arbitrary sizes.
    pub fn validate_unbounded(&self) -> ValidityReport {
        self.check(None)
    }

    fn check(&self, max_atoms: Option<usize>) -> ValidityReport {
        let mut report = ValidityReport::default();
        let n = self.atoms.len();

        if n == 0 {
            report.violations.push(Violation {
                rule: RuleId::AtomCount,
                site: Site::Graph,
                message: "graph has no atoms".into(),
            });
            return report;
        }
        if let Some(cap) = max_atoms {
            if n > cap {
                report.violations.push(Violation {
                    rule: RuleId::AtomCount,
                    site: Site::Graph,
                    message: format!("{n} atoms exceeds the limit of {cap}"),
                });
            }
        }

        // Endpoint sanity and duplicates. Malformed bonds are reported and
        // then ignored by the structural checks below.
        let mut seen = std::collections::HashSet::new();
        let mut sound = Vec::new();
        for b in &self.bonds {
            if b.i >= n || b.j >= n || b.i == b.j {
                report.violations.push(Violation {
                    rule: RuleId::BondEndpoints,
                    site: Site::Bond(b.i, b.j),
                    message: format!("endpoints out of range or equal (atom count {n})"),
                });
                continue;
            }
            let key = (b.i.min(b.j), b.i.max(b.j));
            if !seen.insert(key) {
                report.violations.push(Violation {
                    rule: RuleId::DuplicateBond,
                    site: Site::Bond(b.i, b.j),
                    message: "more than one bond between this atom pair".into(),
                });
                continue;
            }
            sound.push(Bond::new(b.i, b.j, b.order));
        }

        let mut adj = vec![Vec::new(); n];
        for b in &sound {
            adj[b.i].push((b.j, b.order));
            adj[b.j].push((b.i, b.order));
        }

        // Connectivity by BFS from atom 0.
        let mut reached = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        reached[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if !reached[v] {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }
        let unreached = reached.iter().filter(|&&r| !r).count();
        if unreached > 0 {
            report.violations.push(Violation {
                rule: RuleId::Connectivity,
                site: Site::Graph,
                message: format!("{unreached} of {n} atoms unreachable from atom 0"),
            });
        }

        // Valence cap, aromatic counting 1.5 (3 half units).
        for (i, atom) in self.atoms.iter().enumerate() {
            let half: u32 = adj[i].iter().map(|&(_, o)| o.half_units()).sum();
            let cap = atom.element.max_valence() * 2;
            if half > cap {
                report.violations.push(Violation {
                    rule: RuleId::Valence,
                    site: Site::Atom(i),
                    message: format!(
                        "bond order sum {:.1} exceeds {} for {}",
                        half as f64 / 2.0,
                        atom.element.max_valence(),
                        atom.element
                    ),
                });
            }
        }

        // Aromatic subgraph rules. A bridge in the subgraph of aromatic
        // bonds is an aromatic bond on no aromatic cycle.
        let aromatic_edges: Vec<(usize, usize)> = sound
            .iter()
            .filter(|b| b.order == BondOrder::Aromatic)
            .map(|b| (b.i, b.j))
            .collect();
        let bridges = bridge_flags(n, &aromatic_edges);
        for (k, &(i, j)) in aromatic_edges.iter().enumerate() {
            if bridges[k] {
                report.violations.push(Violation {
                    rule: RuleId::AromaticCycle,
                    site: Site::Bond(i, j),
                    message: "aromatic bond not on an aromatic cycle".into(),
                });
            }
        }

        for (i, atom) in self.atoms.iter().enumerate() {
            let arom_deg = adj[i]
                .iter()
                .filter(|&&(_, o)| o == BondOrder::Aromatic)
                .count();
            if arom_deg > 0 && !(2..=3).contains(&arom_deg) {
                report.violations.push(Violation {
                    rule: RuleId::AromaticNeighbors,
                    site: Site::Atom(i),
                    message: format!("{arom_deg} aromatic bonds, expected 2 or 3"),
                });
            }
            if atom.aromatic != (arom_deg > 0) {
                report.violations.push(Violation {
                    rule: RuleId::AromaticFlag,
                    site: Site::Atom(i),
                    message: if atom.aromatic {
                        "flagged aromatic but has no aromatic bond".into()
                    } else {
                        "has aromatic bonds but is not flagged aromatic".into()
                    },
                });
            }
            if atom.aromatic && !atom.element.aromatic_capable() {
                report.violations.push(Violation {
                    rule: RuleId::AromaticElement,
                    site: Site::Atom(i),
                    message: format!("{} cannot be aromatic", atom.element),
                });
            }
        }

        for b in &sound {
            if b.order == BondOrder::Single
                && self.atoms[b.i].aromatic
                && self.atoms[b.j].aromatic
            {
                report.violations.push(Violation {
                    rule: RuleId::AromaticSingleBond,
                    site: Site::Bond(b.i, b.j),
                    message: "single bond between two aromatic atoms".into(),
                });
            }
        }

        report
    }
}

/// Marks which edges are bridges: removing a bridge increases the number of
/// connected components. Classic low-link computation, iterative so deep
/// chains cannot overflow the stack. Edges touching out-of-range or equal
/// endpoints must not be passed in.
pub(crate) fn bridge_flags(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, &(i, j)) in edges.iter().enumerate() {
        adj[i].push((j, k));
        adj[j].push((i, k));
    }

    let mut disc = vec![usize::MAX; n];
    let mut low = vec![usize::MAX; n];
    let mut is_bridge = vec![false; edges.len()];
    let mut timer = 0usize;

    for start in 0..n {
        if disc[start] != usize::MAX {
            continue;
        }
        // Frame: (node, incoming edge id, next adjacency slot).
        let mut stack: Vec<(usize, usize, usize)> = vec![(start, usize::MAX, 0)];
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        while let Some(frame) = stack.last_mut() {
            let (u, in_edge) = (frame.0, frame.1);
            if frame.2 < adj[u].len() {
                let (v, edge_id) = adj[u][frame.2];
                frame.2 += 1;
                if edge_id == in_edge {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, edge_id, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(parent) = stack.last() {
                    let p = parent.0;
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        is_bridge[in_edge] = true;
                    }
                }
            }
        }
    }
    is_bridge
}
