//! Seeded generation of synthetic drug-like molecules.
//!
//! The generator assembles molecules from ring seeds and small functional
//! units under the same validity rules the rest of the pipeline enforces,
//! so every output parses, validates, and round-trips through the SMILES
//! writer. It exists to provide corpora for tests, demos, and desk-scale
//! training runs with a composition broad enough to populate the logP and
//! molar refractivity condition bins.
//!
//! The chemistry is intentionally conservative. Functional groups whose
//! property contributions depend on atoms two bonds away (free carboxylic
//! acids, enols, ureas, carbamates, enamines, aryl ketones) are not
//! produced, which keeps the local-environment property table in
//! [`crate::props`] faithful on everything the generator emits. Si, Sn and
//! B stay out of the corpus for the same reason they are rare in curated
//! drug-like sets; the parser and valence tables still support them.

use crate::molgraph::{Atom, Bond, BondOrder, Element, MolGraph};
use crate::numcore::Rng;
use crate::smiles::write_smiles;

/// Size bounds for generated molecules.
#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub min_atoms: usize,
    pub max_atoms: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            min_atoms: 4,
            max_atoms: 16,
        }
    }
}

struct Builder {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// Bond order sum in half units, aromatic weighted 1.5.
    half: Vec<u32>,
    /// Atoms that must not receive heteroatom or unsaturated additions:
    /// sp2/sp carbons and carbonyl carbons that already carry a heteroatom
    /// substituent.
    carbon_only: Vec<bool>,
    /// Atoms that accept no further additions at all (ring N, S, O sites).
    closed: Vec<bool>,
    max_atoms: usize,
}

impl Builder {
    fn new(max_atoms: usize) -> Builder {
        Builder {
            atoms: Vec::new(),
            bonds: Vec::new(),
            half: Vec::new(),
            carbon_only: Vec::new(),
            closed: Vec::new(),
            max_atoms,
        }
    }

    fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.half.push(0);
        self.carbon_only.push(false);
        self.closed.push(false);
        self.atoms.len() - 1
    }

    fn add_bond(&mut self, i: usize, j: usize, order: BondOrder) {
        self.half[i] += order.half_units();
        self.half[j] += order.half_units();
        self.bonds.push(Bond::new(i, j, order));
    }

    fn room(&self) -> usize {
        self.max_atoms - self.atoms.len()
    }

    fn free_half(&self, i: usize) -> u32 {
        self.atoms[i].element.max_valence() * 2 - self.half[i]
    }

    /// Sites that can accept one more single bond.
    fn open_sites(&self, require_plain_carbon: bool) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|&i| {
                !self.closed[i]
                    && self.free_half(i) >= 2
                    && (!require_plain_carbon
                        || (self.atoms[i].element == Element::C
                            && !self.atoms[i].aromatic
                            && !self.carbon_only[i]))
            })
            .collect()
    }

    fn graph(self) -> MolGraph {
        MolGraph::new(self.atoms, self.bonds)
    }
}

/// Aromatic and aliphatic ring seeds. Aromatic heteroatoms come out closed
/// because they have no free valence left (or, for thiophene sulfur, none
/// we want to use).
fn ring_seed(b: &mut Builder, rng: &mut Rng) {
    let template: &[(Element, bool)] = match rng.below(10) {
        0..=2 => &[(Element::C, true); 6],
        3 => &[
            (Element::N, true),
            (Element::C, true),
            (Element::C, true),
            (Element::C, true),
            (Element::C, true),
            (Element::C, true),
        ],
        4 => &[
            (Element::N, true),
            (Element::C, true),
            (Element::N, true),
            (Element::C, true),
            (Element::C, true),
            (Element::C, true),
        ],
        5 => &[
            (Element::S, true),
            (Element::C, true),
            (Element::C, true),
            (Element::C, true),
            (Element::C, true),
        ],
        6 => &[
            (Element::S, true),
            (Element::C, true),
            (Element::N, true),
            (Element::C, true),
            (Element::C, true),
        ],
        7 => &[(Element::C, false); 6],
        8 => &[(Element::C, false); 5],
        _ => &[
            (Element::O, false),
            (Element::C, false),
            (Element::C, false),
            (Element::C, false),
            (Element::C, false),
        ],
    };
    let aromatic = template[0].1;
    let base = b.atoms.len();
    for &(el, ar) in template {
        let idx = b.add_atom(if ar { Atom::aromatic(el) } else { Atom::new(el) });
        if el != Element::C {
            b.closed[idx] = true;
        }
    }
    let n = template.len();
    for k in 0..n {
        let order = if aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        };
        b.add_bond(base + k, base + (k + 1) % n, order);
    }
}

/// One growth step. Returns false when nothing could be added.
fn grow(b: &mut Builder, rng: &mut Rng) -> bool {
    if b.room() == 0 {
        return false;
    }
    // (weight, minimum room, needs plain carbon site)
    const UNITS: &[(f64, usize, bool, Unit)] = &[
        (0.42, 1, false, Unit::Carbon),
        (0.10, 1, true, Unit::Oxygen),
        (0.08, 1, true, Unit::Nitrogen),
        (0.045, 1, true, Unit::Halogen(Element::F)),
        (0.065, 1, true, Unit::Halogen(Element::Cl)),
        (0.025, 1, true, Unit::Halogen(Element::Br)),
        (0.01, 1, true, Unit::Halogen(Element::I)),
        (0.045, 2, true, Unit::Thioether),
        (0.075, 2, true, Unit::Carbonyl),
        (0.03, 2, true, Unit::Nitrile),
        (0.045, 2, true, Unit::Alkene),
        (0.012, 2, true, Unit::Imine),
        (0.008, 2, true, Unit::Alkyne),
        (0.01, 3, true, Unit::Phosphine),
        (0.08, 6, false, Unit::ArylRing),
    ];
    for _attempt in 0..12 {
        let total: f64 = UNITS
            .iter()
            .filter(|u| u.1 <= b.room())
            .map(|u| u.0)
            .sum();
        if total == 0.0 {
            return false;
        }
        let mut pick = rng.uniform() * total;
        let mut chosen = None;
        for u in UNITS.iter().filter(|u| u.1 <= b.room()) {
            pick -= u.0;
            if pick <= 0.0 {
                chosen = Some(u);
                break;
            }
        }
        let &(_, _, plain, unit) = chosen.unwrap_or(&UNITS[0]);
        let sites = b.open_sites(plain);
        if sites.is_empty() {
            // Only plain additions may be impossible; retry with carbon.
            if b.open_sites(false).is_empty() {
                return false;
            }
            continue;
        }
        let site = sites[rng.below(sites.len())];
        if apply_unit(b, rng, unit, site) {
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unit {
    Carbon,
    Oxygen,
    Nitrogen,
    Halogen(Element),
    Thioether,
    Carbonyl,
    Nitrile,
    Alkene,
    Imine,
    Alkyne,
    Phosphine,
    ArylRing,
}

fn apply_unit(b: &mut Builder, rng: &mut Rng, unit: Unit, site: usize) -> bool {
    match unit {
        Unit::Carbon => {
            let c = b.add_atom(Atom::new(Element::C));
            b.add_bond(site, c, BondOrder::Single);
            true
        }
        Unit::Oxygen => {
            let o = b.add_atom(Atom::new(Element::O));
            b.add_bond(site, o, BondOrder::Single);
            true
        }
        Unit::Nitrogen => {
            let n = b.add_atom(Atom::new(Element::N));
            b.add_bond(site, n, BondOrder::Single);
            true
        }
        Unit::Halogen(el) => {
            let x = b.add_atom(Atom::new(el));
            b.add_bond(site, x, BondOrder::Single);
            true
        }
        Unit::Thioether => {
            // C-S-C so no S-H ever appears.
            let s = b.add_atom(Atom::new(Element::S));
            let c = b.add_atom(Atom::new(Element::C));
            b.add_bond(site, s, BondOrder::Single);
            b.add_bond(s, c, BondOrder::Single);
            b.closed[s] = true;
            true
        }
        Unit::Carbonyl => {
            // site-C(=O); the carbonyl carbon accepts only carbon later.
            let c = b.add_atom(Atom::new(Element::C));
            let o = b.add_atom(Atom::new(Element::O));
            b.add_bond(site, c, BondOrder::Single);
            b.add_bond(c, o, BondOrder::Double);
            b.carbon_only[c] = true;
            b.closed[o] = true;
            true
        }
        Unit::Nitrile => {
            let c = b.add_atom(Atom::new(Element::C));
            let n = b.add_atom(Atom::new(Element::N));
            b.add_bond(site, c, BondOrder::Single);
            b.add_bond(c, n, BondOrder::Triple);
            b.carbon_only[c] = true;
            b.closed[n] = true;
            true
        }
        Unit::Alkene => {
            let a = b.add_atom(Atom::new(Element::C));
            let c = b.add_atom(Atom::new(Element::C));
            b.add_bond(site, a, BondOrder::Single);
            b.add_bond(a, c, BondOrder::Double);
            b.carbon_only[a] = true;
            b.carbon_only[c] = true;
            true
        }
        Unit::Imine => {
            let a = b.add_atom(Atom::new(Element::C));
            let n = b.add_atom(Atom::new(Element::N));
            b.add_bond(site, a, BondOrder::Single);
            b.add_bond(a, n, BondOrder::Double);
            b.carbon_only[a] = true;
            b.closed[n] = true;
            true
        }
        Unit::Alkyne => {
            let a = b.add_atom(Atom::new(Element::C));
            let c = b.add_atom(Atom::new(Element::C));
            b.add_bond(site, a, BondOrder::Single);
            b.add_bond(a, c, BondOrder::Triple);
            b.carbon_only[a] = true;
            b.carbon_only[c] = true;
            true
        }
        Unit::Phosphine => {
            // Saturated P(C)(C)(site): no P-H.
            let p = b.add_atom(Atom::new(Element::P));
            let c1 = b.add_atom(Atom::new(Element::C));
            let c2 = b.add_atom(Atom::new(Element::C));
            b.add_bond(site, p, BondOrder::Single);
            b.add_bond(p, c1, BondOrder::Single);
            b.add_bond(p, c2, BondOrder::Single);
            b.closed[p] = true;
            true
        }
        Unit::ArylRing => {
            // Attach a whole aromatic ring through a single bond. The site
            // must be aliphatic: a direct aromatic-aromatic single bond is
            // invalid. Heteroatom sites are fine (aryl amines, aryl
            // ethers), but sp2/sp carbons are not, so no aryl ketones or
            // styrenes sneak past the local-environment property table.
            if b.atoms[site].aromatic || b.carbon_only[site] {
                return false;
            }
            let base = b.atoms.len();
            let ring: &[(Element, bool)] = match rng.below(4) {
                0 | 1 => &[(Element::C, true); 6],
                2 => &[
                    (Element::N, true),
                    (Element::C, true),
                    (Element::C, true),
                    (Element::C, true),
                    (Element::C, true),
                    (Element::C, true),
                ],
                _ => &[
                    (Element::S, true),
                    (Element::C, true),
                    (Element::C, true),
                    (Element::C, true),
                    (Element::C, true),
                ],
            };
            if ring.len() > b.room() {
                return false;
            }
            for &(el, _) in ring {
                let idx = b.add_atom(Atom::aromatic(el));
                if el != Element::C {
                    b.closed[idx] = true;
                }
            }
            let n = ring.len();
            for k in 0..n {
                b.add_bond(base + k, base + (k + 1) % n, BondOrder::Aromatic);
            }
            // Bond through a carbon of the new ring.
            let carbons: Vec<usize> = (base..base + n)
                .filter(|&i| b.atoms[i].element == Element::C)
                .collect();
            let anchor = carbons[rng.below(carbons.len())];
            b.add_bond(site, anchor, BondOrder::Single);
            true
        }
    }
}

/// Generates one valid molecule.
pub fn synth_molecule(rng: &mut Rng, config: &SynthConfig) -> MolGraph {
    assert!(config.min_atoms >= 1 && config.min_atoms <= config.max_atoms);
    let span = config.max_atoms - config.min_atoms + 1;
    // Mean of two draws biases sizes toward the middle of the range.
    let target = config.min_atoms + (rng.below(span) + rng.below(span)) / 2;

    let mut b = Builder::new(config.max_atoms);
    let seed_ring = rng.uniform() < 0.6 && target >= 6;
    if seed_ring {
        ring_seed(&mut b, rng);
    } else {
        b.add_atom(Atom::new(Element::C));
    }
    while b.atoms.len() < target {
        if !grow(&mut b, rng) {
            break;
        }
    }
    // A lone carbon below the minimum can always take more carbons.
    while b.atoms.len() < config.min_atoms {
        let sites = b.open_sites(false);
        if sites.is_empty() || b.room() == 0 {
            break;
        }
        let site = sites[rng.below(sites.len())];
        let c = b.add_atom(Atom::new(Element::C));
        b.add_bond(site, c, BondOrder::Single);
    }
    b.graph()
}

/// Generates `count` distinct canonical SMILES strings. Deterministic in
/// the seed; insertion order is preserved.
pub fn synth_corpus(seed: u64, count: usize, config: &SynthConfig) -> Vec<String> {
    let mut rng = Rng::new(seed);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(count);
    // Distinct molecules of bounded size are plentiful; the attempt cap
    // only matters for tiny max_atoms.
    let max_attempts = count.saturating_mul(50).max(1000);
    for _ in 0..max_attempts {
        if out.len() == count {
            break;
        }
        let g = synth_molecule(&mut rng, config);
        let s = write_smiles(&g).expect("generator output is valid");
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}
