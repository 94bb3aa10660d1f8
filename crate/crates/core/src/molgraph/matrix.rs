use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::{bridge_flags, Atom, Bond, BondOrder, Element, MolGraph};

/// Shape of the dense graph encoding.
///
/// A graph becomes a `max_atoms x row_width` matrix, row `r` describing
/// atom `r`: column 0 carries the atom-count one-hot (a molecule with `n`
/// atoms has a 1 in row `n - 1`), the next `atom_types` columns one-hot the
/// element, and then `max_atoms` blocks of `bond_types` columns one-hot the
/// bond between atom `r` and each other atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSchema {
    pub max_atoms: usize,
    pub atom_types: usize,
    pub bond_types: usize,
}

impl Default for GraphSchema {
    fn default() -> Self {
        GraphSchema::with_max_atoms(16)
    }
}

impl GraphSchema {
    pub fn with_max_atoms(max_atoms: usize) -> GraphSchema {
        GraphSchema {
            max_atoms,
            atom_types: Element::COUNT,
            bond_types: BondOrder::COUNT,
        }
    }

    pub fn row_width(&self) -> usize {
        1 + self.atom_types + self.max_atoms * self.bond_types
    }

    /// Length of the flattened matrix. 1232 for the default schema.
    pub fn flat_len(&self) -> usize {
        self.max_atoms * self.row_width()
    }

    /// True when the schema agrees with the element and bond tables this
    /// build was compiled with. Caches and checkpoints from other layouts
    /// are rejected through this.
    pub fn compatible(&self) -> bool {
        self.max_atoms >= 1
            && self.atom_types == Element::COUNT
            && self.bond_types == BondOrder::COUNT
    }

    fn annotation_col(&self, element: Element) -> usize {
        1 + element.index()
    }

    fn bond_col(&self, j: usize, order: BondOrder) -> usize {
        1 + self.atom_types + j * self.bond_types + order.index()
    }
}

/// A graph rendered as a dense matrix, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialGraphMatrix {
    pub schema: GraphSchema,
    pub data: Vec<f64>,
}

impl InitialGraphMatrix {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.schema.row_width() + col]
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("graph has {atoms} atoms but the schema allows at most {max}")]
    SizeOverflow { atoms: usize, max: usize },
    #[error("cannot encode an empty graph")]
    EmptyGraph,
}

/// Encodes a graph into its dense matrix form.
///
/// The graph is expected to pass validation; this only checks the size
/// bound it cannot proceed without. Bond blocks are written symmetrically.
pub fn encode_matrix(g: &MolGraph, schema: &GraphSchema) -> Result<InitialGraphMatrix, CodecError> {
    let n = g.atom_count();
    if n == 0 {
        return Err(CodecError::EmptyGraph);
    }
    if n > schema.max_atoms {
        return Err(CodecError::SizeOverflow {
            atoms: n,
            max: schema.max_atoms,
        });
    }
    let w = schema.row_width();
    let mut data = vec![0.0; schema.flat_len()];
    data[(n - 1) * w] = 1.0;
    for (i, atom) in g.atoms.iter().enumerate() {
        data[i * w + schema.annotation_col(atom.element)] = 1.0;
    }
    for b in &g.bonds {
        data[b.i * w + schema.bond_col(b.j, b.order)] = 1.0;
        data[b.j * w + schema.bond_col(b.i, b.order)] = 1.0;
    }
    Ok(InitialGraphMatrix {
        schema: *schema,
        data,
    })
}

/// A proposed bond during decoding, scored by the decoder's confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondCandidate {
    pub i: usize,
    pub j: usize,
    pub order: BondOrder,
    pub confidence: f64,
}

/// Index of the largest entry, ties to the lowest index. NaN never wins.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (k, v) in values.enumerate() {
        if v > best_val {
            best_val = v;
            best = k;
        }
    }
    best
}

/// Decodes a dense matrix (typically decoder output probabilities) into a
/// valid molecular graph. Total: any finite input produces a graph that
/// passes validation against the same schema.
///
/// Atom count and element types are argmaxed; bond blocks are averaged
/// across the two symmetric positions, kept when the strongest entry
/// reaches 0.5, and then handed to [`repair`].
pub fn decode_matrix(data: &[f64], schema: &GraphSchema) -> MolGraph {
    assert_eq!(
        data.len(),
        schema.flat_len(),
        "matrix length does not match schema"
    );
    let w = schema.row_width();
    let s = schema.max_atoms;

    let n = 1 + argmax((0..s).map(|r| data[r * w]));
    let elements: Vec<Element> = (0..n)
        .map(|r| {
            let k = argmax((0..schema.atom_types).map(|c| data[r * w + 1 + c]));
            Element::from_index(k).expect("annotation block width matches element table")
        })
        .collect();

    let mut candidates = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut avg = [0.0f64; BondOrder::COUNT];
            for (k, slot) in avg.iter_mut().enumerate() {
                let o = BondOrder::from_index(k).unwrap();
                *slot = 0.5 * (data[i * w + schema.bond_col(j, o)] + data[j * w + schema.bond_col(i, o)]);
            }
            let k = argmax(avg.iter().copied());
            if avg[k] >= 0.5 {
                candidates.push(BondCandidate {
                    i,
                    j,
                    order: BondOrder::from_index(k).unwrap(),
                    confidence: avg[k],
                });
            }
        }
    }

    let repaired = repair(elements, candidates);
    if repaired.atom_count() > 0 {
        return repaired;
    }
    // Unreachable when n >= 1, kept as a hard floor for totality.
    let k = argmax((0..schema.atom_types).map(|c| data[1 + c]));
    MolGraph::new(vec![Atom::new(Element::from_index(k).unwrap())], vec![])
}

/// Builds a valid graph from atom elements and scored bond candidates.
///
/// Candidates are admitted greedily in order of descending confidence
/// (ties by ascending `(i, j)`) subject to valence caps, the aromatic
/// element whitelist, and at most three aromatic bonds per atom. Aromatic
/// bonds that end up off any aromatic cycle are demoted to single bonds,
/// single bonds joining two aromatic atoms are dropped, and the largest
/// connected component wins (ties to the component with the lowest atom
/// index). The result passes validation whenever `elements` is nonempty.
pub fn repair(elements: Vec<Element>, candidates: Vec<BondCandidate>) -> MolGraph {
    let n = elements.len();
    if n == 0 {
        return MolGraph::new(vec![], vec![]);
    }

    let mut order: Vec<BondCandidate> = candidates
        .into_iter()
        .filter(|c| c.i < n && c.j < n && c.i != c.j)
        .map(|c| BondCandidate {
            i: c.i.min(c.j),
            j: c.i.max(c.j),
            ..c
        })
        .collect();
    order.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });

    let mut half = vec![0u32; n];
    let mut arom_deg = vec![0u32; n];
    let mut taken = std::collections::HashSet::new();
    let mut bonds: Vec<Bond> = Vec::new();
    for c in order {
        if !taken.insert((c.i, c.j)) {
            continue;
        }
        let fits = |idx: usize| {
            let cap = elements[idx].max_valence() * 2;
            match c.order {
                BondOrder::Aromatic => {
                    elements[idx].aromatic_capable()
                        && arom_deg[idx] < 3
                        && half[idx] + 3 <= cap
                }
                o => half[idx] + o.half_units() <= cap,
            }
        };
        if fits(c.i) && fits(c.j) {
            half[c.i] += c.order.half_units();
            half[c.j] += c.order.half_units();
            if c.order == BondOrder::Aromatic {
                arom_deg[c.i] += 1;
                arom_deg[c.j] += 1;
            }
            bonds.push(Bond::new(c.i, c.j, c.order));
        }
    }

    // Aromatic bonds must sit on aromatic cycles. Bridges in the aromatic
    // subgraph cannot, so they become single bonds; everything else lies in
    // a two-edge-connected block and survives.
    let arom_edges: Vec<(usize, usize)> = bonds
        .iter()
        .filter(|b| b.order == BondOrder::Aromatic)
        .map(|b| (b.i, b.j))
        .collect();
    let bridges = bridge_flags(n, &arom_edges);
    let mut k = 0;
    for b in bonds.iter_mut() {
        if b.order == BondOrder::Aromatic {
            if bridges[k] {
                b.order = BondOrder::Single;
            }
            k += 1;
        }
    }

    let mut atoms: Vec<Atom> = elements.into_iter().map(Atom::new).collect();
    for b in &bonds {
        if b.order == BondOrder::Aromatic {
            atoms[b.i].aromatic = true;
            atoms[b.j].aromatic = true;
        }
    }

    bonds.retain(|b| {
        !(b.order == BondOrder::Single && atoms[b.i].aromatic && atoms[b.j].aromatic)
    });

    // Largest connected component, ties to the lowest atom index.
    let mut comp = vec![usize::MAX; n];
    let mut adj = vec![Vec::new(); n];
    for b in &bonds {
        adj[b.i].push(b.j);
        adj[b.j].push(b.i);
    }
    let mut comp_count = 0usize;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = comp_count;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = comp_count;
                    stack.push(v);
                }
            }
        }
        comp_count += 1;
    }
    let mut sizes = vec![0usize; comp_count];
    for &c in &comp {
        sizes[c] += 1;
    }
    // First maximum wins; component ids increase with their lowest member.
    let keep = argmax(sizes.iter().map(|&s| s as f64));

    let mut remap = vec![usize::MAX; n];
    let mut kept_atoms = Vec::new();
    for (i, atom) in atoms.into_iter().enumerate() {
        if comp[i] == keep {
            remap[i] = kept_atoms.len();
            kept_atoms.push(atom);
        }
    }
    let kept_bonds = bonds
        .into_iter()
        .filter(|b| comp[b.i] == keep)
        .map(|b| Bond::new(remap[b.i], remap[b.j], b.order))
        .collect();

    MolGraph::new(kept_atoms, kept_bonds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::Rng;

    fn benzene() -> MolGraph {
        let atoms = vec![Atom::aromatic(Element::C); 6];
        let bonds = (0..6)
            .map(|i| Bond::new(i, (i + 1) % 6, BondOrder::Aromatic))
            .collect();
        MolGraph::new(atoms, bonds)
    }

    fn ethanol() -> MolGraph {
        MolGraph::new(
            vec![
                Atom::new(Element::C),
                Atom::new(Element::C),
                Atom::new(Element::O),
            ],
            vec![
                Bond::new(0, 1, BondOrder::Single),
                Bond::new(1, 2, BondOrder::Single),
            ],
        )
    }

    fn bond_set(g: &MolGraph) -> std::collections::BTreeSet<(usize, usize, usize)> {
        g.bonds
            .iter()
            .map(|b| (b.i.min(b.j), b.i.max(b.j), b.order.index()))
            .collect()
    }

    #[test]
    fn schema_dimensions() {
        let schema = GraphSchema::default();
        assert_eq!(schema.max_atoms, 16);
        assert_eq!(schema.row_width(), 77);
        assert_eq!(schema.flat_len(), 1232);
        assert!(schema.compatible());
    }

    #[test]
    fn encode_layout() {
        let schema = GraphSchema::default();
        let m = encode_matrix(&ethanol(), &schema).unwrap();

        // Atom count one-hot: row 2, column 0.
        for r in 0..16 {
            assert_eq!(m.at(r, 0), if r == 2 { 1.0 } else { 0.0 });
        }
        // Annotations.
        assert_eq!(m.at(0, 1 + Element::C.index()), 1.0);
        assert_eq!(m.at(2, 1 + Element::O.index()), 1.0);
        // Bond blocks are symmetric.
        let col = |j: usize, o: BondOrder| 1 + 12 + j * 4 + o.index();
        assert_eq!(m.at(0, col(1, BondOrder::Single)), 1.0);
        assert_eq!(m.at(1, col(0, BondOrder::Single)), 1.0);
        assert_eq!(m.at(0, col(2, BondOrder::Single)), 0.0);
        // Everything sums to: 1 count + 3 annotations + 2 bonds * 2.
        let total: f64 = m.data.iter().sum();
        assert_eq!(total, 8.0);
    }

    #[test]
    fn encode_size_errors() {
        let schema = GraphSchema::with_max_atoms(2);
        assert_eq!(
            encode_matrix(&ethanol(), &schema),
            Err(CodecError::SizeOverflow { atoms: 3, max: 2 })
        );
        assert_eq!(
            encode_matrix(&MolGraph::new(vec![], vec![]), &schema),
            Err(CodecError::EmptyGraph)
        );
    }

    #[test]
    fn round_trip_preserves_the_graph() {
        let schema = GraphSchema::default();
        for g in [ethanol(), benzene()] {
            let m = encode_matrix(&g, &schema).unwrap();
            let back = decode_matrix(&m.data, &schema);
            assert_eq!(back.atoms, g.atoms);
            assert_eq!(bond_set(&back), bond_set(&g));
        }
    }

    #[test]
    fn decode_random_matrices_is_total_and_valid() {
        let schema = GraphSchema::default();
        let mut rng = Rng::new(0xDEC0DE);
        for _ in 0..200 {
            let data: Vec<f64> = (0..schema.flat_len()).map(|_| rng.uniform()).collect();
            let g = decode_matrix(&data, &schema);
            let report = g.validate(schema.max_atoms);
            assert!(report.valid(), "decoded graph invalid: {report}");
        }
    }

    #[test]
    fn decode_handles_non_finite_entries() {
        let schema = GraphSchema::default();
        let mut data = vec![f64::NAN; schema.flat_len()];
        data[3 * schema.row_width()] = f64::INFINITY;
        let g = decode_matrix(&data, &schema);
        assert!(g.validate(schema.max_atoms).valid());
    }

    #[test]
    fn repair_is_insensitive_to_candidate_order() {
        let mut rng = Rng::new(0x5EED);
        for _ in 0..100 {
            let n = 2 + rng.below(15);
            let elements: Vec<Element> = (0..n)
                .map(|_| Element::from_index(rng.below(Element::COUNT)).unwrap())
                .collect();
            let mut candidates = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.uniform() < 0.3 {
                        candidates.push(BondCandidate {
                            i,
                            j,
                            order: BondOrder::from_index(rng.below(4)).unwrap(),
                            confidence: 0.5 + 0.5 * rng.uniform(),
                        });
                    }
                }
            }
            let a = repair(elements.clone(), candidates.clone());
            let mut shuffled = candidates;
            rng.shuffle(&mut shuffled);
            let b = repair(elements, shuffled);
            assert_eq!(a.atoms, b.atoms);
            assert_eq!(bond_set(&a), bond_set(&b));
        }
    }

    #[test]
    fn repair_output_is_always_valid() {
        let mut rng = Rng::new(0xAB1E);
        for _ in 0..300 {
            let n = 1 + rng.below(16);
            let elements: Vec<Element> = (0..n)
                .map(|_| Element::from_index(rng.below(Element::COUNT)).unwrap())
                .collect();
            let mut candidates = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.uniform() < 0.4 {
                        candidates.push(BondCandidate {
                            i,
                            j,
                            order: BondOrder::from_index(rng.below(4)).unwrap(),
                            confidence: rng.uniform(),
                        });
                    }
                }
            }
            let g = repair(elements, candidates);
            assert!(g.atom_count() >= 1);
            let report = g.validate(16);
            assert!(report.valid(), "repair produced invalid graph: {report}");
        }
    }

    #[test]
    fn repair_prefers_higher_confidence() {
        // Fluorine takes one bond; two candidates compete for it.
        let elements = vec![Element::F, Element::C, Element::C];
        let candidates = vec![
            BondCandidate { i: 0, j: 1, order: BondOrder::Single, confidence: 0.6 },
            BondCandidate { i: 0, j: 2, order: BondOrder::Single, confidence: 0.9 },
            BondCandidate { i: 1, j: 2, order: BondOrder::Single, confidence: 0.7 },
        ];
        let g = repair(elements, candidates);
        // F bonds to atom 2, and 1-2 keeps everything connected.
        assert_eq!(bond_set(&g).len(), 2);
        assert!(g.bond_between(0, 2).is_some());
        assert!(g.bond_between(0, 1).is_none());
    }

    #[test]
    fn repair_demotes_stray_aromatic_bonds() {
        // A three-atom aromatic path: both edges are bridges, so they fall
        // back to single bonds and no atom stays aromatic.
        let elements = vec![Element::C, Element::C, Element::C];
        let candidates = vec![
            BondCandidate { i: 0, j: 1, order: BondOrder::Aromatic, confidence: 0.9 },
            BondCandidate { i: 1, j: 2, order: BondOrder::Aromatic, confidence: 0.8 },
        ];
        let g = repair(elements, candidates);
        assert_eq!(g.bond_between(0, 1), Some(BondOrder::Single));
        assert_eq!(g.bond_between(1, 2), Some(BondOrder::Single));
        assert!(g.atoms.iter().all(|a| !a.aromatic));
    }

    #[test]
    fn repair_keeps_largest_component() {
        // Atoms 0-1 bond; atoms 2-3-4 form a chain. The chain wins.
        let elements = vec![Element::C; 5];
        let candidates = vec![
            BondCandidate { i: 0, j: 1, order: BondOrder::Single, confidence: 0.9 },
            BondCandidate { i: 2, j: 3, order: BondOrder::Single, confidence: 0.8 },
            BondCandidate { i: 3, j: 4, order: BondOrder::Single, confidence: 0.8 },
        ];
        let g = repair(elements, candidates);
        assert_eq!(g.atom_count(), 3);
        assert_eq!(g.bond_count(), 2);
    }
}
