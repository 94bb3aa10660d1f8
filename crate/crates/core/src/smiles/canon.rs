use std::collections::BinaryHeap;

use crate::molgraph::{BondOrder, MolGraph};

use super::WriteError;

type Adj = Vec<Vec<(usize, BondOrder)>>;

/// Canonical atom ranks: a permutation of `0..atom_count`.
///
/// Ranks come from iterative neighborhood refinement plus tie-break
/// exploration, and are exactly the labeling that produces the canonical
/// SMILES string. Relabeling the graph permutes the ranks along with it,
/// up to graph automorphism (the six atoms of benzene are interchangeable,
/// so any of the six rotations of the rank vector is canonical; the output
/// string is identical either way).
pub fn canonical_rank(g: &MolGraph) -> Result<Vec<usize>, WriteError> {
    canon(g).map(|(ranks, _)| ranks)
}

/// Writes the canonical SMILES for a valid graph.
///
/// Two graphs produce the same string if and only if they are isomorphic
/// (as labeled graphs: elements, aromatic flags, bond orders). Aromatic
/// and single bonds are implicit in the output, which the validity rules
/// make unambiguous to reparse.
pub fn write_smiles(g: &MolGraph) -> Result<String, WriteError> {
    canon(g).map(|(_, s)| s)
}

fn canon(g: &MolGraph) -> Result<(Vec<usize>, String), WriteError> {
    let report = g.validate_unbounded();
    if !report.valid() {
        return Err(WriteError::InvalidGraph(report));
    }
    let adj = g.adjacency();
    let ranks = refine(&adj, &initial_ranks(g, &adj));
    let mut search = Search {
        g,
        adj: &adj,
        // Emission budget. Tie-break branching is bounded by the orbit
        // sizes of the refined partition, tiny for molecule-sized graphs;
        // the cap only guards against adversarial symmetric inputs.
        budget: 20_000,
        best: None,
    };
    search.explore(ranks)?;
    let (s, ranks) = search.best.expect("exploration emits at least one labeling");
    Ok((ranks, s))
}

/// Dense ranking: equal keys share a rank, ranks run 0..distinct.
fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted = keys.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).unwrap())
        .collect()
}

fn initial_ranks(g: &MolGraph, adj: &Adj) -> Vec<usize> {
    let keys: Vec<(usize, bool, usize, u32)> = (0..g.atom_count())
        .map(|a| {
            let half: u32 = adj[a].iter().map(|&(_, o)| o.half_units()).sum();
            (
                g.atoms[a].element.index(),
                g.atoms[a].aromatic,
                adj[a].len(),
                half,
            )
        })
        .collect();
    dense_ranks(&keys)
}

/// Refines ranks until stable: each round keys an atom by its own rank and
/// the multiset of (bond order, neighbor rank) pairs.
fn refine(adj: &Adj, init: &[usize]) -> Vec<usize> {
    let mut ranks = init.to_vec();
    loop {
        let keys: Vec<(usize, Vec<(usize, usize)>)> = (0..adj.len())
            .map(|a| {
                let mut nb: Vec<(usize, usize)> = adj[a]
                    .iter()
                    .map(|&(v, o)| (o.index(), ranks[v]))
                    .collect();
                nb.sort_unstable();
                (ranks[a], nb)
            })
            .collect();
        let next = dense_ranks(&keys);
        if next == ranks {
            return ranks;
        }
        ranks = next;
    }
}

struct Search<'a> {
    g: &'a MolGraph,
    adj: &'a Adj,
    budget: usize,
    best: Option<(String, Vec<usize>)>,
}

impl Search<'_> {
    /// Individualization-refinement: when ranks still tie, split the
    /// smallest tied class on each of its members in turn and keep the
    /// lexicographically smallest emitted string.
    fn explore(&mut self, ranks: Vec<usize>) -> Result<(), WriteError> {
        if self.budget == 0 {
            return Ok(());
        }
        let n = ranks.len();
        let max = ranks.iter().copied().max().unwrap_or(0);
        if max + 1 == n {
            self.budget -= 1;
            let s = emit(self.g, self.adj, &ranks)?;
            if self.best.as_ref().is_none_or(|(b, _)| s < *b) {
                self.best = Some((s, ranks));
            }
            return Ok(());
        }
        let mut count = vec![0usize; max + 1];
        for &r in &ranks {
            count[r] += 1;
        }
        let tied = (0..=max).find(|&r| count[r] > 1).unwrap();
        for m in 0..n {
            if ranks[m] != tied {
                continue;
            }
            // Promote m strictly ahead of its classmates, keep everything
            // else ordered as before, then refine again.
            let mut split: Vec<usize> = ranks.iter().map(|&x| x * 2 + 1).collect();
            split[m] -= 1;
            let refined = refine(self.adj, &dense_ranks(&split));
            self.explore(refined)?;
        }
        Ok(())
    }
}

/// Smallest-free-digit allocator for ring closures.
struct DigitHeap {
    free: BinaryHeap<std::cmp::Reverse<u8>>,
    next: u8,
}

impl DigitHeap {
    fn new() -> DigitHeap {
        DigitHeap {
            free: BinaryHeap::new(),
            next: 1,
        }
    }

    fn acquire(&mut self) -> Option<u8> {
        if let Some(std::cmp::Reverse(d)) = self.free.pop() {
            return Some(d);
        }
        if self.next > 99 {
            return None;
        }
        let d = self.next;
        self.next += 1;
        Some(d)
    }

    fn release(&mut self, d: u8) {
        self.free.push(std::cmp::Reverse(d));
    }
}

fn bond_text(order: BondOrder) -> &'static str {
    match order {
        BondOrder::Single | BondOrder::Aromatic => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
    }
}

/// Emits the SMILES string for one discrete ranking.
fn emit(g: &MolGraph, adj: &Adj, ranks: &[usize]) -> Result<String, WriteError> {
    let n = g.atom_count();
    let root = ranks.iter().position(|&r| r == 0).expect("dense ranks");

    let mut nbrs: Adj = adj.to_vec();
    for list in nbrs.iter_mut() {
        list.sort_by_key(|&(v, _)| ranks[v]);
    }

    // Pass 1: depth-first structure. Tree edges become the spine, every
    // other edge is a ring closure discovered at its later endpoint.
    let mut visited = vec![false; n];
    let mut pre_pos = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, BondOrder)>> = vec![Vec::new(); n];
    let mut ring_bonds: Vec<(usize, usize, BondOrder)> = Vec::new();
    let mut ring_seen = std::collections::HashSet::new();
    let mut preorder = Vec::with_capacity(n);

    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    visited[root] = true;
    pre_pos[root] = 0;
    preorder.push(root);
    while let Some(frame) = stack.last_mut() {
        let u = frame.0;
        if frame.1 >= nbrs[u].len() {
            stack.pop();
            continue;
        }
        let (v, order) = nbrs[u][frame.1];
        frame.1 += 1;
        if !visited[v] {
            visited[v] = true;
            pre_pos[v] = preorder.len();
            preorder.push(v);
            parent[v] = u;
            children[u].push((v, order));
            stack.push((v, 0));
        } else if parent[u] != v && parent[v] != u {
            let key = (u.min(v), u.max(v));
            if ring_seen.insert(key) {
                let (early, late) = if pre_pos[u] < pre_pos[v] { (u, v) } else { (v, u) };
                ring_bonds.push((early, late, order));
            }
        }
    }

    // Pass 2: ring closure digits. At each atom, closures that end here
    // free their digits first, then closures that start here take the
    // smallest digit available.
    let mut opens_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut closes_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (id, &(early, late, _)) in ring_bonds.iter().enumerate() {
        opens_at[early].push(id);
        closes_at[late].push(id);
    }
    for u in 0..n {
        opens_at[u].sort_by_key(|&id| pre_pos[ring_bonds[id].1]);
    }
    let mut digit = vec![0u8; ring_bonds.len()];
    let mut heap = DigitHeap::new();
    for &u in &preorder {
        closes_at[u].sort_by_key(|&id| digit[id]);
        for &id in &closes_at[u] {
            heap.release(digit[id]);
        }
        for &id in &opens_at[u] {
            digit[id] = heap.acquire().ok_or(WriteError::RingOverflow)?;
        }
    }

    // Pass 3: build the string.
    enum Task {
        Visit {
            atom: usize,
            bond: Option<BondOrder>,
            paren: bool,
        },
        Close,
    }
    let mut out = String::new();
    let mut tasks = vec![Task::Visit {
        atom: root,
        bond: None,
        paren: false,
    }];
    while let Some(task) = tasks.pop() {
        match task {
            Task::Close => out.push(')'),
            Task::Visit { atom, bond, paren } => {
                if paren {
                    out.push('(');
                }
                if let Some(o) = bond {
                    out.push_str(bond_text(o));
                }
                let sym = g.atoms[atom].element.symbol();
                if g.atoms[atom].aromatic {
                    out.push_str(&sym.to_ascii_lowercase());
                } else {
                    out.push_str(sym);
                }
                for &id in closes_at[atom].iter().chain(&opens_at[atom]) {
                    out.push_str(bond_text(ring_bonds[id].2));
                    let d = digit[id];
                    if d < 10 {
                        out.push((b'0' + d) as char);
                    } else {
                        out.push('%');
                        out.push((b'0' + d / 10) as char);
                        out.push((b'0' + d % 10) as char);
                    }
                }
                let k = children[atom].len();
                for idx in (0..k).rev() {
                    let (child, order) = children[atom][idx];
                    if idx + 1 == k {
                        tasks.push(Task::Visit {
                            atom: child,
                            bond: Some(order),
                            paren: false,
                        });
                    } else {
                        tasks.push(Task::Close);
                        tasks.push(Task::Visit {
                            atom: child,
                            bond: Some(order),
                            paren: true,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{Atom, Bond, Element};
    use crate::numcore::Rng;
    use crate::smiles::parse_smiles;

    const CORPUS: &[&str] = &[
        "C",
        "CC",
        "CCO",
        "CC(=O)N",
        "CC(C)(C)C",
        "C=C",
        "C#N",
        "O=C=O",
        "OCC(O)CO",
        "ClC(Cl)(Cl)Cl",
        "FC(F)(F)c1ccccc1",
        "c1ccccc1",
        "Cc1ccccc1",
        "Oc1ccccc1",
        "Nc1ccc(cc1)C(=O)N",
        "c1ccncc1",
        "c1ccsc1",
        "c1cscn1",
        "c1cnccn1",
        "C1CC1",
        "C1CCCCC1",
        "C1CCC2CCCCC2C1",
        "C1CCC2(CC1)CCC2",
        "C=1CCCCC=1",
        "CSiC",
        "CSnC",
        "CC(Br)CI",
        "O=S(C)C",
        "CP(C)C",
        "N#Cc1ccccc1",
    ];

    fn permute(g: &MolGraph, perm: &[usize]) -> MolGraph {
        let mut atoms = vec![Atom::new(Element::C); g.atom_count()];
        for (old, &new) in perm.iter().enumerate() {
            atoms[new] = g.atoms[old];
        }
        let bonds = g
            .bonds
            .iter()
            .map(|b| Bond::new(perm[b.i], perm[b.j], b.order))
            .collect();
        MolGraph::new(atoms, bonds)
    }

    #[test]
    fn exact_canonical_strings() {
        for (input, expect) in [
            ("C", "C"),
            ("CCO", "CCO"),
            ("OCC", "CCO"),
            ("c1ccccc1", "c1ccccc1"),
            ("C#N", "C#N"),
            ("N#C", "C#N"),
            ("CC(C)C", "CC(C)C"),
        ] {
            let g = parse_smiles(input).unwrap();
            assert_eq!(write_smiles(&g).unwrap(), expect, "input {input}");
        }
    }

    #[test]
    fn corpus_round_trips() {
        for s in CORPUS {
            let g = parse_smiles(s).unwrap_or_else(|e| panic!("{s}: {e}"));
            assert!(g.validate_unbounded().valid(), "{s} should be valid");
            let canonical = write_smiles(&g).unwrap();
            let reparsed = parse_smiles(&canonical)
                .unwrap_or_else(|e| panic!("{s} -> {canonical}: {e}"));
            assert_eq!(
                write_smiles(&reparsed).unwrap(),
                canonical,
                "writing is not idempotent for {s}"
            );
            assert_eq!(reparsed.atom_count(), g.atom_count());
            assert_eq!(reparsed.bond_count(), g.bond_count());
        }
    }

    #[test]
    fn canonical_string_is_permutation_invariant() {
        let mut rng = Rng::new(0xCA40);
        for s in CORPUS {
            let g = parse_smiles(s).unwrap();
            let reference = write_smiles(&g).unwrap();
            for _ in 0..10 {
                let mut perm: Vec<usize> = (0..g.atom_count()).collect();
                rng.shuffle(&mut perm);
                let permuted = permute(&g, &perm);
                assert_eq!(
                    write_smiles(&permuted).unwrap(),
                    reference,
                    "permutation changed the canonical string of {s}"
                );
            }
        }
    }

    #[test]
    fn ranks_are_permutations_and_equivariant() {
        let mut rng = Rng::new(0x4A4B);
        for s in CORPUS {
            let g = parse_smiles(s).unwrap();
            let ranks = canonical_rank(&g).unwrap();
            let mut sorted = ranks.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..g.atom_count()).collect::<Vec<_>>(), "{s}");

            // For a molecule with no symmetry the ranks must follow a
            // relabeling exactly.
            if *s == "CCO" || *s == "CC(=O)N" {
                for _ in 0..5 {
                    let mut perm: Vec<usize> = (0..g.atom_count()).collect();
                    rng.shuffle(&mut perm);
                    let permuted = permute(&g, &perm);
                    let pranks = canonical_rank(&permuted).unwrap();
                    for a in 0..g.atom_count() {
                        assert_eq!(pranks[perm[a]], ranks[a], "{s}");
                    }
                }
            }
        }
    }

    #[test]
    fn writer_rejects_invalid_graphs() {
        let empty = MolGraph::new(vec![], vec![]);
        assert!(matches!(
            write_smiles(&empty),
            Err(WriteError::InvalidGraph(_))
        ));

        // Aromatic path: parses, fails validity, so it cannot be written.
        let g = parse_smiles("ccc").unwrap();
        match write_smiles(&g) {
            Err(WriteError::InvalidGraph(report)) => assert!(!report.valid()),
            other => panic!("expected InvalidGraph, got {other:?}"),
        }
    }

    #[test]
    fn emitted_strings_stay_inside_the_subset() {
        for s in CORPUS {
            let canonical = write_smiles(&parse_smiles(s).unwrap()).unwrap();
            assert!(
                canonical
                    .chars()
                    .all(|c| !['-', '+', '.', '[', ']', ':', '@', '/', '\\'].contains(&c)),
                "{canonical} leaks outside the subset"
            );
        }
    }

    #[test]
    fn aromatic_rings_with_heteroatoms_round_trip() {
        // Thiazole: canonical form parses back to the same 5 atoms with
        // sulfur and nitrogen both in the ring.
        let g = parse_smiles("c1cscn1").unwrap();
        let s = write_smiles(&g).unwrap();
        let h = parse_smiles(&s).unwrap();
        let mut elements: Vec<&str> = h.atoms.iter().map(|a| a.element.symbol()).collect();
        elements.sort_unstable();
        assert_eq!(elements, vec!["C", "C", "C", "N", "S"]);
        assert!(h.atoms.iter().all(|a| a.aromatic));
    }
}
