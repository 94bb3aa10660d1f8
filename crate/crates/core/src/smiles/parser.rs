use std::collections::HashMap;

use crate::molgraph::{Atom, Bond, BondOrder, MolGraph};

use super::lexer::{tokenize, TokenKind};
use super::SmilesError;

/// Parses a SMILES string from the supported subset into a molecular graph.
///
/// Syntax only: the returned graph may still fail validity (an aromatic
/// path that closes no ring, an overloaded valence). Bonds with no symbol
/// are aromatic when both endpoints are aromatic atoms and single
/// otherwise; the same rule applies to ring closures.
pub fn parse_smiles(text: &str) -> Result<MolGraph, SmilesError> {
    let tokens = tokenize(text)?;

    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut bonded = std::collections::HashSet::new();
    // Attachment point for the next atom or ring digit.
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondOrder, usize)> = None;
    let mut branch_stack: Vec<usize> = Vec::new();
    // Open ring closures: digit -> (atom, explicit bond, position).
    let mut rings: HashMap<u8, (usize, Option<BondOrder>, usize)> = HashMap::new();

    for token in tokens {
        match token.kind {
            TokenKind::Atom { element, aromatic } => {
                let idx = atoms.len();
                atoms.push(Atom { element, aromatic });
                if let Some(p) = prev {
                    let order = pending
                        .take()
                        .map(|(o, _)| o)
                        .unwrap_or_else(|| implicit_order(&atoms, p, idx));
                    if !bonded.insert((p.min(idx), p.max(idx))) {
                        unreachable!("a fresh atom cannot already be bonded");
                    }
                    bonds.push(Bond::new(p, idx, order));
                }
                prev = Some(idx);
            }
            TokenKind::Bond(order) => {
                if prev.is_none() {
                    return Err(SmilesError::Syntax {
                        pos: token.pos,
                        message: "bond symbol with no preceding atom".into(),
                    });
                }
                if pending.is_some() {
                    return Err(SmilesError::Syntax {
                        pos: token.pos,
                        message: "two bond symbols in a row".into(),
                    });
                }
                pending = Some((order, token.pos));
            }
            TokenKind::BranchOpen => {
                let Some(p) = prev else {
                    return Err(SmilesError::Syntax {
                        pos: token.pos,
                        message: "branch opened before any atom".into(),
                    });
                };
                if pending.is_some() {
                    return Err(SmilesError::Syntax {
                        pos: token.pos,
                        message: "bond symbol before '('".into(),
                    });
                }
                branch_stack.push(p);
            }
            TokenKind::BranchClose => {
                if pending.is_some() {
                    return Err(SmilesError::Syntax {
                        pos: token.pos,
                        message: "dangling bond before ')'".into(),
                    });
                }
                match branch_stack.pop() {
                    Some(p) => prev = Some(p),
                    None => {
                        return Err(SmilesError::Syntax {
                            pos: token.pos,
                            message: "unmatched ')'".into(),
                        });
                    }
                }
            }
            TokenKind::Ring(digit) => {
                let Some(here) = prev else {
                    return Err(SmilesError::Syntax {
                        pos: token.pos,
                        message: "ring closure before any atom".into(),
                    });
                };
                let explicit = pending.take().map(|(o, _)| o);
                match rings.remove(&digit) {
                    None => {
                        rings.insert(digit, (here, explicit, token.pos));
                    }
                    Some((there, other_explicit, _)) => {
                        if there == here {
                            return Err(SmilesError::Syntax {
                                pos: token.pos,
                                message: format!("ring closure {digit} bonds an atom to itself"),
                            });
                        }
                        let order = match (other_explicit, explicit) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(SmilesError::Syntax {
                                    pos: token.pos,
                                    message: format!(
                                        "ring closure {digit} has conflicting bond symbols"
                                    ),
                                });
                            }
                            (Some(a), _) | (_, Some(a)) => a,
                            (None, None) => implicit_order(&atoms, there, here),
                        };
                        if !bonded.insert((there.min(here), there.max(here))) {
                            return Err(SmilesError::Syntax {
                                pos: token.pos,
                                message: format!(
                                    "duplicate bond between atoms {there} and {here}"
                                ),
                            });
                        }
                        bonds.push(Bond::new(there, here, order));
                    }
                }
            }
        }
    }

    if let Some((_, pos)) = pending {
        return Err(SmilesError::Syntax {
            pos,
            message: "dangling bond at end of input".into(),
        });
    }
    if !branch_stack.is_empty() {
        return Err(SmilesError::Syntax {
            pos: text.len(),
            message: format!("{} unclosed branch(es)", branch_stack.len()),
        });
    }
    if let Some((&digit, &(_, _, pos))) = rings.iter().min_by_key(|(_, &(_, _, p))| p) {
        return Err(SmilesError::Syntax {
            pos,
            message: format!("unpaired ring closure {digit}"),
        });
    }

    Ok(MolGraph::new(atoms, bonds))
}

fn implicit_order(atoms: &[Atom], a: usize, b: usize) -> BondOrder {
    if atoms[a].aromatic && atoms[b].aromatic {
        BondOrder::Aromatic
    } else {
        BondOrder::Single
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::Element;

    fn parse(s: &str) -> MolGraph {
        parse_smiles(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn linear_and_branched() {
        let g = parse("CCO");
        assert_eq!(g.atom_count(), 3);
        assert_eq!(g.atoms[2].element, Element::O);
        assert_eq!(g.bond_between(0, 1), Some(BondOrder::Single));
        assert_eq!(g.bond_between(1, 2), Some(BondOrder::Single));
        assert!(g.validate(16).valid());

        let g = parse("CC(=O)N");
        assert_eq!(g.atom_count(), 4);
        assert_eq!(g.bond_between(1, 2), Some(BondOrder::Double));
        assert_eq!(g.bond_between(1, 3), Some(BondOrder::Single));
        assert!(g.validate(16).valid());

        let g = parse("C(C)(C)(C)C");
        assert_eq!(g.degree(0), 4);
    }

    #[test]
    fn rings_and_reuse() {
        let g = parse("C1CC1");
        assert_eq!(g.bond_count(), 3);
        assert_eq!(g.bond_between(0, 2), Some(BondOrder::Single));

        // Digit 1 reused after it closes.
        let g = parse("C1CC1C1CC1");
        assert_eq!(g.atom_count(), 6);
        assert_eq!(g.bond_count(), 7);

        // Two-digit closure is the same ring.
        assert_eq!(parse("C%12CC%12").bond_count(), parse("C1CC1").bond_count());

        // Explicit order on one side of the closure.
        let g = parse("C=1CCCCC=1");
        assert_eq!(g.bond_between(0, 5), Some(BondOrder::Double));
        let g = parse("C1CCCCC=1");
        assert_eq!(g.bond_between(0, 5), Some(BondOrder::Double));
    }

    #[test]
    fn aromatic_implicit_bonds() {
        let g = parse("c1ccccc1");
        assert_eq!(g.atom_count(), 6);
        assert!(g.atoms.iter().all(|a| a.aromatic));
        assert!(g.bonds.iter().all(|b| b.order == BondOrder::Aromatic));
        assert!(g.validate(16).valid());

        // Substituent bond to a ring is single.
        let g = parse("Cc1ccccc1");
        assert_eq!(g.bond_between(0, 1), Some(BondOrder::Single));
        assert!(g.validate(16).valid());

        let g = parse("c1ccncc1");
        assert!(g.validate(16).valid());
        let g = parse("c1ccsc1");
        assert!(g.validate(16).valid());
    }

    #[test]
    fn syntax_is_checked_validity_is_not() {
        // An aromatic pair with no ring parses fine and fails validation.
        let g = parse("cc");
        assert_eq!(g.bond_between(0, 1), Some(BondOrder::Aromatic));
        assert!(!g.validate(16).valid());

        // Pentavalent carbon parses, validation rejects.
        let g = parse("C(C)(C)(C)(C)C");
        assert!(!g.validate(16).valid());
    }

    #[test]
    fn syntax_errors() {
        for (s, expect) in [
            ("C(", "unclosed branch"),
            ("C(C", "unclosed branch"),
            ("C)C", "unmatched"),
            ("C1CC", "unpaired ring closure"),
            ("CC=", "dangling bond at end"),
            ("=C", "no preceding atom"),
            ("C==C", "two bond symbols"),
            ("C=)C", "dangling bond before"),
            ("C=(C)O", "before '('"),
            ("(CC)", "branch opened before any atom"),
            ("1CC", "ring closure before any atom"),
            ("C11", "bonds an atom to itself"),
            ("C=1CCCCC#1", "conflicting bond symbols"),
            ("C12CC12", "duplicate bond"),
        ] {
            match parse_smiles(s) {
                Err(SmilesError::Syntax { message, .. }) => {
                    assert!(
                        message.contains(expect),
                        "{s}: expected '{expect}' in '{message}'"
                    );
                }
                other => panic!("{s}: expected syntax error, got {other:?}"),
            }
        }
    }

    #[test]
    fn duplicate_ring_bond_is_rejected() {
        // 1 and 2 both close between atoms 0 and 1.
        assert!(matches!(
            parse_smiles("C12C12"),
            Err(SmilesError::Syntax { .. })
        ));
    }
}
