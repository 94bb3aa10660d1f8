//! Atom-contribution logP and molar refractivity, plus condition binning.
//!
//! Both properties are additive over atoms: each heavy atom is classified
//! by an ordered rule table over its local environment, and the matched
//! row contributes fixed logP and MR terms (implicit hydrogens are folded
//! into the rows). The table ships as a plain-text data file so its values
//! can be retuned against a reference implementation without touching
//! code.
//!
//! Property values feed the conditional model through [`ConditionVector`]:
//! logP rounds half-up to an integer bin in [-6, 5] and MR to a multiple
//! of ten in [10, 90], each one-hot encoded and concatenated.

mod table;

pub use table::{AtomEnv, ContributionTable, Entry, TableError};

use crate::molgraph::MolGraph;

/// Number of logP bins: integers -6..=5.
pub const LOGP_BINS: usize = 12;
/// Number of MR bins: 10, 20, ..., 90.
pub const MR_BINS: usize = 9;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PropsError {
    #[error("property value is NaN")]
    InvalidProperty,
}

/// Wildman-Crippen style additive logP. The sum runs over whatever atoms
/// the graph holds; callers that need chemical meaning should validate
/// first, but disconnected or odd graphs still produce a deterministic
/// total.
pub fn crippen_logp(g: &MolGraph, table: &ContributionTable) -> f64 {
    (0..g.atom_count())
        .map(|i| table.classify(&AtomEnv::of(g, i)).logp)
        .sum()
}

/// Additive molar refractivity; same contract as [`crippen_logp`].
pub fn crippen_mr(g: &MolGraph, table: &ContributionTable) -> f64 {
    (0..g.atom_count())
        .map(|i| table.classify(&AtomEnv::of(g, i)).mr)
        .sum()
}

/// Round half-up to the nearest integer, then clip to the logP bin range.
pub fn logp_bin(logp: f64) -> i32 {
    let rounded = (logp + 0.5).floor();
    rounded.clamp(-6.0, 5.0) as i32
}

/// Round half-up to the nearest multiple of ten, then clip to [10, 90].
pub fn mr_bin(mr: f64) -> i32 {
    let rounded = (mr / 10.0 + 0.5).floor() * 10.0;
    rounded.clamp(10.0, 90.0) as i32
}

/// One-hot condition encoding of a (logP, MR) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVector {
    pub logp_onehot: [f64; LOGP_BINS],
    pub mr_onehot: [f64; MR_BINS],
}

impl ConditionVector {
    /// Total encoded length.
    pub const LEN: usize = LOGP_BINS + MR_BINS;

    /// Builds the vector from already-binned values. Panics if the bins
    /// are not genuine bin labels.
    pub fn from_bins(logp_bin: i32, mr_bin: i32) -> ConditionVector {
        assert!((-6..=5).contains(&logp_bin), "logp bin out of range: {logp_bin}");
        assert!(
            (10..=90).contains(&mr_bin) && mr_bin % 10 == 0,
            "mr bin out of range: {mr_bin}"
        );
        let mut logp_onehot = [0.0; LOGP_BINS];
        let mut mr_onehot = [0.0; MR_BINS];
        logp_onehot[(logp_bin + 6) as usize] = 1.0;
        mr_onehot[(mr_bin / 10 - 1) as usize] = 1.0;
        ConditionVector {
            logp_onehot,
            mr_onehot,
        }
    }

    /// The logP bin label this vector encodes.
    pub fn logp_bin(&self) -> i32 {
        let idx = self.logp_onehot.iter().position(|&x| x == 1.0).unwrap();
        idx as i32 - 6
    }

    /// The MR bin label this vector encodes.
    pub fn mr_bin(&self) -> i32 {
        let idx = self.mr_onehot.iter().position(|&x| x == 1.0).unwrap();
        (idx as i32 + 1) * 10
    }

    /// Concatenated feature slice, logP bins first.
    pub fn features(&self) -> [f64; ConditionVector::LEN] {
        let mut out = [0.0; ConditionVector::LEN];
        out[..LOGP_BINS].copy_from_slice(&self.logp_onehot);
        out[LOGP_BINS..].copy_from_slice(&self.mr_onehot);
        out
    }
}

/// Bins a property pair. NaN in either slot is an error; infinities clip
/// like any other out-of-range value.
pub fn bin_conditions(logp: f64, mr: f64) -> Result<ConditionVector, PropsError> {
    if logp.is_nan() || mr.is_nan() {
        return Err(PropsError::InvalidProperty);
    }
    Ok(ConditionVector::from_bins(logp_bin(logp), mr_bin(mr)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{Atom, Bond, Element};
    use crate::numcore::Rng;
    use crate::smiles::parse_smiles;
    use crate::synth::{synth_molecule, SynthConfig};

    fn props(smiles: &str) -> (f64, f64) {
        let g = parse_smiles(smiles).unwrap();
        let t = ContributionTable::builtin();
        (crippen_logp(&g, t), crippen_mr(&g, t))
    }

    #[test]
    fn single_atom_molecules_use_one_entry() {
        // Methane: one CH4 row.
        let (logp, mr) = props("C");
        assert!((logp - 0.6361).abs() < 1e-9, "{logp}");
        assert!((mr - 6.731).abs() < 1e-9, "{mr}");
        // Water: O2 plus two hydroxyl hydrogens.
        let (logp, mr) = props("O");
        assert!((logp - -0.8247).abs() < 1e-9, "{logp}");
        assert!((mr - 3.6138).abs() < 1e-9, "{mr}");
    }

    #[test]
    fn known_small_molecules() {
        // Benzene: six aromatic CH.
        let (logp, mr) = props("c1ccccc1");
        assert!((logp - 6.0 * (0.1581 + 0.1230)).abs() < 1e-9, "{logp}");
        assert!((mr - 6.0 * (3.350 + 1.057)).abs() < 1e-9, "{mr}");
        // Ethanol: CH3 (C1), CH2-O (C3), OH (O2).
        let (logp, _) = props("CCO");
        let want = (0.1441 + 3.0 * 0.123) + (-0.2035 + 2.0 * 0.123) + (-0.2893 - 0.2677);
        assert!((logp - want).abs() < 1e-9, "{logp} vs {want}");
    }

    #[test]
    fn permutation_invariance() {
        let g = parse_smiles("CC(=O)N(C)Cc1ccccc1").unwrap();
        let t = ContributionTable::builtin();
        let base_logp = crippen_logp(&g, t);
        let base_mr = crippen_mr(&g, t);
        let n = g.atom_count();
        let mut rng = Rng::new(41);
        for _ in 0..20 {
            let mut perm: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut perm);
            let mut atoms = vec![Atom::new(Element::C); n];
            for (old, &new) in perm.iter().enumerate() {
                atoms[new] = g.atoms[old];
            }
            let bonds: Vec<Bond> = g
                .bonds
                .iter()
                .map(|b| Bond::new(perm[b.i], perm[b.j], b.order))
                .collect();
            let shuffled = MolGraph::new(atoms, bonds);
            // The sum commutes; only summation order changes, so any
            // difference is float rounding.
            assert!((crippen_logp(&shuffled, t) - base_logp).abs() < 1e-12);
            assert!((crippen_mr(&shuffled, t) - base_mr).abs() < 1e-12);
            // The same graph must reproduce bit-identical values.
            assert_eq!(crippen_logp(&shuffled, t).to_bits(), crippen_logp(&shuffled, t).to_bits());
        }
    }

    #[test]
    fn additive_over_disconnected_parts() {
        let t = ContributionTable::builtin();
        let a = parse_smiles("CCO").unwrap();
        let b = parse_smiles("c1ccccc1").unwrap();
        // Same atoms as one graph with two components.
        let mut atoms = a.atoms.clone();
        let mut bonds = a.bonds.clone();
        let offset = atoms.len();
        atoms.extend(b.atoms.iter().copied());
        bonds.extend(
            b.bonds
                .iter()
                .map(|bond| Bond::new(bond.i + offset, bond.j + offset, bond.order)),
        );
        let union = MolGraph::new(atoms, bonds);
        let sum_logp = crippen_logp(&a, t) + crippen_logp(&b, t);
        let sum_mr = crippen_mr(&a, t) + crippen_mr(&b, t);
        assert!((crippen_logp(&union, t) - sum_logp).abs() < 1e-12);
        assert!((crippen_mr(&union, t) - sum_mr).abs() < 1e-12);
    }

    #[test]
    fn mr_positive_on_generated_molecules() {
        let t = ContributionTable::builtin();
        let mut rng = Rng::new(7);
        let config = SynthConfig::default();
        for _ in 0..300 {
            let g = synth_molecule(&mut rng, &config);
            assert!(crippen_mr(&g, t) > 0.0);
        }
    }

    #[test]
    fn binning_follows_round_half_up() {
        let v = bin_conditions(2.4, 41.0).unwrap();
        assert_eq!((v.logp_bin(), v.mr_bin()), (2, 40));
        let v = bin_conditions(-7.2, 3.0).unwrap();
        assert_eq!((v.logp_bin(), v.mr_bin()), (-6, 10));

        assert_eq!(logp_bin(2.5), 3);
        assert_eq!(logp_bin(-2.5), -2);
        assert_eq!(logp_bin(99.0), 5);
        assert_eq!(mr_bin(45.0), 50);
        assert_eq!(mr_bin(44.999), 40);
        assert_eq!(mr_bin(1e9), 90);
        assert_eq!(mr_bin(f64::NEG_INFINITY), 10);
    }

    #[test]
    fn nan_is_rejected() {
        assert_eq!(bin_conditions(f64::NAN, 40.0), Err(PropsError::InvalidProperty));
        assert_eq!(bin_conditions(1.0, f64::NAN), Err(PropsError::InvalidProperty));
    }

    #[test]
    fn every_finite_value_gets_exactly_one_bin() {
        let mut rng = Rng::new(3);
        for _ in 0..2000 {
            let logp = (rng.uniform() - 0.5) * 30.0;
            let mr = (rng.uniform() - 0.5) * 300.0;
            let v = bin_conditions(logp, mr).unwrap();
            assert_eq!(v.logp_onehot.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(v.logp_onehot.iter().filter(|&&x| x == 0.0).count(), 11);
            assert_eq!(v.mr_onehot.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(v.mr_onehot.iter().filter(|&&x| x == 0.0).count(), 8);
        }
    }

    #[test]
    fn feature_layout_is_logp_then_mr() {
        let v = ConditionVector::from_bins(0, 20);
        let f = v.features();
        assert_eq!(f.len(), 21);
        assert_eq!(f[6], 1.0);
        assert_eq!(f[12 + 1], 1.0);
        assert_eq!(f.iter().sum::<f64>(), 2.0);
        assert_eq!(v, ConditionVector::from_bins(v.logp_bin(), v.mr_bin()));
    }
}
