//! Regression test for the property calculators against a reference file.
//!
//! The fixture was produced by scripts/crippen_ref.py, a standalone
//! bond-order-aware implementation of the published contribution scheme,
//! over a 300-molecule synthetic corpus (seed 20260814). The shipped
//! radius-1 table must track it closely on corpus-style chemistry.

use mgcvae_core::props::{crippen_logp, crippen_mr, ContributionTable};
use mgcvae_core::smiles::parse_smiles;

#[test]
fn golden_property_file_agreement() {
    let text = include_str!("data/crippen_golden.tsv");
    let table = ContributionTable::builtin();
    let mut rows = 0usize;
    let mut sum_dlogp = 0.0f64;
    let mut sum_dmr = 0.0f64;
    let mut max_dlogp: (f64, String) = (0.0, String::new());
    let mut max_dmr: (f64, String) = (0.0, String::new());
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let mut fields = line.split('\t');
        let smiles = fields.next().unwrap();
        let want_logp: f64 = fields.next().unwrap().parse().unwrap();
        let want_mr: f64 = fields.next().unwrap().parse().unwrap();
        let g = parse_smiles(smiles).unwrap_or_else(|e| panic!("{smiles}: {e}"));
        let dlogp = (crippen_logp(&g, table) - want_logp).abs();
        let dmr = (crippen_mr(&g, table) - want_mr).abs();
        sum_dlogp += dlogp;
        sum_dmr += dmr;
        if dlogp > max_dlogp.0 {
            max_dlogp = (dlogp, smiles.to_string());
        }
        if dmr > max_dmr.0 {
            max_dmr = (dmr, smiles.to_string());
        }
        rows += 1;
    }
    assert!(rows >= 100, "fixture too small: {rows}");
    let mean_dlogp = sum_dlogp / rows as f64;
    let mean_dmr = sum_dmr / rows as f64;
    eprintln!(
        "crippen vs reference over {rows} molecules: logP mean {mean_dlogp:.2e} max {:.2e}, \
         MR mean {mean_dmr:.2e} max {:.2e}",
        max_dlogp.0, max_dmr.0
    );
    assert!(
        mean_dlogp <= 0.15 && max_dlogp.0 <= 0.5,
        "logP drift: mean {mean_dlogp:.4}, worst {:.4} on {}",
        max_dlogp.0,
        max_dlogp.1
    );
    assert!(
        mean_dmr <= 0.15 && max_dmr.0 <= 0.5,
        "MR drift: mean {mean_dmr:.4}, worst {:.4} on {}",
        max_dmr.0,
        max_dmr.1
    );
}
