//! Prints a deterministic synthetic SMILES corpus, one molecule per line.
//!
//! Usage: corpus [SEED] [COUNT]

use mgcvae_core::synth::{synth_corpus, SynthConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args
        .next()
        .map(|s| s.parse().expect("seed must be an integer"))
        .unwrap_or(7);
    let count: usize = args
        .next()
        .map(|s| s.parse().expect("count must be an integer"))
        .unwrap_or(100);
    for smiles in synth_corpus(seed, count, &SynthConfig::default()) {
        println!("{smiles}");
    }
}
