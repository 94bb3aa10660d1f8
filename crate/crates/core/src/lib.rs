//! Molecular graph generation with variational autoencoders.
//!
//! The crate is organized as a pipeline:
//!
//! * [`smiles`]: parse a curated SMILES subset into molecular graphs and
//!   write graphs back out in a canonical form.
//! * [`molgraph`]: the graph model itself, validity rules, and the codec
//!   between graphs and the dense matrices the models train on.
//! * [`props`]: atom-contribution estimates of logP and molar refractivity,
//!   and the binning that turns them into condition vectors.
//! * [`dataset`]: ingestion of raw SMILES files into a binary cache with
//!   train/test splits and batch iteration.
//! * [`numcore`]: the numeric kernel. Dense matrices, MLPs with exact
//!   reverse-mode gradients, Adam, and a seeded RNG.
//! * [`cvae`]: the VAE and conditional VAE built on top of `numcore`,
//!   with training, checkpointing, and sampling.
//! * [`evalkit`]: generation metrics, per-condition tables, fingerprints,
//!   PCA, and report emission.
//! * [`synth`]: a seeded generator of synthetic drug-like molecules used
//!   for tests, demos, and desk-scale experiments.

pub mod cvae;
pub mod dataset;
pub mod evalkit;
pub mod molgraph;
pub mod numcore;
pub mod props;
pub mod smiles;
pub mod synth;
