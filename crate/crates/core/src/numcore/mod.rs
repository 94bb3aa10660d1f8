//! Numeric core: matrices, dense layers with reverse-mode gradients, Adam,
//! and a seeded RNG.
//!
//! Everything runs in 64-bit floats, and determinism is a hard
//! requirement: the same seed must give bit-identical results regardless
//! of thread count or how runs are interleaved. No global mutable state
//! exists anywhere in this module (the thread count is read once from the
//! environment, but it cannot change results, only wall time).

mod adam;
mod matrix;
mod mlp;
mod rng;

pub use adam::AdamState;
pub use matrix::{thread_count, Matrix};
pub use mlp::{Activation, DenseLayer, Gradients, Mlp, NumError, Tape};
pub use rng::Rng;
