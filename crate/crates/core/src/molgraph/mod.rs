//! Molecular graphs, validity rules, and the graph-matrix codec.
//!
//! A [`MolGraph`] is a small undirected labeled graph: atoms carry an
//! element and an aromatic flag, bonds carry an order. [`MolGraph::validate`]
//! checks the structural rules the rest of the pipeline relies on; see the
//! rule list on [`RuleId`]. [`encode_matrix`] and [`decode_matrix`] convert
//! between graphs and the fixed-shape dense matrices the models consume,
//! and [`repair`] turns arbitrary bond candidates into a valid graph so
//! decoding is total.

mod graph;
mod matrix;

pub use graph::{
    Atom, Bond, BondOrder, Element, MolGraph, RuleId, Site, ValidityReport, Violation,
};
pub use matrix::{
    decode_matrix, encode_matrix, repair, BondCandidate, CodecError, GraphSchema,
    InitialGraphMatrix,
};

pub(crate) use graph::bridge_flags;
