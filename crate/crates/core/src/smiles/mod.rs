//! SMILES parsing and canonical writing for the supported subset.
//!
//! The subset is deliberately small: the twelve supported elements, aromatic
//! lowercase forms of b/c/n/o/p/s, bond symbols `=` `#` `:`, branches, and
//! ring closures (including `%nn`). Charges, explicit hydrogens, bracket
//! atoms, stereo marks, fragment dots, and the explicit single bond `-` are
//! rejected up front with [`SmilesError::RejectedFeature`]; molecules that
//! need them are out of scope for the pipeline.
//!
//! [`parse_smiles`] checks syntax only. Chemical validity (valence caps,
//! aromatic ring rules) is the job of [`crate::molgraph::MolGraph::validate`].
//! [`write_smiles`] emits a canonical form: the same molecule yields the
//! same string no matter how its atoms were numbered.

mod canon;
mod lexer;
mod parser;

use thiserror::Error;

use crate::molgraph::ValidityReport;

pub use canon::{canonical_rank, write_smiles};
pub use lexer::{tokenize, SmilesToken, TokenKind};
pub use parser::parse_smiles;

/// Errors from tokenizing or parsing a SMILES string.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmilesError {
    /// The character is valid SMILES but outside the supported subset.
    #[error("unsupported SMILES feature '{ch}' at position {pos}")]
    RejectedFeature { ch: char, pos: usize },
    /// An element symbol outside the supported set.
    #[error("unsupported element '{symbol}' at position {pos}")]
    UnsupportedElement { symbol: String, pos: usize },
    /// Malformed input.
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
}

/// Errors from writing a graph as SMILES.
#[derive(Debug, Error)]
pub enum WriteError {
    /// The graph fails the validity rules; the report lists why.
    #[error("graph is not writable: {0}")]
    InvalidGraph(ValidityReport),
    /// More than 100 ring closures would have to be open at once.
    #[error("too many simultaneous ring closures")]
    RingOverflow,
}
