//! Finite von Neumann algebras `⊕_k M_{n_k}(ℂ)` with a faithful normal
//! tracial state, and the block-diagonal operators affiliated with them.
//!
//! An algebra has an explicit prefix of blocks and optionally an infinite
//! geometric tail of equal-size blocks. Operators store explicit matrices for
//! the first `K` blocks and a closed-form scalar [`Formula`] for the rest.

mod algebra;
mod formula;
pub mod io;
mod operator;
mod vector;

pub use algebra::{FiniteBlockAlgebra, GeometricTail};
pub use formula::{DivergentTail, Formula, GrammarOverflow, TailSup};
pub use operator::{BlockOperator, SupNorm, TailRule};
pub use vector::BlockVector;

use thiserror::Error;

use crate::linops::LinalgError;

#[derive(Debug, Error, PartialEq)]
pub enum BlockError {
    #[error("bad weights: {0}")]
    BadWeights(String),
    #[error("operators belong to different algebras")]
    AlgebraMismatch,
    #[error(transparent)]
    GrammarOverflow(#[from] GrammarOverflow),
    #[error("operator is unbounded")]
    Unbounded,
    #[error(transparent)]
    DivergentTail(#[from] DivergentTail),
    #[error("tail conflict: {0}")]
    TailConflict(String),
    #[error("block {block}: expected dimension {expected}, found {found}")]
    DimensionMismatch { block: usize, expected: usize, found: usize },
    #[error("index {index} out of range (count {count})")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("block {block} has non-finite entries")]
    NonFinite { block: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
