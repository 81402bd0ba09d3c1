//! Dense real (and complex) matrix kernel.
//!
//! Everything here is a pure function of its inputs. Eigen- and singular
//! values are reported in descending order so results are reproducible.

mod cmatrix;
mod eigen;
mod expm;
pub(crate) mod lu;
mod matrix;
pub mod svd;

pub use cmatrix::CMatrix;
pub use eigen::{eigenvalues, spectral_abscissa, sym_eig, SymEig};
pub use expm::matrix_exp;
pub use lu::{inverse, solve};
pub use matrix::Matrix;
pub use svd::{
    min_norm_interpolant, pseudo_inverse, pseudo_inverse_norm, rank, spectral_norm, svd, Svd,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRows { row: usize, expected: usize, got: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (relative asymmetry {relative:.3e})")]
    Asymmetric { relative: f64 },
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}
