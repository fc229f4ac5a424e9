//! Matrix storage, products and factorizations.

pub mod counters;
mod csr;
mod dense;
mod matrix;
pub mod ops;
mod svd;

pub use csr::CsrMatrix;
pub use dense::{Cholesky, DenseMatrix};
pub use matrix::Matrix;
pub use svd::{thin_svd, SvdFactors};
