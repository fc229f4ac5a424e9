//! Regularization paths from binomial bases.

mod basis;
mod result;
mod solve;

pub(crate) use solve::resolve_rho;

pub use basis::{
    gd_basis, gd_basis_rhs, gd_compose, ihs_basis, ihs_basis_matrix, ihs_basis_matrix_rhs, ihs_basis_rhs,
    ihs_compose, BinomialBasis, Flavor, MatrixBasis, MAX_GD_ORDER,
};
pub use result::{losses, matrix_losses, IntervalReport, MatrixPathPoint, MatrixPathResult, PathPoint, RegPathResult, SolverKind};
pub use solve::{
    dual_path, gd_bin_path, ihs_bin_path, ihs_bin_path_matrix, spectral_norm_sq, IhsBinOptions, RHO_LANCZOS_STEPS,
    RHO_MARGIN,
};
