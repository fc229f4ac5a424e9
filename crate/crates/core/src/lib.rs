//! Ridge regularization paths from sketched binomial bases.
//!
//! For `min ½‖Ax − b‖² + λ/2‖x‖²` over a grid of `λ`, the range
//! `[λ_min, λ_max]` is split into geometric intervals. On each interval a
//! fixed number of preconditioned iterations is expanded as a polynomial in
//! `λ`; any grid point in the interval then costs one Horner evaluation.
//!
//! ```
//! use ridgepath::{ihs_bin_path, svd_path, IhsBinOptions, Matrix, DenseMatrix, PathConfig, SketchKind, SketchSpec};
//!
//! let a = Matrix::Dense(DenseMatrix::from_fn(40, 5, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0));
//! let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
//! let cfg = PathConfig::log_grid(1.0, 100.0, 10, 1e-8).unwrap();
//! let opts = IhsBinOptions::new(SketchSpec::new(SketchKind::Gaussian, 20, 40, 7).unwrap());
//! let path = ihs_bin_path(&a, &b, &cfg, &opts).unwrap();
//! let exact = svd_path(&a, &b, &cfg).unwrap();
//! assert!((path.points[3].train_loss - exact.points[3].train_loss).abs() < 1e-6 * exact.points[3].train_loss);
//! ```

pub mod adaptive;
pub mod baselines;
pub mod data;
pub mod error;
pub mod linalg;
pub mod path;
pub mod precond;
pub mod report;
pub mod rng;
pub mod sketch;
pub mod spectrum;

pub use adaptive::{adaptive_sketch_dim, armijo_step, AdaptiveConfig, AdaptiveResult};
pub use baselines::{direct_path, svd_path, warm_cg_path, warm_ihs_path};
pub use data::{gen_synthetic, parse_libsvm, Dataset};
pub use error::{Error, Result};
pub use linalg::{CsrMatrix, DenseMatrix, Matrix};
pub use path::{
    dual_path, gd_bin_path, ihs_bin_path, ihs_bin_path_matrix, BinomialBasis, IhsBinOptions, RegPathResult, SolverKind,
};
pub use precond::Preconditioner;
pub use sketch::{sketch_apply, SketchKind, SketchSpec};
pub use spectrum::{interval_split, tune_interval, IntervalCount, PathConfig, RateParams, RhoBounds};
