//! Interval-wise path assembly.

use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::linalg::ops::{axpy, dot, norm2};
use crate::linalg::{DenseMatrix, Matrix};
use crate::path::basis::{gd_basis_rhs, ihs_basis_matrix_rhs, BinomialBasis, MatrixBasis, MAX_GD_ORDER};
use crate::path::result::{
    losses, matrix_losses, IntervalReport, MatrixPathPoint, MatrixPathResult, PathPoint, RegPathResult, SolverKind,
};
use crate::precond::Preconditioner;
use crate::rng::SeededRng;
use crate::sketch::{sketch_apply, SketchKind, SketchSpec};
use crate::spectrum::{interval_split, owning_interval, tune_interval, PathConfig, RhoBounds};

/// Lanczos steps used when `ρ` is measured from the realized sketch.
pub const RHO_LANCZOS_STEPS: usize = 30;
/// Multiplicative widening applied to measured `ρ` bounds.
pub const RHO_MARGIN: f64 = 1.05;

const POWER_STEPS: usize = 30;
const POWER_SAFETY: f64 = 1.01;
const GD_FALLBACK_CAP: usize = 1_000_000;
const RHO_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone)]
pub struct IhsBinOptions {
    pub sketch: SketchSpec,
    /// `None` measures the bounds from the sketch (exact `(1, 1)` for `Identity`).
    pub rho: Option<RhoBounds>,
    pub sigma_d: Option<f64>,
}

impl IhsBinOptions {
    pub fn new(sketch: SketchSpec) -> Self {
        Self {
            sketch,
            rho: None,
            sigma_d: None,
        }
    }

    pub fn with_rho(mut self, rho: RhoBounds) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_sigma_d(mut self, sigma_d: f64) -> Self {
        self.sigma_d = Some(sigma_d);
        self
    }
}

struct Evaluated {
    lambda: f64,
    xs: Vec<Vec<f64>>,
    time_s: f64,
}

struct EngineRun {
    points: Vec<Evaluated>,
    intervals: Vec<IntervalReport>,
    setup_seconds: f64,
    rho: RhoBounds,
}

/// Sketches `op` once, then builds one basis per interval for every `g`.
fn run_ihs(op: &Matrix, gs: &[Vec<f64>], cfg: &PathConfig, opts: &IhsBinOptions) -> Result<EngineRun> {
    cfg.validate()?;
    check_len("ihs_bin_path: sketch input rows", opts.sketch.n, op.rows())?;
    for g in gs {
        check_len("ihs_bin_path", op.cols(), g.len())?;
    }
    let start = Instant::now();
    let intervals = interval_split(cfg.lambda_min, cfg.lambda_max, cfg.intervals)?;
    let sa = sketch_apply(&opts.sketch, op)?;
    // λ₀ does not depend on ρ
    let first = tune_interval(intervals[0].0, intervals[0].1, &RhoBounds::identity(), opts.sigma_d, cfg.epsilon)?;
    let base = Preconditioner::build(&sa, first.lambda0)?;
    let rho = resolve_rho(op, &base, opts)?;
    let mut setup_seconds = start.elapsed().as_secs_f64();

    let mut reports = Vec::with_capacity(intervals.len());
    let mut points = Vec::with_capacity(cfg.lambdas.len());
    for (idx, &(lo, hi)) in intervals.iter().enumerate() {
        let params = tune_interval(lo, hi, &rho, opts.sigma_d, cfg.epsilon)?;
        let k = cfg.order_override.unwrap_or(params.k);
        let p = base.reshift(params.lambda0)?;
        let t = Instant::now();
        let build = |tau: f64| ihs_basis_matrix_rhs(op, gs, &p, tau, k);
        let (basis, tau, retried) = with_retry(params.alpha, lo, hi, build)?;
        let basis: MatrixBasis = basis.with_interval(lo, hi);
        let basis_seconds = t.elapsed().as_secs_f64();
        setup_seconds += basis_seconds;
        reports.push(IntervalReport {
            lambda_lo: lo,
            lambda_hi: hi,
            lambda0: params.lambda0,
            tau,
            k,
            contraction: params.contraction,
            retried,
            fallback: false,
            basis_seconds,
        });
        for &lambda in cfg.lambdas.iter().filter(|l| owning_interval(&intervals, **l) == idx) {
            let t = Instant::now();
            let xs = basis.columns().iter().map(|c| c.compose(lambda)).collect();
            points.push(Evaluated {
                lambda,
                xs,
                time_s: t.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(EngineRun {
        points,
        intervals: reports,
        setup_seconds,
        rho,
    })
}

/// Supplied bounds, `(1, 1)` for the identity sketch, or a Lanczos
/// measurement at the preconditioner's current shift.
pub(crate) fn resolve_rho(op: &Matrix, p: &Preconditioner, opts: &IhsBinOptions) -> Result<RhoBounds> {
    match opts.rho {
        Some(r) => Ok(r),
        None if opts.sketch.kind == SketchKind::Identity => Ok(RhoBounds::identity()),
        None => p.measure_rho(
            op,
            RHO_LANCZOS_STEPS,
            RHO_MARGIN,
            opts.sketch.seed.wrapping_add(RHO_SEED_OFFSET),
        ),
    }
}

/// Builds at `tau`; on a non-finite basis retries once at `tau/2`.
fn with_retry<B>(tau: f64, lo: f64, hi: f64, build: impl Fn(f64) -> Result<B>) -> Result<(B, f64, bool)> {
    match build(tau) {
        Ok(b) => Ok((b, tau, false)),
        Err(Error::NonFinite(_)) => match build(tau / 2.0) {
            Ok(b) => Ok((b, tau / 2.0, true)),
            Err(Error::NonFinite(_)) => Err(Error::Diverged { lo, hi }),
            Err(e) => Err(e),
        },
        Err(e) => Err(e),
    }
}

pub fn ihs_bin_path(a: &Matrix, b: &[f64], cfg: &PathConfig, opts: &IhsBinOptions) -> Result<RegPathResult> {
    let g = a.apply_transpose(b)?;
    let run = run_ihs(a, &[g], cfg, opts)?;
    let points = run
        .points
        .into_iter()
        .map(|mut e| {
            let x = e.xs.swap_remove(0);
            let (train_loss, _) = losses(a, b, None, &x, e.lambda)?;
            Ok(PathPoint {
                lambda: e.lambda,
                x,
                train_loss,
                test_loss: None,
                time_s: e.time_s,
                iterations: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegPathResult {
        solver: SolverKind::IhsBin,
        points,
        setup_seconds: run.setup_seconds,
        intervals: run.intervals,
        rho: Some(run.rho),
    })
}

/// Solves `(AAᵀ + λI)z = b` along the path and returns `x(λ) = Aᵀz(λ)`.
///
/// The sketch acts on the rows of `Aᵀ`, so `opts.sketch.n` must equal `A.cols`.
pub fn dual_path(a: &Matrix, b: &[f64], cfg: &PathConfig, opts: &IhsBinOptions) -> Result<RegPathResult> {
    check_len("dual_path", a.rows(), b.len())?;
    let at = a.transpose();
    let run = run_ihs(&at, &[b.to_vec()], cfg, opts)?;
    let points = run
        .points
        .into_iter()
        .map(|e| {
            let t = Instant::now();
            let x = at.apply(&e.xs[0])?;
            let time_s = e.time_s + t.elapsed().as_secs_f64();
            let (train_loss, _) = losses(a, b, None, &x, e.lambda)?;
            Ok(PathPoint {
                lambda: e.lambda,
                x,
                train_loss,
                test_loss: None,
                time_s,
                iterations: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegPathResult {
        solver: SolverKind::IhsBinDual,
        points,
        setup_seconds: run.setup_seconds,
        intervals: run.intervals,
        rho: Some(run.rho),
    })
}

/// Path for `min ½‖AX − B‖_F² + λ/2‖X‖_F²`, one shared sketch for all columns.
pub fn ihs_bin_path_matrix(a: &Matrix, b: &DenseMatrix, cfg: &PathConfig, opts: &IhsBinOptions) -> Result<MatrixPathResult> {
    check_len("ihs_bin_path_matrix", a.rows(), b.rows())?;
    if b.cols() == 0 {
        return Err(Error::InvalidArgument("right-hand side needs K ≥ 1 columns".into()));
    }
    let gs = (0..b.cols())
        .map(|j| a.apply_transpose(&b.column(j)))
        .collect::<Result<Vec<_>>>()?;
    let run = run_ihs(a, &gs, cfg, opts)?;
    let points = run
        .points
        .into_iter()
        .map(|e| {
            let d = e.xs[0].len();
            let x = DenseMatrix::from_fn(d, e.xs.len(), |i, j| e.xs[j][i]);
            let train_loss = matrix_losses(a, b, &x, e.lambda)?;
            Ok(MatrixPathPoint {
                lambda: e.lambda,
                x,
                train_loss,
                time_s: e.time_s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatrixPathResult {
        points,
        setup_seconds: run.setup_seconds,
        intervals: run.intervals,
        rho: run.rho,
    })
}

/// Power-iteration estimate of `σ_max(A)²` (a lower bound that tightens with `steps`).
pub fn spectral_norm_sq(a: &Matrix, steps: usize) -> f64 {
    let d = a.cols();
    let mut rng = SeededRng::new(0);
    let mut v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
    let mut scratch = vec![0.0; a.rows()];
    let mut w = vec![0.0; d];
    let mut estimate = 0.0;
    for _ in 0..steps.max(1) {
        let nv = norm2(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        a.gram_apply_into(&v, &mut scratch, &mut w);
        estimate = dot(&v, &w);
        std::mem::swap(&mut v, &mut w);
    }
    estimate
}

/// Gradient-descent path with binomial bases per interval.
///
/// Intervals needing more than [`MAX_GD_ORDER`] steps are solved point by
/// point with the same step size and step count.
pub fn gd_bin_path(a: &Matrix, b: &[f64], cfg: &PathConfig) -> Result<RegPathResult> {
    cfg.validate()?;
    let start = Instant::now();
    let g = a.apply_transpose(b)?;
    let smax_sq = spectral_norm_sq(a, POWER_STEPS) * POWER_SAFETY;
    let intervals = interval_split(cfg.lambda_min, cfg.lambda_max, cfg.intervals)?;
    let mut setup_seconds = start.elapsed().as_secs_f64();
    let mut reports = Vec::with_capacity(intervals.len());
    let mut points = Vec::with_capacity(cfg.lambdas.len());
    for (idx, &(lo, hi)) in intervals.iter().enumerate() {
        let tau = 2.0 / (smax_sq + hi + lo);
        let kappa = (smax_sq + hi) / lo;
        let root = (kappa - 1.0) / (kappa + 1.0);
        let bound = if root <= 0.0 {
            1
        } else {
            ((1.0 / cfg.epsilon).ln() / (1.0 / root).ln()).ceil().max(1.0) as usize
        };
        let k = cfg.order_override.unwrap_or(bound);
        let grid: Vec<f64> = cfg
            .lambdas
            .iter()
            .copied()
            .filter(|l| owning_interval(&intervals, *l) == idx)
            .collect();
        let t = Instant::now();
        let (basis, tau_used, retried): (Option<BinomialBasis>, f64, bool) = if k <= MAX_GD_ORDER {
            let (basis, tau_used, retried) = with_retry(tau, lo, hi, |t| gd_basis_rhs(a, &g, t, k))?;
            (Some(basis.with_interval(lo, hi)), tau_used, retried)
        } else {
            if k > GD_FALLBACK_CAP {
                return Err(Error::IterationCap {
                    solver: "gd-bin",
                    cap: GD_FALLBACK_CAP,
                });
            }
            (None, tau, false)
        };
        let basis_seconds = t.elapsed().as_secs_f64();
        setup_seconds += basis_seconds;
        reports.push(IntervalReport {
            lambda_lo: lo,
            lambda_hi: hi,
            lambda0: f64::NAN,
            tau: tau_used,
            k,
            contraction: root * root,
            retried,
            fallback: basis.is_none(),
            basis_seconds,
        });
        for lambda in grid {
            let t = Instant::now();
            let x = match &basis {
                Some(basis) => basis.compose(lambda),
                None => plain_gd(a, &g, tau, lambda, k)?,
            };
            let time_s = t.elapsed().as_secs_f64();
            let (train_loss, _) = losses(a, b, None, &x, lambda)?;
            points.push(PathPoint {
                lambda,
                x,
                train_loss,
                test_loss: None,
                time_s,
                iterations: basis.is_none().then_some(k),
            });
        }
    }
    Ok(RegPathResult {
        solver: SolverKind::GdBin,
        points,
        setup_seconds,
        intervals: reports,
        rho: None,
    })
}

fn plain_gd(a: &Matrix, g: &[f64], tau: f64, lambda: f64, k: usize) -> Result<Vec<f64>> {
    let d = g.len();
    let mut x = vec![0.0; d];
    let mut grad = vec![0.0; d];
    let mut scratch = vec![0.0; a.rows()];
    for _ in 0..k {
        a.gram_apply_into(&x, &mut scratch, &mut grad);
        axpy(-1.0, g, &mut grad);
        axpy(lambda, &x, &mut grad);
        axpy(-tau, &grad, &mut x);
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::NonFinite("gd-bin fallback"))
    }
}
