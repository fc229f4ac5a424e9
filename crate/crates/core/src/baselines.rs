//! Reference path solvers: SVD, direct factorization, warm-started CG and
//! warm-started sketched iterations.

use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::linalg::ops::{axpy, dot, norm2};
use crate::linalg::{thin_svd, Cholesky, Matrix};
use crate::path::{losses, resolve_rho, IhsBinOptions, PathPoint, RegPathResult, SolverKind};
use crate::precond::Preconditioner;
use crate::sketch::sketch_apply;
use crate::spectrum::{tune_interval, PathConfig};

fn finish(
    solver: SolverKind,
    a: &Matrix,
    b: &[f64],
    setup_seconds: f64,
    solved: Vec<(f64, Vec<f64>, f64, Option<usize>)>,
) -> Result<RegPathResult> {
    let mut points = solved
        .into_iter()
        .map(|(lambda, x, time_s, iterations)| {
            let (train_loss, _) = losses(a, b, None, &x, lambda)?;
            Ok(PathPoint {
                lambda,
                x,
                train_loss,
                test_loss: None,
                time_s,
                iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|p, q| p.lambda.total_cmp(&q.lambda));
    Ok(RegPathResult {
        solver,
        points,
        setup_seconds,
        intervals: Vec::new(),
        rho: None,
    })
}

/// `x(λ) = V(Σ² + λI)⁻¹ΣUᵀb` from one thin SVD of `A`.
pub fn svd_path(a: &Matrix, b: &[f64], cfg: &PathConfig) -> Result<RegPathResult> {
    cfg.validate()?;
    check_len("svd_path", a.rows(), b.len())?;
    let start = Instant::now();
    let svd = thin_svd(&a.to_dense())?;
    let utb = svd.u.apply_transpose(b)?;
    let setup = start.elapsed().as_secs_f64();
    let mut solved = Vec::with_capacity(cfg.lambdas.len());
    for &lambda in &cfg.lambdas {
        let t = Instant::now();
        let mut x = vec![0.0; a.cols()];
        for (i, (s, c)) in svd.sigma.iter().zip(&utb).enumerate() {
            if *s > 0.0 {
                axpy(s * c / (s * s + lambda), svd.vt.row(i), &mut x);
            }
        }
        solved.push((lambda, x, t.elapsed().as_secs_f64(), None));
    }
    finish(SolverKind::Svd, a, b, setup, solved)
}

/// Cholesky of `AᵀA + λI` for every grid point; `AᵀA` is formed once.
pub fn direct_path(a: &Matrix, b: &[f64], cfg: &PathConfig) -> Result<RegPathResult> {
    cfg.validate()?;
    check_len("direct_path", a.rows(), b.len())?;
    let start = Instant::now();
    let gram = a.to_dense().gram();
    let g = a.apply_transpose(b)?;
    let setup = start.elapsed().as_secs_f64();
    let mut solved = Vec::with_capacity(cfg.lambdas.len());
    for &lambda in &cfg.lambdas {
        let t = Instant::now();
        let mut h = gram.clone();
        h.add_diagonal(lambda);
        let x = Cholesky::factor(&h)?.solve(&g)?;
        solved.push((lambda, x, t.elapsed().as_secs_f64(), None));
    }
    finish(SolverKind::Direct, a, b, setup, solved)
}

/// Conjugate gradients on `(AᵀA + λI)x = g` from `x0`, stopping at
/// `‖r‖ ≤ tol·‖g‖`. Returns the solution and the iteration count.
pub fn cg_solve(a: &Matrix, g: &[f64], lambda: f64, x0: &[f64], tol: f64, cap: usize) -> Result<(Vec<f64>, usize)> {
    check_len("cg_solve", a.cols(), g.len())?;
    check_len("cg_solve", a.cols(), x0.len())?;
    let target = tol * norm2(g);
    let mut scratch = vec![0.0; a.rows()];
    let mut hv = vec![0.0; g.len()];
    let mut x = x0.to_vec();
    a.gram_apply_into(&x, &mut scratch, &mut hv);
    axpy(lambda, &x, &mut hv);
    let mut r: Vec<f64> = g.iter().zip(&hv).map(|(gi, hi)| gi - hi).collect();
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= target {
        return Ok((x, 0));
    }
    let mut p = r.clone();
    for it in 1..=cap {
        a.gram_apply_into(&p, &mut scratch, &mut hv);
        axpy(lambda, &p, &mut hv);
        let alpha = rr / dot(&p, &hv);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &hv, &mut r);
        let rr_next = dot(&r, &r);
        if !rr_next.is_finite() {
            return Err(Error::NonFinite("cg_solve"));
        }
        if rr_next.sqrt() <= target {
            return Ok((x, it));
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::IterationCap { solver: "cg", cap })
}

/// CG per grid point, largest `λ` first, each warm-started from the previous.
pub fn warm_cg_path(a: &Matrix, b: &[f64], cfg: &PathConfig) -> Result<RegPathResult> {
    cfg.validate()?;
    check_len("warm_cg_path", a.rows(), b.len())?;
    let start = Instant::now();
    let g = a.apply_transpose(b)?;
    let cap = 10 * a.cols();
    let setup = start.elapsed().as_secs_f64();
    let mut x = vec![0.0; a.cols()];
    let mut solved = Vec::with_capacity(cfg.lambdas.len());
    for &lambda in cfg.lambdas.iter().rev() {
        let t = Instant::now();
        let (next, iters) = cg_solve(a, &g, lambda, &x, cfg.epsilon, cap)?;
        x = next;
        solved.push((lambda, x.clone(), t.elapsed().as_secs_f64(), Some(iters)));
    }
    finish(SolverKind::Cg, a, b, setup, solved)
}

/// Iteration cap per grid point for [`warm_ihs_path`].
pub const IHS_ITERATION_CAP: usize = 1000;

/// Sketched iterations with `λ₀ = λ` at every grid point, largest `λ` first.
///
/// One sketch and one SVD serve the whole grid. Stops at
/// `‖∇f‖ ≤ ε·‖Aᵀb‖`; a diverging solve is restarted once at half the step.
pub fn warm_ihs_path(a: &Matrix, b: &[f64], cfg: &PathConfig, opts: &IhsBinOptions) -> Result<RegPathResult> {
    cfg.validate()?;
    check_len("warm_ihs_path", a.rows(), b.len())?;
    check_len("warm_ihs_path: sketch input rows", opts.sketch.n, a.rows())?;
    let start = Instant::now();
    let g = a.apply_transpose(b)?;
    let sa = sketch_apply(&opts.sketch, a)?;
    let base = Preconditioner::build(&sa, cfg.lambda_min)?;
    let rho = resolve_rho(a, &base, opts)?;
    let setup = start.elapsed().as_secs_f64();
    let mut x = vec![0.0; a.cols()];
    let mut solved = Vec::with_capacity(cfg.lambdas.len());
    for &lambda in cfg.lambdas.iter().rev() {
        let t = Instant::now();
        let p = base.reshift(lambda)?;
        let tau = tune_interval(lambda, lambda, &rho, opts.sigma_d, cfg.epsilon)?.alpha;
        let (next, iters) = match ihs_solve(a, &g, lambda, &p, tau, &x, cfg.epsilon) {
            Err(Error::NonFinite(_)) => ihs_solve(a, &g, lambda, &p, tau / 2.0, &x, cfg.epsilon)
                .map_err(|e| match e {
                    Error::NonFinite(_) => Error::Diverged { lo: lambda, hi: lambda },
                    e => e,
                })?,
            other => other?,
        };
        x = next;
        solved.push((lambda, x.clone(), t.elapsed().as_secs_f64(), Some(iters)));
    }
    let mut res = finish(SolverKind::Ihs, a, b, setup, solved)?;
    res.rho = Some(rho);
    Ok(res)
}

fn ihs_solve(
    a: &Matrix,
    g: &[f64],
    lambda: f64,
    p: &Preconditioner,
    tau: f64,
    x0: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, usize)> {
    let target = tol * norm2(g);
    let mut x = x0.to_vec();
    let mut scratch = vec![0.0; a.rows()];
    let mut grad = vec![0.0; g.len()];
    let mut step = vec![0.0; g.len()];
    let mut coef = vec![0.0; p.rank()];
    let mut first = None;
    for it in 0..=IHS_ITERATION_CAP {
        a.gram_apply_into(&x, &mut scratch, &mut grad);
        axpy(-1.0, g, &mut grad);
        axpy(lambda, &x, &mut grad);
        let gn = norm2(&grad);
        let initial = *first.get_or_insert(gn);
        if !gn.is_finite() || gn > 1e8 * initial.max(target) {
            return Err(Error::NonFinite("ihs_solve"));
        }
        if gn <= target {
            return Ok((x, it));
        }
        if it == IHS_ITERATION_CAP {
            break;
        }
        p.apply_into(&grad, &mut coef, &mut step);
        axpy(-tau, &step, &mut x);
    }
    Err(Error::IterationCap {
        solver: "ihs",
        cap: IHS_ITERATION_CAP,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ops::relative_error;
    use crate::linalg::DenseMatrix;
    use crate::rng::SeededRng;
    use crate::sketch::{SketchKind, SketchSpec};

    fn problem(n: usize, d: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = SeededRng::new(seed);
        let a = DenseMatrix::from_fn(n, d, |_, _| rng.normal() / (n as f64).sqrt());
        let b = (0..n).map(|_| rng.normal()).collect();
        (Matrix::Dense(a), b)
    }

    fn normal_equations(a: &Matrix, b: &[f64], lambda: f64) -> Vec<f64> {
        let mut h = a.to_dense().gram();
        h.add_diagonal(lambda);
        Cholesky::factor(&h).unwrap().solve(&a.apply_transpose(b).unwrap()).unwrap()
    }

    #[test]
    fn scalar_and_limit() {
        let a = Matrix::Dense(DenseMatrix::new(1, 1, vec![2.0]).unwrap());
        let cfg = PathConfig::from_lambdas(vec![1.0, 1e12], 1e-8).unwrap();
        for res in [svd_path(&a, &[4.0], &cfg).unwrap(), direct_path(&a, &[4.0], &cfg).unwrap()] {
            assert!((res.points[0].x[0] - 1.6).abs() < 1e-14);
            assert!(res.points[1].x[0].abs() < 1e-10);
        }
    }

    #[test]
    fn svd_and_direct_match_normal_equations() {
        let (a, b) = problem(30, 8, 1);
        let cfg = PathConfig::log_grid(0.01, 100.0, 7, 1e-8).unwrap();
        let s = svd_path(&a, &b, &cfg).unwrap();
        let d = direct_path(&a, &b, &cfg).unwrap();
        for (ps, pd) in s.points.iter().zip(&d.points) {
            let oracle = normal_equations(&a, &b, ps.lambda);
            assert!(relative_error(&ps.x, &oracle) < 1e-10);
            assert!(relative_error(&pd.x, &oracle) < 1e-10);
        }
    }

    #[test]
    fn cg_edge_cases() {
        let (a, b) = problem(20, 5, 2);
        let g = a.apply_transpose(&b).unwrap();
        let xstar = normal_equations(&a, &b, 0.5);
        let (_, iters) = cg_solve(&a, &g, 0.5, &xstar, 1e-8, 50).unwrap();
        assert_eq!(iters, 0);
        let id = Matrix::Dense(DenseMatrix::identity(4));
        let (x, iters) = cg_solve(&id, &[1.0, 2.0, 3.0, 4.0], 3.0, &[0.0; 4], 1e-12, 40).unwrap();
        assert_eq!(iters, 1);
        assert!(relative_error(&x, &[0.25, 0.5, 0.75, 1.0]) < 1e-15);
    }

    #[test]
    fn warm_cg_matches_svd() {
        let (a, b) = problem(100, 30, 3);
        let cfg = PathConfig::log_grid(0.01, 10.0, 10, 1e-10).unwrap();
        let cg = warm_cg_path(&a, &b, &cfg).unwrap();
        let svd = svd_path(&a, &b, &cfg).unwrap();
        assert_eq!(cg.lambdas(), cfg.lambdas);
        for (pc, ps) in cg.points.iter().zip(&svd.points) {
            assert!(relative_error(&pc.x, &ps.x) < 1e-6);
            assert!(pc.iterations.is_some());
        }
    }

    #[test]
    fn warm_ihs_newton_step_and_agreement() {
        let (a, b) = problem(40, 6, 4);
        let one = PathConfig::from_lambdas(vec![0.7], 1e-12).unwrap();
        let res = warm_ihs_path(&a, &b, &one, &IhsBinOptions::new(SketchSpec::identity(40))).unwrap();
        assert_eq!(res.points[0].iterations, Some(1));
        assert!(relative_error(&res.points[0].x, &normal_equations(&a, &b, 0.7)) < 1e-12);

        let cfg = PathConfig::log_grid(0.1, 10.0, 8, 1e-10).unwrap();
        let spec = SketchSpec::new(SketchKind::Srht, 24, 40, 5).unwrap();
        let ihs = warm_ihs_path(&a, &b, &cfg, &IhsBinOptions::new(spec)).unwrap();
        let svd = svd_path(&a, &b, &cfg).unwrap();
        for (pi, ps) in ihs.points.iter().zip(&svd.points) {
            assert!(relative_error(&pi.x, &ps.x) < 1e-8);
        }
    }

    #[test]
    fn warm_start_at_optimum_takes_no_iterations() {
        let (a, b) = problem(25, 5, 5);
        let g = a.apply_transpose(&b).unwrap();
        let p = Preconditioner::from_product(&a.to_dense(), 2.0).unwrap();
        let xstar = normal_equations(&a, &b, 2.0);
        let (_, iters) = ihs_solve(&a, &g, 2.0, &p, 1.0, &xstar, 1e-8).unwrap();
        assert_eq!(iters, 0);
    }
}
