//! Sketch-size estimation by sketched Newton steps at `λ_min`.
//!
//! Each step uses the direction `d = P_S ∇f(x)` with an Armijo step. When the
//! progress measure `δ̃ = dᵀ∇f` fails to shrink by `γ₃`, the sketch size
//! doubles, `S` is redrawn and the step is discarded.

use crate::error::{check_len, Error, Result};
use crate::linalg::ops::{axpy, dot};
use crate::linalg::Matrix;
use crate::precond::Preconditioner;
use crate::sketch::{sketch_apply, SketchKind, SketchSpec};

/// Backtracking exponents tried before giving up.
pub const ARMIJO_MAX_BACKTRACKS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub epsilon: f64,
    pub m_initial: usize,
    pub m_cap: usize,
    pub max_iterations: usize,
}

impl AdaptiveConfig {
    /// Defaults for a problem with `d` features.
    pub fn for_dim(d: usize) -> Self {
        let d = d.max(1);
        Self {
            gamma1: 0.5,
            gamma2: 1e-4,
            gamma3: 0.9,
            epsilon: 1e-10,
            m_initial: (d / 64).max(16).min(d),
            m_cap: d,
            max_iterations: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("gamma1", self.gamma1), ("gamma2", self.gamma2), ("gamma3", self.gamma3)] {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} = {g} outside (0, 1)")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if self.m_initial == 0 || self.m_initial > self.m_cap {
            return Err(Error::InvalidArgument(format!(
                "need 1 ≤ m_initial ≤ m_cap, got {} and {}",
                self.m_initial, self.m_cap
            )));
        }
        Ok(())
    }
}

/// Smallest `j ≤ 50` with `f(x − γ₁ʲd) ≤ f(x) − γ₂γ₁ʲ dᵀ∇f(x)`; returns `(γ₁ʲ, j)`.
pub fn armijo_step(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    d: &[f64],
    grad: &[f64],
    gamma1: f64,
    gamma2: f64,
) -> Result<(f64, usize)> {
    check_len("armijo_step", x.len(), d.len())?;
    check_len("armijo_step", x.len(), grad.len())?;
    let slope = dot(d, grad);
    if !(slope > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dᵀ∇f = {slope} is not positive; not a descent direction"
        )));
    }
    let fx = f(x);
    let mut trial = x.to_vec();
    let mut tau = 1.0;
    for j in 0..=ARMIJO_MAX_BACKTRACKS {
        trial.copy_from_slice(x);
        axpy(-tau, d, &mut trial);
        if f(&trial) <= fx - gamma2 * tau * slope {
            return Ok((tau, j));
        }
        tau *= gamma1;
    }
    Err(Error::LineSearchFailed(ARMIJO_MAX_BACKTRACKS))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Accepted {
        m: usize,
        tau: f64,
        /// `dᵀ∇f` at the start of the step.
        slope: f64,
        f_before: f64,
        f_after: f64,
    },
    Doubled {
        from: usize,
        to: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveResult {
    pub m: usize,
    pub x: Vec<f64>,
    pub iterations: usize,
    pub doublings: usize,
    /// A stall happened with `m` already at the cap.
    pub saturated: bool,
    pub final_delta: f64,
    pub trace: Vec<TraceEvent>,
}

struct Objective<'a> {
    a: &'a Matrix,
    b: &'a [f64],
    g: Vec<f64>,
    lambda: f64,
}

impl Objective<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let mut r = self.a.apply(x).expect("checked dimensions");
        axpy(-1.0, self.b, &mut r);
        0.5 * dot(&r, &r) + 0.5 * self.lambda * dot(x, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut grad = self.a.gram_apply(x).expect("checked dimensions");
        axpy(-1.0, &self.g, &mut grad);
        axpy(self.lambda, x, &mut grad);
        grad
    }
}

/// Sketch size allowed for `kind`: SJLT rounds to a multiple of `s`, SRHT
/// stays within the padded row count.
fn admissible(template: &SketchSpec, m: usize, cap: usize) -> usize {
    let m = m.min(cap);
    match template.kind {
        SketchKind::Sjlt { s } => {
            let up = m.div_ceil(s) * s;
            if up > cap && cap >= s {
                cap / s * s
            } else {
                up
            }
        }
        SketchKind::Srht => m.min(template.padded_rows()),
        _ => m,
    }
}

fn build(a: &Matrix, template: &SketchSpec, m: usize, draw: u64, lambda: f64) -> Result<Preconditioner> {
    let spec = match template.kind {
        SketchKind::Identity => *template,
        kind => SketchSpec::new(kind, m, template.n, template.seed.wrapping_add(draw))?,
    };
    Preconditioner::build(&sketch_apply(&spec, a)?, lambda)
}

pub fn adaptive_sketch_dim(
    a: &Matrix,
    b: &[f64],
    lambda_min: f64,
    cfg: &AdaptiveConfig,
    template: &SketchSpec,
) -> Result<AdaptiveResult> {
    adaptive_sketch_dim_from(a, b, lambda_min, cfg, template, vec![0.0; a.cols()])
}

/// As [`adaptive_sketch_dim`] with an explicit starting point.
pub fn adaptive_sketch_dim_from(
    a: &Matrix,
    b: &[f64],
    lambda_min: f64,
    cfg: &AdaptiveConfig,
    template: &SketchSpec,
    x0: Vec<f64>,
) -> Result<AdaptiveResult> {
    cfg.validate()?;
    check_len("adaptive_sketch_dim", a.rows(), b.len())?;
    check_len("adaptive_sketch_dim", a.cols(), x0.len())?;
    check_len("adaptive_sketch_dim: sketch input rows", a.rows(), template.n)?;
    if !(lambda_min > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda_min = {lambda_min} must be positive")));
    }
    let obj = Objective {
        a,
        b,
        g: a.apply_transpose(b)?,
        lambda: lambda_min,
    };
    let cap = admissible(template, cfg.m_cap, cfg.m_cap);
    let mut m = admissible(template, cfg.m_initial, cap);
    let mut draws = 0u64;
    let mut p = build(a, template, m, draws, lambda_min)?;

    let mut x = x0;
    let mut grad = obj.gradient(&x);
    let mut dir = p.apply(&grad)?;
    let mut delta = dot(&dir, &grad);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut doublings = 0;
    let mut saturated = false;

    while delta >= cfg.epsilon {
        if iterations == cfg.max_iterations {
            return Err(Error::IterationCap {
                solver: "adaptive_sketch_dim",
                cap: cfg.max_iterations,
            });
        }
        let (tau, _) = armijo_step(|v| obj.value(v), &x, &dir, &grad, cfg.gamma1, cfg.gamma2)?;
        let mut x_next = x.clone();
        axpy(-tau, &dir, &mut x_next);
        let grad_next = obj.gradient(&x_next);
        let dir_next = p.apply(&grad_next)?;
        let delta_next = dot(&dir_next, &grad_next);

        let stalled = delta_next >= cfg.gamma3 * delta;
        let grown = admissible(template, m.saturating_mul(2), cap);
        if stalled && template.kind != SketchKind::Identity && grown > m {
            trace.push(TraceEvent::Doubled { from: m, to: grown });
            m = grown;
            draws += 1;
            doublings += 1;
            p = build(a, template, m, draws, lambda_min)?;
            dir = p.apply(&grad)?;
            delta = dot(&dir, &grad);
            continue;
        }
        if stalled {
            saturated = true;
        }
        trace.push(TraceEvent::Accepted {
            m,
            tau,
            slope: delta,
            f_before: obj.value(&x),
            f_after: obj.value(&x_next),
        });
        x = x_next;
        grad = grad_next;
        dir = dir_next;
        delta = delta_next;
        iterations += 1;
    }
    Ok(AdaptiveResult {
        m,
        x,
        iterations,
        doublings,
        saturated,
        final_delta: delta,
        trace,
    })
}
