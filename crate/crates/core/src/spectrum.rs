//! Tuning math for the sketched path solver.
//!
//! Everything here is a pure function of a few scalars: the effective
//! dimension of `A` at a shift, eigenvalue bounds `ρ₂ ≤ γ ≤ ρ₁` for the
//! sketched Gram factor, the shift/step pair that balances the worst-case
//! contraction over a `λ` interval, and the geometric interval split.

use crate::error::{Error, Result};

/// Smallest and largest per-interval iteration counts.
pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoSource {
    Gaussian,
    Sjlt,
    Srht,
    Identity,
    Manual,
    /// Lanczos estimate of the realized sketch (see `Preconditioner::measure_rho`).
    Measured,
}

/// Bounds `ρ₂ ≤ γ_d ≤ γ₁ ≤ ρ₁` on the eigenvalues of the sketched Gram factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoBounds {
    pub rho1: f64,
    pub rho2: f64,
    pub source: RhoSource,
}

impl RhoBounds {
    pub fn new(rho1: f64, rho2: f64, source: RhoSource) -> Result<Self> {
        if !(rho2 > 0.0 && rho2 <= rho1 && rho1.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < rho2 ≤ rho1, got rho1 = {rho1}, rho2 = {rho2}"
            )));
        }
        Ok(Self { rho1, rho2, source })
    }

    pub fn identity() -> Self {
        Self {
            rho1: 1.0,
            rho2: 1.0,
            source: RhoSource::Identity,
        }
    }

    pub fn manual(rho1: f64, rho2: f64) -> Result<Self> {
        Self::new(rho1, rho2, RhoSource::Manual)
    }
}

/// `‖D‖_F² / ‖D‖₂²` with `D = diag(σᵢ/√(σᵢ²+λ₀))`.
pub fn effective_dimension(sigma: &[f64], lambda0: f64) -> Result<f64> {
    let weights = d_weights(sigma, lambda0)?;
    let fro: f64 = weights.iter().sum();
    let top = weights.iter().cloned().fold(0.0, f64::max);
    Ok(fro / top)
}

/// `‖D‖₂² = maxᵢ σᵢ²/(σᵢ²+λ₀)`.
pub fn d_norm_sq(sigma: &[f64], lambda0: f64) -> Result<f64> {
    Ok(d_weights(sigma, lambda0)?.into_iter().fold(0.0, f64::max))
}

fn d_weights(sigma: &[f64], lambda0: f64) -> Result<Vec<f64>> {
    if sigma.is_empty() || sigma.iter().any(|s| *s < 0.0 || !s.is_finite()) {
        return Err(Error::InvalidArgument(
            "singular values must be non-empty, finite and non-negative".into(),
        ));
    }
    if !(lambda0 >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda0 = {lambda0} < 0")));
    }
    if sigma.iter().all(|s| *s == 0.0) {
        return Err(Error::InvalidArgument(
            "effective dimension undefined for all-zero singular values".into(),
        ));
    }
    Ok(sigma
        .iter()
        .map(|s| {
            let s2 = s * s;
            if s2 == 0.0 {
                0.0
            } else {
                s2 / (s2 + lambda0)
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianRho {
    pub bounds: RhoBounds,
    /// `1 − 16·exp(−η²ρm/2)` when a sketch size was supplied.
    pub success_probability: Option<f64>,
}

/// Gaussian-sketch bounds for `m ≥ d_e/ρ`:
///
/// `ρ₁ = 1 − ‖D‖² + ‖D‖²(1+√ρ)²(1+√η)²`,
/// `ρ₂ = 1 − ‖D‖² + ‖D‖²(1 − √(c(η)ρ))²`, `c(η) = ((1+√η)/(1−√η))²`.
pub fn rho_gaussian(rho: f64, eta: f64, dnorm_sq: f64, m: Option<usize>) -> Result<GaussianRho> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} outside (0, 1)")));
    }
    let eta_max = (1.0 - rho.sqrt()).powi(2) / 4.0;
    if !(eta > 0.0 && eta < eta_max) {
        return Err(Error::InvalidArgument(format!(
            "eta = {eta} outside (0, {eta_max})"
        )));
    }
    if !(dnorm_sq > 0.0 && dnorm_sq <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "‖D‖² = {dnorm_sq} outside (0, 1]"
        )));
    }
    let se = eta.sqrt();
    let c = ((1.0 + se) / (1.0 - se)).powi(2);
    let rho1 = 1.0 - dnorm_sq + dnorm_sq * (1.0 + rho.sqrt()).powi(2) * (1.0 + se).powi(2);
    let rho2 = 1.0 - dnorm_sq + dnorm_sq * (1.0 - (c * rho).sqrt()).powi(2);
    let success_probability = m.map(|m| 1.0 - 16.0 * (-eta * eta * rho * m as f64 / 2.0).exp());
    Ok(GaussianRho {
        bounds: RhoBounds::new(rho1, rho2, RhoSource::Gaussian)?,
        success_probability,
    })
}

/// SRHT bounds `(1 + ‖D‖²ρ, 1 − ‖D‖²ρ)`.
pub fn rho_srht(rho: f64, dnorm_sq: f64) -> Result<RhoBounds> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} outside (0, 1)")));
    }
    let spread = dnorm_sq * rho;
    if !(dnorm_sq > 0.0) || spread >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "‖D‖²ρ = {spread} must lie in (0, 1)"
        )));
    }
    RhoBounds::new(1.0 + spread, 1.0 - spread, RhoSource::Srht)
}

/// Minimum SRHT sketch size `C(n, d_e)·d_e·log(d_e)/ρ` with
/// `C = 16/3·(1 + √(8 log(d_e n)/d_e))²`.
pub fn srht_min_sketch_dim(rho: f64, n: usize, d_e: f64) -> Result<usize> {
    if !(rho > 0.0 && rho < 1.0) || !(d_e >= 1.0) || n == 0 {
        return Err(Error::InvalidArgument(
            "need rho in (0,1), d_e ≥ 1 and n ≥ 1".into(),
        ));
    }
    let c = 16.0 / 3.0 * (1.0 + (8.0 * (d_e * n as f64).ln() / d_e).sqrt()).powi(2);
    Ok((c * d_e * d_e.ln() / rho).ceil() as usize)
}

/// SJLT subspace-embedding bounds `(1 + ε, 1 − ε)`.
pub fn rho_sjlt(eps: f64) -> Result<RhoBounds> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1/2)")));
    }
    RhoBounds::new(1.0 + eps, 1.0 - eps, RhoSource::Sjlt)
}

/// SJLT sizes from the embedding theorem with every implied constant set to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SjltDims {
    pub m: usize,
    pub s: usize,
}

pub fn sjlt_dims(eps: f64, alpha: f64, delta: f64, d_e: f64) -> Result<SjltDims> {
    if !(eps > 0.0 && eps < 0.5) || !(alpha > 2.0) || !(delta > 0.0 && delta < 0.5) || !(d_e > 0.0)
    {
        return Err(Error::InvalidArgument(
            "need eps in (0,1/2), alpha > 2, delta in (0,1/2), d_e > 0".into(),
        ));
    }
    let log_term = (d_e / delta).ln() / alpha.ln();
    Ok(SjltDims {
        s: (log_term / eps).ceil() as usize,
        m: (alpha * d_e * log_term / (eps * eps)).ceil() as usize,
    })
}

/// Shift, step size and iteration budget for one `λ` interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub lambda0: f64,
    /// Step size `τ` (called α in the convergence analysis).
    pub alpha: f64,
    /// `κ̃ = ρ₁λ_hi/(ρ₂λ_lo)`, or `κ̂` with both endpoints shifted by `σ_d²`.
    pub kappa: f64,
    /// Per-step bound on `δ_{k+1}/δ_k`: `((κ−1)/(κ+1))²`.
    pub contraction: f64,
    /// Iteration budget after clamping to `[MIN_ORDER, MAX_ORDER]`.
    pub k: usize,
    /// Budget the bound asks for before clamping.
    pub k_unclamped: usize,
}

pub fn tune_interval(
    lambda_lo: f64,
    lambda_hi: f64,
    rho: &RhoBounds,
    sigma_d: Option<f64>,
    eps: f64,
) -> Result<RateParams> {
    if !(lambda_lo > 0.0 && lambda_lo <= lambda_hi && lambda_hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lambda_lo ≤ lambda_hi, got [{lambda_lo}, {lambda_hi}]"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1)")));
    }
    let shift = match sigma_d {
        Some(s) if s < 0.0 || !s.is_finite() => {
            return Err(Error::InvalidArgument(format!("sigma_d = {s} < 0")))
        }
        Some(s) => s * s,
        None => 0.0,
    };
    let (lo, hi) = (lambda_lo + shift, lambda_hi + shift);
    let lambda0 = (hi * lo).sqrt() - shift;
    let kappa = rho.rho1 * hi / (rho.rho2 * lo);
    let alpha = 2.0 * (lambda0 + shift) / (lo / rho.rho1 + hi / rho.rho2);
    let root = (kappa - 1.0) / (kappa + 1.0);
    let contraction = root * root;
    let k_unclamped = if root <= 0.0 {
        1
    } else {
        ((1.0 / eps).ln() / (1.0 / root).ln()).ceil().max(1.0) as usize
    };
    Ok(RateParams {
        lambda_lo,
        lambda_hi,
        lambda0,
        alpha,
        kappa,
        contraction,
        k: k_unclamped.clamp(MIN_ORDER, MAX_ORDER),
        k_unclamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalCount {
    /// `L = max(1, ⌊2 ln β⌋)` with `β = λ_max/λ_min`.
    Auto,
    Fixed(usize),
}

impl IntervalCount {
    pub fn resolve(&self, lambda_min: f64, lambda_max: f64) -> usize {
        match *self {
            IntervalCount::Fixed(l) => l,
            IntervalCount::Auto => {
                let beta = lambda_max / lambda_min;
                ((2.0 * beta.ln()).floor() as usize).max(1)
            }
        }
    }
}

/// Splits `[λ_min, λ_max]` at `λ_min·β^{i/L}`, `i = 0..L`.
pub fn interval_split(lambda_min: f64, lambda_max: f64, count: IntervalCount) -> Result<Vec<(f64, f64)>> {
    if !(lambda_min > 0.0 && lambda_min <= lambda_max && lambda_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lambda_min ≤ lambda_max, got [{lambda_min}, {lambda_max}]"
        )));
    }
    if count == IntervalCount::Fixed(0) {
        return Err(Error::InvalidArgument("interval count must be ≥ 1".into()));
    }
    if lambda_min == lambda_max {
        return Ok(vec![(lambda_min, lambda_max)]);
    }
    let l = count.resolve(lambda_min, lambda_max);
    let beta = lambda_max / lambda_min;
    let edge = |i: usize| -> f64 {
        if i == 0 {
            lambda_min
        } else if i == l {
            lambda_max
        } else {
            lambda_min * beta.powf(i as f64 / l as f64)
        }
    };
    Ok((0..l).map(|i| (edge(i), edge(i + 1))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Log,
    Linear,
}

/// Regularization grid and accuracy target for a path run.
#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Evaluation grid, ascending, inside `[lambda_min, lambda_max]`.
    pub lambdas: Vec<f64>,
    pub epsilon: f64,
    pub intervals: IntervalCount,
    /// Forces the per-interval iteration count instead of deriving it.
    pub order_override: Option<usize>,
}

impl PathConfig {
    pub fn grid(lambda_min: f64, lambda_max: f64, count: usize, kind: GridKind, epsilon: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument("grid needs at least one point".into()));
        }
        let lambdas = if count == 1 {
            vec![lambda_min]
        } else {
            let last = (count - 1) as f64;
            (0..count)
                .map(|i| match i {
                    0 => lambda_min,
                    i if i == count - 1 => lambda_max,
                    i => match kind {
                        GridKind::Log => lambda_min * (lambda_max / lambda_min).powf(i as f64 / last),
                        GridKind::Linear => lambda_min + (lambda_max - lambda_min) * i as f64 / last,
                    },
                })
                .collect()
        };
        let cfg = Self {
            lambda_min,
            lambda_max,
            lambdas,
            epsilon,
            intervals: IntervalCount::Auto,
            order_override: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn log_grid(lambda_min: f64, lambda_max: f64, count: usize, epsilon: f64) -> Result<Self> {
        Self::grid(lambda_min, lambda_max, count, GridKind::Log, epsilon)
    }

    /// Uses the smallest and largest grid values as the path range.
    pub fn from_lambdas(mut lambdas: Vec<f64>, epsilon: f64) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidArgument("grid needs at least one point".into()));
        }
        lambdas.sort_by(f64::total_cmp);
        let cfg = Self {
            lambda_min: lambdas[0],
            lambda_max: *lambdas.last().expect("non-empty"),
            lambdas,
            epsilon,
            intervals: IntervalCount::Auto,
            order_override: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_intervals(mut self, intervals: IntervalCount) -> Self {
        self.intervals = intervals;
        self
    }

    pub fn with_order(mut self, k: usize) -> Self {
        self.order_override = Some(k);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0 && self.lambda_min <= self.lambda_max && self.lambda_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < lambda_min ≤ lambda_max, got [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon = {} outside (0, 1)",
                self.epsilon
            )));
        }
        if self.lambdas.is_empty() {
            return Err(Error::InvalidArgument("empty lambda grid".into()));
        }
        if self.lambdas.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("lambda grid must be ascending".into()));
        }
        if self.lambdas[0] < self.lambda_min || *self.lambdas.last().expect("non-empty") > self.lambda_max {
            return Err(Error::InvalidArgument(
                "lambda grid leaves [lambda_min, lambda_max]".into(),
            ));
        }
        if self.order_override == Some(0) {
            return Err(Error::InvalidArgument("order override must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Index of the interval owning `lambda`: the first with `lambda ≤ hi`.
pub fn owning_interval(intervals: &[(f64, f64)], lambda: f64) -> usize {
    intervals
        .iter()
        .position(|&(_, hi)| lambda <= hi)
        .unwrap_or(intervals.len() - 1)
}
