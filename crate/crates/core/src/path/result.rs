use crate::error::{check_len, Result};
use crate::linalg::ops::{axpy, dot};
use crate::linalg::{DenseMatrix, Matrix};
use crate::spectrum::RhoBounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverKind {
    Cg,
    Direct,
    GdBin,
    Ihs,
    IhsBin,
    IhsBinDual,
    Svd,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Cg => "cg",
            SolverKind::Direct => "direct",
            SolverKind::GdBin => "gd-bin",
            SolverKind::Ihs => "ihs",
            SolverKind::IhsBin => "ihs-bin",
            SolverKind::IhsBinDual => "ihs-bin-dual",
            SolverKind::Svd => "svd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
    /// Seconds spent producing `x` for this `λ` alone (excludes setup).
    pub time_s: f64,
    /// Iterations spent on this point by iterative per-`λ` solvers.
    pub iterations: Option<usize>,
}

/// Per-interval tuning and cost, for binomial-basis solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub lambda0: f64,
    pub tau: f64,
    pub k: usize,
    pub contraction: f64,
    /// The first basis diverged and was rebuilt at half the step size.
    pub retried: bool,
    /// The interval was solved point by point instead of through a basis.
    pub fallback: bool,
    pub basis_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegPathResult {
    pub solver: SolverKind,
    pub points: Vec<PathPoint>,
    /// Sketching, factorizations and basis construction.
    pub setup_seconds: f64,
    pub intervals: Vec<IntervalReport>,
    pub rho: Option<RhoBounds>,
}

impl RegPathResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn total_seconds(&self) -> f64 {
        self.setup_seconds + self.points.iter().map(|p| p.time_s).sum::<f64>()
    }

    pub fn attach_test_losses(&mut self, a_test: &Matrix, b_test: &[f64]) -> Result<()> {
        check_len("attach_test_losses", a_test.rows(), b_test.len())?;
        for p in &mut self.points {
            check_len("attach_test_losses", a_test.cols(), p.x.len())?;
            p.test_loss = Some(half_residual_sq(a_test, &p.x, b_test)?);
        }
        Ok(())
    }
}

fn half_residual_sq(a: &Matrix, x: &[f64], b: &[f64]) -> Result<f64> {
    let mut r = a.apply(x)?;
    check_len("losses", r.len(), b.len())?;
    axpy(-1.0, b, &mut r);
    Ok(0.5 * dot(&r, &r))
}

/// `(½‖Ax−b‖² + λ/2‖x‖², ½‖Ãx−b̃‖²)`; the second entry only with a test set.
pub fn losses(
    a: &Matrix,
    b: &[f64],
    test: Option<(&Matrix, &[f64])>,
    x: &[f64],
    lambda: f64,
) -> Result<(f64, Option<f64>)> {
    let train = half_residual_sq(a, x, b)? + 0.5 * lambda * dot(x, x);
    let test = match test {
        Some((at, bt)) => Some(half_residual_sq(at, x, bt)?),
        None => None,
    };
    Ok((train, test))
}

/// Frobenius analogue of [`losses`] for a `d × K` solution.
pub fn matrix_losses(a: &Matrix, b: &DenseMatrix, x: &DenseMatrix, lambda: f64) -> Result<f64> {
    check_len("matrix_losses", b.cols(), x.cols())?;
    let mut total = 0.0;
    for j in 0..x.cols() {
        total += losses(a, &b.column(j), None, &x.column(j), lambda)?.0;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPathPoint {
    pub lambda: f64,
    pub x: DenseMatrix,
    pub train_loss: f64,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPathResult {
    pub points: Vec<MatrixPathPoint>,
    pub setup_seconds: f64,
    pub intervals: Vec<IntervalReport>,
    pub rho: RhoBounds,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_examples() {
        let a = Matrix::Dense(DenseMatrix::new(2, 2, vec![3.0, 1.0, 0.0, 2.0]).unwrap());
        let b = [1.0, 2.0];
        assert_eq!(losses(&a, &b, None, &[0.0, 0.0], 0.7).unwrap(), (2.5, None));

        let id = Matrix::Dense(DenseMatrix::identity(3));
        let x = [0.5, -1.0, 2.0];
        assert_eq!(losses(&id, &x, None, &x, 0.0).unwrap().0, 0.0);

        let one = Matrix::Dense(DenseMatrix::new(1, 1, vec![1.0]).unwrap());
        let (train, test) = losses(&one, &[1.0], Some((&one, &[0.0])), &[0.5], 1.0).unwrap();
        assert_eq!(train, 0.25);
        assert_eq!(test, Some(0.125));
        assert!(losses(&one, &[1.0, 2.0], None, &[0.5], 1.0).is_err());
    }
}
