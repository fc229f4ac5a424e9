//! Binomial bases: `x_k(λ)` as a polynomial in `λ` with fixed vector coefficients.
//!
//! For gradient descent with step `τ` from `x₀ = 0`,
//! `x_k(λ) = τ Σ_j (−τλ)^j u_j` with `u_j = Σ_{i<k−j} C(i+j, j)(I − τAᵀA)^i Aᵀb`.
//!
//! For the sketched iteration `x_{t+1} = x_t − τP_S(AᵀAx_t − Aᵀb + λx_t)`,
//! `x_k(λ) = τ Σ_j (τλ)^j ũ_j` where `ũ_j = Σ_i u_{i,j}` and
//!
//! ```text
//! u_{0,0}     = P_S Aᵀb
//! u_{i+1,j}   = u_{i,j} − P_S(τAᵀA u_{i,j} + u_{i,j−1})
//! u_{i+1,i+1} = −P_S u_{i,i}
//! ```
//!
//! Row `i+1` is computed in place from row `i` with `j` descending so each
//! update still reads the previous row's `u_{i,j−1}`.

use crate::error::{check_len, Error, Result};
use crate::linalg::counters::count_axpy;
use crate::linalg::ops::{all_finite, axpy};
use crate::linalg::{DenseMatrix, Matrix};
use crate::precond::Preconditioner;

/// Largest GD order whose binomial coefficients stay exactly representable.
pub const MAX_GD_ORDER: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Gd,
    Ihs,
}

#[derive(Debug, Clone)]
pub struct BinomialBasis {
    vectors: Vec<Vec<f64>>,
    tau: f64,
    interval: (f64, f64),
    flavor: Flavor,
}

impl BinomialBasis {
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn order(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// The `λ` interval this basis was tuned for.
    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn with_interval(mut self, lo: f64, hi: f64) -> Self {
        self.interval = (lo, hi);
        self
    }

    /// Evaluates `x(λ)` by Horner's rule: `k` axpy-style updates and one scale.
    pub fn compose(&self, lambda: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.compose_into(lambda, &mut out);
        out
    }

    pub fn compose_into(&self, lambda: f64, out: &mut [f64]) {
        let c = match self.flavor {
            Flavor::Gd => -self.tau * lambda,
            Flavor::Ihs => self.tau * lambda,
        };
        out.iter_mut().for_each(|v| *v = 0.0);
        for u in self.vectors.iter().rev() {
            for (o, ui) in out.iter_mut().zip(u) {
                *o = c * *o + ui;
            }
            count_axpy(1);
        }
        out.iter_mut().for_each(|v| *v *= self.tau);
    }
}

pub fn gd_compose(basis: &BinomialBasis, lambda: f64) -> Result<Vec<f64>> {
    expect_flavor(basis, Flavor::Gd)?;
    Ok(basis.compose(lambda))
}

pub fn ihs_compose(basis: &BinomialBasis, lambda: f64) -> Result<Vec<f64>> {
    expect_flavor(basis, Flavor::Ihs)?;
    Ok(basis.compose(lambda))
}

fn expect_flavor(basis: &BinomialBasis, flavor: Flavor) -> Result<()> {
    if basis.flavor == flavor {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "expected a {flavor:?} basis, got {:?}",
            basis.flavor
        )))
    }
}

fn check_order(tau: f64, k: usize) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be positive")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("basis order k must be ≥ 1".into()));
    }
    Ok(())
}

pub fn gd_basis(a: &Matrix, b: &[f64], tau: f64, k: usize) -> Result<BinomialBasis> {
    let g = a.apply_transpose(b)?;
    gd_basis_rhs(a, &g, tau, k)
}

/// GD basis for the linear term `g` in place of `Aᵀb`.
pub fn gd_basis_rhs(a: &Matrix, g: &[f64], tau: f64, k: usize) -> Result<BinomialBasis> {
    check_order(tau, k)?;
    check_len("gd_basis", a.cols(), g.len())?;
    if k > MAX_GD_ORDER {
        return Err(Error::CoefficientOverflow { k });
    }
    // binom[n][j] = C(n, j) for n < k, by Pascal's rule
    let mut binom: Vec<Vec<f64>> = Vec::with_capacity(k);
    for n in 0..k {
        let row = (0..=n)
            .map(|j| {
                if j == 0 || j == n {
                    1.0
                } else {
                    binom[n - 1][j - 1] + binom[n - 1][j]
                }
            })
            .collect();
        binom.push(row);
    }

    let d = g.len();
    let mut vectors = vec![vec![0.0; d]; k];
    let mut w = g.to_vec();
    let mut gw = vec![0.0; d];
    let mut scratch = vec![0.0; a.rows()];
    for i in 0..k {
        if i > 0 {
            a.gram_apply_into(&w, &mut scratch, &mut gw);
            axpy(-tau, &gw, &mut w);
            if !all_finite(&w) {
                return Err(Error::NonFinite("gd_basis"));
            }
        }
        for (j, u) in vectors.iter_mut().enumerate().take(k - i) {
            axpy(binom[i + j][j], &w, u);
        }
    }
    Ok(BinomialBasis {
        vectors,
        tau,
        interval: (0.0, f64::INFINITY),
        flavor: Flavor::Gd,
    })
}

pub fn ihs_basis(a: &Matrix, b: &[f64], p: &Preconditioner, tau: f64, k: usize) -> Result<BinomialBasis> {
    let g = a.apply_transpose(b)?;
    ihs_basis_rhs(a, &g, p, tau, k)
}

/// Sketched basis for the linear term `g` in place of `Aᵀb`.
pub fn ihs_basis_rhs(a: &Matrix, g: &[f64], p: &Preconditioner, tau: f64, k: usize) -> Result<BinomialBasis> {
    check_order(tau, k)?;
    check_len("ihs_basis", a.cols(), g.len())?;
    check_len("ihs_basis", p.dim(), g.len())?;
    let mut rec = Recursion::new(a, g, p, tau, k);
    for i in 1..k {
        rec.advance(a, p, i)?;
    }
    Ok(rec.finish())
}

/// One column's state for the sketched recursion.
struct Recursion {
    row: Vec<Vec<f64>>,
    acc: Vec<Vec<f64>>,
    tau: f64,
    scratch: Vec<f64>,
    gu: Vec<f64>,
    pr: Vec<f64>,
    coef: Vec<f64>,
}

impl Recursion {
    fn new(a: &Matrix, g: &[f64], p: &Preconditioner, tau: f64, k: usize) -> Self {
        let d = g.len();
        let mut coef = vec![0.0; p.rank()];
        let mut first = vec![0.0; d];
        p.apply_into(g, &mut coef, &mut first);
        let mut row = vec![vec![0.0; d]; k];
        let mut acc = vec![vec![0.0; d]; k];
        row[0].copy_from_slice(&first);
        acc[0] = first;
        Self {
            row,
            acc,
            tau,
            scratch: vec![0.0; a.rows()],
            gu: vec![0.0; d],
            pr: vec![0.0; d],
            coef,
        }
    }

    /// Moves from row `i−1` to row `i`.
    fn advance(&mut self, a: &Matrix, p: &Preconditioner, i: usize) -> Result<()> {
        p.apply_into(&self.row[i - 1], &mut self.coef, &mut self.pr);
        for (t, v) in self.row[i].iter_mut().zip(&self.pr) {
            *t = -v;
        }
        for j in (0..i).rev() {
            a.gram_apply_into(&self.row[j], &mut self.scratch, &mut self.gu);
            self.gu.iter_mut().for_each(|v| *v *= self.tau);
            if j > 0 {
                axpy(1.0, &self.row[j - 1], &mut self.gu);
            }
            p.apply_into(&self.gu, &mut self.coef, &mut self.pr);
            axpy(-1.0, &self.pr, &mut self.row[j]);
        }
        for j in 0..=i {
            if !all_finite(&self.row[j]) {
                return Err(Error::NonFinite("ihs_basis"));
            }
            axpy(1.0, &self.row[j], &mut self.acc[j]);
        }
        Ok(())
    }

    fn finish(self) -> BinomialBasis {
        BinomialBasis {
            vectors: self.acc,
            tau: self.tau,
            interval: (0.0, f64::INFINITY),
            flavor: Flavor::Ihs,
        }
    }
}

/// Bases for a `d × K` right-hand side, one per column.
#[derive(Debug, Clone)]
pub struct MatrixBasis {
    columns: Vec<BinomialBasis>,
}

impl MatrixBasis {
    pub fn columns(&self) -> &[BinomialBasis] {
        &self.columns
    }

    pub fn order(&self) -> usize {
        self.columns[0].order()
    }

    pub fn tau(&self) -> f64 {
        self.columns[0].tau()
    }

    pub fn with_interval(self, lo: f64, hi: f64) -> Self {
        Self {
            columns: self.columns.into_iter().map(|c| c.with_interval(lo, hi)).collect(),
        }
    }

    /// `X(λ)` as a `d × K` matrix.
    pub fn compose(&self, lambda: f64) -> DenseMatrix {
        let cols: Vec<Vec<f64>> = self.columns.iter().map(|c| c.compose(lambda)).collect();
        let d = cols[0].len();
        DenseMatrix::from_fn(d, cols.len(), |i, j| cols[j][i])
    }
}

/// Runs the sketched recursion on every column of `B` in lockstep.
pub fn ihs_basis_matrix(a: &Matrix, b: &DenseMatrix, p: &Preconditioner, tau: f64, k: usize) -> Result<MatrixBasis> {
    check_len("ihs_basis_matrix", a.rows(), b.rows())?;
    if b.cols() == 0 {
        return Err(Error::InvalidArgument("right-hand side needs K ≥ 1 columns".into()));
    }
    let gs = (0..b.cols())
        .map(|j| a.apply_transpose(&b.column(j)))
        .collect::<Result<Vec<_>>>()?;
    ihs_basis_matrix_rhs(a, &gs, p, tau, k)
}

pub fn ihs_basis_matrix_rhs(a: &Matrix, gs: &[Vec<f64>], p: &Preconditioner, tau: f64, k: usize) -> Result<MatrixBasis> {
    check_order(tau, k)?;
    for g in gs {
        check_len("ihs_basis_matrix", a.cols(), g.len())?;
        check_len("ihs_basis_matrix", p.dim(), g.len())?;
    }
    let mut recs: Vec<Recursion> = gs.iter().map(|g| Recursion::new(a, g, p, tau, k)).collect();
    for i in 1..k {
        for rec in recs.iter_mut() {
            rec.advance(a, p, i)?;
        }
    }
    Ok(MatrixBasis {
        columns: recs.into_iter().map(Recursion::finish).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::counters;
    use crate::linalg::ops::relative_error;
    use crate::rng::SeededRng;

    fn scalar() -> Matrix {
        Matrix::Dense(DenseMatrix::new(1, 1, vec![1.0]).unwrap())
    }

    #[test]
    fn gd_scalar_example() {
        let basis = gd_basis(&scalar(), &[1.0], 0.5, 2).unwrap();
        assert_eq!(basis.vectors(), &[vec![1.5], vec![1.0]]);
        assert_eq!(gd_compose(&basis, 1.0).unwrap(), vec![0.5]);
        assert_eq!(gd_compose(&basis, 0.0).unwrap(), vec![0.75]);
        assert!(ihs_compose(&basis, 0.0).is_err());
    }

    #[test]
    fn gd_order_one_is_constant() {
        let a = Matrix::Dense(DenseMatrix::new(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap());
        let basis = gd_basis(&a, &[1.0, 1.0], 0.1, 1).unwrap();
        assert_eq!(basis.vectors(), &[vec![1.0, 3.0]]);
        for lambda in [0.0, 1.0, 100.0] {
            assert_eq!(basis.compose(lambda), vec![0.1, 0.30000000000000004]);
        }
        assert!(matches!(gd_basis(&a, &[1.0, 1.0], 0.1, 61), Err(Error::CoefficientOverflow { k: 61 })));
    }

    #[test]
    fn ihs_scalar_example() {
        let p = Preconditioner::from_product(&DenseMatrix::new(1, 1, vec![1.0]).unwrap(), 1.0).unwrap();
        let basis = ihs_basis(&scalar(), &[1.0], &p, 1.0, 2).unwrap();
        assert_eq!(basis.vectors(), &[vec![0.75], vec![-0.25]]);
        assert_eq!(ihs_compose(&basis, 1.0).unwrap(), vec![0.5]);
        assert_eq!(ihs_compose(&basis, 0.0).unwrap(), vec![0.75]);
        let one = ihs_basis(&scalar(), &[1.0], &p, 1.0, 1).unwrap();
        assert_eq!(one.vectors(), &[vec![0.5]]);
    }

    #[test]
    fn zero_rhs_gives_zero_basis() {
        let mut rng = SeededRng::new(1);
        let a = Matrix::Dense(DenseMatrix::from_fn(6, 3, |_, _| rng.normal()));
        let p = Preconditioner::from_product(&a.to_dense(), 1.0).unwrap();
        let ihs = ihs_basis(&a, &[0.0; 6], &p, 0.5, 4).unwrap();
        let gd = gd_basis(&a, &[0.0; 6], 0.01, 4).unwrap();
        for basis in [ihs, gd] {
            assert!(basis.vectors().iter().flatten().all(|v| *v == 0.0));
            assert!(basis.compose(3.0).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn operation_counts() {
        let mut rng = SeededRng::new(2);
        let a = Matrix::Dense(DenseMatrix::from_fn(10, 4, |_, _| rng.normal()));
        let b: Vec<f64> = (0..10).map(|_| rng.normal()).collect();
        let p = Preconditioner::from_product(&a.to_dense(), 1.0).unwrap();
        counters::reset();
        let basis = ihs_basis(&a, &b, &p, 0.5, 7).unwrap();
        assert_eq!(counters::snapshot().gram_applies, 21);
        counters::reset();
        for i in 0..13 {
            basis.compose(i as f64);
        }
        assert_eq!(counters::snapshot().compose_axpys, 13 * 7);
    }

    #[test]
    fn matrix_columns_match_vector_runs() {
        let mut rng = SeededRng::new(3);
        let a = Matrix::Dense(DenseMatrix::from_fn(12, 5, |_, _| rng.normal()));
        let bm = DenseMatrix::from_fn(12, 3, |_, _| rng.normal());
        let sa = DenseMatrix::from_fn(7, 5, |_, _| rng.normal());
        let p = Preconditioner::from_product(&sa, 2.0).unwrap();
        let mb = ihs_basis_matrix(&a, &bm, &p, 0.3, 5).unwrap();
        for j in 0..3 {
            let vb = ihs_basis(&a, &bm.column(j), &p, 0.3, 5).unwrap();
            assert_eq!(vb.vectors(), mb.columns()[j].vectors());
            assert_eq!(mb.compose(1.7).column(j), vb.compose(1.7));
        }
        let zero = ihs_basis_matrix(&a, &DenseMatrix::zeros(12, 2), &p, 0.3, 5).unwrap();
        assert!(zero.compose(4.0).as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn ihs_matches_explicit_iteration() {
        let mut rng = SeededRng::new(4);
        let a = Matrix::Dense(DenseMatrix::from_fn(20, 6, |_, _| rng.normal()));
        let b: Vec<f64> = (0..20).map(|_| rng.normal()).collect();
        let sa = DenseMatrix::from_fn(9, 6, |_, _| rng.normal() * 1.5);
        let p = Preconditioner::from_product(&sa, 3.0).unwrap();
        let g = a.apply_transpose(&b).unwrap();
        let tau = 0.4;
        for k in 1..=8 {
            let basis = ihs_basis(&a, &b, &p, tau, k).unwrap();
            for lambda in [0.0, 0.5, 2.0, 9.0] {
                let mut x = vec![0.0; 6];
                for _ in 0..k {
                    let mut grad = a.gram_apply(&x).unwrap();
                    axpy(-1.0, &g, &mut grad);
                    axpy(lambda, &x, &mut grad);
                    axpy(-tau, &p.apply(&grad).unwrap(), &mut x);
                }
                assert!(relative_error(&basis.compose(lambda), &x) < 1e-10, "k={k} λ={lambda}");
            }
        }
    }
}
