//! Sketched-Hessian preconditioner `P_S = (AᵀSᵀSA + λ₀I)⁻¹`.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::linalg::counters::count_precond;
use crate::linalg::ops::{axpy, dot};
use crate::linalg::{thin_svd, DenseMatrix, Matrix};
use crate::rng::SeededRng;
use crate::sketch::SketchedMatrix;
use crate::spectrum::{RhoBounds, RhoSource};

/// Relative cutoff below which singular values of `SA` count as zero.
const RANK_CUTOFF: f64 = 1e-12;

#[derive(Debug)]
struct Factors {
    /// Retained right singular vectors, one per row (`r × d`).
    vt: DenseMatrix,
    sigma_sq: Vec<f64>,
    m: usize,
    d: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    /// `V₁ᵀ(Σ₁²+λ₀)⁻¹V₁v`; needs `V₁` square.
    Full,
    /// `v/λ₀ + V₁ᵀ((Σ₁²+λ₀)⁻¹ − λ₀⁻¹)V₁v`; valid for any rank.
    Shifted,
}

/// Cheap to clone; reshifted copies share the SVD.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    factors: Arc<Factors>,
    lambda0: f64,
}

impl Preconditioner {
    pub fn build(sa: &SketchedMatrix, lambda0: f64) -> Result<Self> {
        Self::from_product(&sa.product, lambda0)
    }

    pub fn from_product(sa: &DenseMatrix, lambda0: f64) -> Result<Self> {
        check_shift(lambda0)?;
        let svd = thin_svd(sa)?;
        let smax = svd.sigma.first().copied().unwrap_or(0.0);
        let rank = svd
            .sigma
            .iter()
            .take_while(|s| smax > 0.0 && **s > RANK_CUTOFF * smax)
            .count();
        let d = sa.cols();
        let mut vt = DenseMatrix::zeros(rank, d);
        for i in 0..rank {
            vt.row_mut(i).copy_from_slice(svd.vt.row(i));
        }
        let sigma_sq = svd.sigma[..rank].iter().map(|s| s * s).collect();
        Ok(Self {
            factors: Arc::new(Factors {
                vt,
                sigma_sq,
                m: sa.rows(),
                d,
            }),
            lambda0,
        })
    }

    pub fn reshift(&self, lambda0: f64) -> Result<Self> {
        check_shift(lambda0)?;
        Ok(Self {
            factors: Arc::clone(&self.factors),
            lambda0,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn dim(&self) -> usize {
        self.factors.d
    }

    pub fn sketch_rows(&self) -> usize {
        self.factors.m
    }

    pub fn rank(&self) -> usize {
        self.factors.sigma_sq.len()
    }

    /// Retained squared singular values of `SA`.
    pub fn sigma_sq(&self) -> &[f64] {
        &self.factors.sigma_sq
    }

    fn branch(&self) -> Branch {
        let f = &self.factors;
        if f.m >= f.d && f.sigma_sq.len() == f.d {
            Branch::Full
        } else {
            Branch::Shifted
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("Preconditioner::apply", self.factors.d, v.len())?;
        let mut out = vec![0.0; v.len()];
        let mut coef = vec![0.0; self.rank()];
        self.apply_into(v, &mut coef, &mut out);
        Ok(out)
    }

    /// `coef` must have length `rank()`.
    pub(crate) fn apply_into(&self, v: &[f64], coef: &mut [f64], out: &mut [f64]) {
        self.apply_branch(self.branch(), v, coef, out);
    }

    fn apply_branch(&self, branch: Branch, v: &[f64], coef: &mut [f64], out: &mut [f64]) {
        count_precond(1);
        let f = &self.factors;
        let inv0 = 1.0 / self.lambda0;
        for (i, c) in coef.iter_mut().enumerate() {
            let w = 1.0 / (f.sigma_sq[i] + self.lambda0);
            let w = match branch {
                Branch::Full => w,
                Branch::Shifted => w - inv0,
            };
            *c = w * dot(f.vt.row(i), v);
        }
        match branch {
            Branch::Full => out.iter_mut().for_each(|o| *o = 0.0),
            Branch::Shifted => out.iter_mut().zip(v).for_each(|(o, x)| *o = x * inv0),
        }
        for (i, c) in coef.iter().enumerate() {
            axpy(*c, f.vt.row(i), out);
        }
    }

    /// Lanczos estimate of `ρ₁, ρ₂` for the realized sketch at this shift.
    ///
    /// Runs `steps` Lanczos iterations on `P_S·H`, `H = AᵀA + λ₀I`, in the
    /// `H` inner product. The Ritz values `θ` bracket from inside the
    /// eigenvalues of `P_S·H`; the returned bounds are `ρ₁ = margin/θ_min`,
    /// `ρ₂ = 1/(margin·θ_max)`.
    pub fn measure_rho(&self, a: &Matrix, steps: usize, margin: f64, seed: u64) -> Result<RhoBounds> {
        let d = self.factors.d;
        check_len("Preconditioner::measure_rho", d, a.cols())?;
        if !(margin >= 1.0) {
            return Err(Error::InvalidArgument(format!("margin = {margin} < 1")));
        }
        let steps = steps.clamp(1, d);
        let mut rng = SeededRng::new(seed);
        let mut scratch = vec![0.0; a.rows()];
        let mut coef = vec![0.0; self.rank()];
        let h_apply = |x: &[f64], scratch: &mut [f64], out: &mut [f64]| {
            a.gram_apply_into(x, scratch, out);
            axpy(self.lambda0, x, out);
        };

        let mut q: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let mut hq = vec![0.0; d];
        h_apply(&q, &mut scratch, &mut hq);
        let nrm = dot(&q, &hq).sqrt();
        q.iter_mut().for_each(|v| *v /= nrm);
        hq.iter_mut().for_each(|v| *v /= nrm);

        let mut qs: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut hqs: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut alphas = Vec::with_capacity(steps);
        let mut betas: Vec<f64> = Vec::with_capacity(steps);
        for _ in 0..steps {
            let mut w = vec![0.0; d];
            self.apply_into(&hq, &mut coef, &mut w);
            let alpha = dot(&w, &hq);
            alphas.push(alpha);
            qs.push(q);
            hqs.push(hq);
            if qs.len() == steps {
                break;
            }
            // full reorthogonalization in the H inner product, twice
            for _ in 0..2 {
                for (qi, hqi) in qs.iter().zip(&hqs) {
                    let c = dot(hqi, &w);
                    axpy(-c, qi, &mut w);
                }
            }
            let mut hw = vec![0.0; d];
            h_apply(&w, &mut scratch, &mut hw);
            let beta = dot(&w, &hw).max(0.0).sqrt();
            if !(beta > 1e-12 * alpha.abs()) {
                break;
            }
            betas.push(beta);
            q = w.into_iter().map(|v| v / beta).collect();
            hq = hw.into_iter().map(|v| v / beta).collect();
        }

        let k = alphas.len();
        let t = DenseMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let theta = thin_svd(&t)?.sigma;
        let theta_max = theta[0];
        let theta_min = theta[k - 1];
        if !(theta_min > 0.0) {
            return Err(Error::NonFinite("measure_rho"));
        }
        RhoBounds::new(margin / theta_min, 1.0 / (margin * theta_max), RhoSource::Measured)
    }
}

fn check_shift(lambda0: f64) -> Result<()> {
    if lambda0 > 0.0 && lambda0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda0 = {lambda0} must be positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Cholesky;

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = SeededRng::new(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.normal())
    }

    fn dense_oracle(sa: &DenseMatrix, lambda0: f64, v: &[f64]) -> Vec<f64> {
        let mut h = sa.gram();
        h.add_diagonal(lambda0);
        Cholesky::factor(&h).unwrap().solve(v).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn scalar_and_zero_examples() {
        let p = Preconditioner::from_product(&DenseMatrix::new(1, 1, vec![1.0]).unwrap(), 1.0).unwrap();
        assert_eq!(p.sigma_sq(), &[1.0]);
        assert!((p.apply(&[2.0]).unwrap()[0] - 1.0).abs() < 1e-15);

        let z = Preconditioner::from_product(&DenseMatrix::zeros(3, 4), 2.0).unwrap();
        assert_eq!(z.apply(&[2.0, 4.0, -6.0, 1.0]).unwrap(), vec![1.0, 2.0, -3.0, 0.5]);
        let z4 = z.reshift(4.0).unwrap();
        assert_eq!(z4.apply(&[4.0, 8.0, 0.0, 1.0]).unwrap(), vec![1.0, 2.0, 0.0, 0.25]);
        assert!(z.reshift(0.0).is_err());
        assert!(z.apply(&[1.0]).is_err());
    }

    #[test]
    fn wide_matches_dense_inverse() {
        let sa = random(8, 20, 1);
        let p = Preconditioner::from_product(&sa, 0.5).unwrap();
        let v: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        assert!(max_diff(&p.apply(&v).unwrap(), &dense_oracle(&sa, 0.5, &v)) < 1e-10);
    }

    #[test]
    fn tall_matches_dense_inverse() {
        let sa = random(6, 4, 2);
        let p = Preconditioner::from_product(&sa, 0.3).unwrap();
        assert_eq!(p.branch(), Branch::Full);
        let v = [1.0, -2.0, 0.5, 3.0];
        assert!(max_diff(&p.apply(&v).unwrap(), &dense_oracle(&sa, 0.3, &v)) < 1e-10);
    }

    #[test]
    fn nullspace_vector_is_scaled() {
        // SA = [I₂ | 0]: e₃ and e₄ lie outside the row space
        let sa = DenseMatrix::from_fn(2, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        let p = Preconditioner::from_product(&sa, 0.25).unwrap();
        let out = p.apply(&[0.0, 0.0, 1.0, -2.0]).unwrap();
        assert!(max_diff(&out, &[0.0, 0.0, 4.0, -8.0]) < 1e-14);
    }

    #[test]
    fn square_branches_agree() {
        let sa = random(5, 5, 3);
        let p = Preconditioner::from_product(&sa, 0.7).unwrap();
        let v = [0.3, -1.0, 2.0, 0.1, 1.5];
        let mut coef = vec![0.0; p.rank()];
        let mut full = vec![0.0; 5];
        let mut shifted = vec![0.0; 5];
        p.apply_branch(Branch::Full, &v, &mut coef, &mut full);
        p.apply_branch(Branch::Shifted, &v, &mut coef, &mut shifted);
        assert!(max_diff(&full, &shifted) < 1e-10);
    }

    #[test]
    fn rank_deficient_tall_uses_shifted_branch() {
        let mut sa = random(6, 3, 4);
        for i in 0..6 {
            let v = sa.get(i, 0);
            sa.set(i, 2, 2.0 * v);
        }
        let p = Preconditioner::from_product(&sa, 0.9).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.branch(), Branch::Shifted);
        let v = [1.0, 2.0, 3.0];
        assert!(max_diff(&p.apply(&v).unwrap(), &dense_oracle(&sa, 0.9, &v)) < 1e-10);
    }

    #[test]
    fn reshift_matches_rebuild() {
        let sa = random(7, 12, 5);
        let v: Vec<f64> = (0..12).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let p = Preconditioner::from_product(&sa, 1.0).unwrap();
        assert_eq!(p.reshift(1.0).unwrap().apply(&v).unwrap(), p.apply(&v).unwrap());
        let moved = p.reshift(3.5).unwrap().apply(&v).unwrap();
        let rebuilt = Preconditioner::from_product(&sa, 3.5).unwrap().apply(&v).unwrap();
        assert!(max_diff(&moved, &rebuilt) < 1e-12);
    }

    #[test]
    fn symmetric_and_positive_definite() {
        let sa = random(9, 14, 6);
        let p = Preconditioner::from_product(&sa, 0.2).unwrap();
        let mut rng = SeededRng::new(7);
        for _ in 0..10 {
            let v: Vec<f64> = (0..14).map(|_| rng.normal()).collect();
            let w: Vec<f64> = (0..14).map(|_| rng.normal()).collect();
            let pv = p.apply(&v).unwrap();
            let pw = p.apply(&w).unwrap();
            assert!((dot(&v, &pw) - dot(&w, &pv)).abs() < 1e-12 * (1.0 + dot(&v, &pw).abs()));
            assert!(dot(&v, &pv) > 0.0);
            let mut h = sa.gram();
            h.add_diagonal(0.2);
            let back = h.apply(&pv).unwrap();
            let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(max_diff(&back, &v) <= 1e-8 * scale);
        }
    }

    #[test]
    fn measured_rho_is_exact_for_identity_sketch() {
        let a = random(30, 6, 8);
        let p = Preconditioner::from_product(&a, 2.0).unwrap();
        let rho = p.measure_rho(&Matrix::Dense(a), 6, 1.0, 1).unwrap();
        assert!((rho.rho1 - 1.0).abs() < 1e-10 && (rho.rho2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn measured_rho_brackets_dense_spectrum() {
        let a = random(40, 5, 9);
        let sa = random(12, 40, 10).matmul(&a).unwrap();
        let sa = DenseMatrix::from_fn(12, 5, |i, j| sa.get(i, j) / 12f64.sqrt());
        let lambda0 = 0.5;
        let p = Preconditioner::from_product(&sa, lambda0).unwrap();
        let rho = p.measure_rho(&Matrix::Dense(a.clone()), 5, 1.0, 3).unwrap();
        // generalized Rayleigh quotients vᵀH_Sv / vᵀHv lie in [ρ₂, ρ₁]
        let mut h = a.gram();
        h.add_diagonal(lambda0);
        let mut hs = sa.gram();
        hs.add_diagonal(lambda0);
        let mut rng = SeededRng::new(11);
        for _ in 0..200 {
            let v: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
            let ratio = dot(&v, &hs.apply(&v).unwrap()) / dot(&v, &h.apply(&v).unwrap());
            assert!(ratio <= rho.rho1 * (1.0 + 1e-9) && ratio >= rho.rho2 * (1.0 - 1e-9));
        }
    }
}
