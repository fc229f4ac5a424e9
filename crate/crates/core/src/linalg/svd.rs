//! Thin singular value decomposition.
//!
//! One-sided (Hestenes) Jacobi on the columns of a tall matrix. Matrices with
//! more than twice as many rows as columns are first reduced by Householder QR
//! so the Jacobi sweeps run on the small triangular factor.

use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;
use crate::linalg::ops::{axpy, dot, norm2, scale};

const MAX_SWEEPS: usize = 60;

/// `M = U · diag(sigma) · Vt` with `k = min(rows, cols)` singular triplets,
/// `sigma` sorted in non-increasing order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub vt: DenseMatrix,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, s) in self.sigma.iter().enumerate() {
                let v = us.get(i, j) * s;
                us.set(i, j, v);
            }
        }
        us.matmul(&self.vt).expect("factor shapes agree")
    }
}

pub fn thin_svd(m: &DenseMatrix) -> Result<SvdFactors> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::InvalidArgument(
            "thin_svd needs at least one row and one column".into(),
        ));
    }
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("thin_svd"));
    }
    if m.rows() >= m.cols() {
        tall_svd(m)
    } else {
        let f = tall_svd(&m.transpose())?;
        Ok(SvdFactors {
            u: f.vt.transpose(),
            sigma: f.sigma,
            vt: f.u.transpose(),
        })
    }
}

/// Column-major copy: `cols` vectors of length `rows`.
fn columns_of(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.cols()).map(|j| m.column(j)).collect()
}

fn tall_svd(m: &DenseMatrix) -> Result<SvdFactors> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows > 2 * cols {
        let (q, r) = householder_qr(m);
        let inner = jacobi_svd(columns_of(&r), cols)?;
        // U = Q · U_r
        let u = q.matmul(&inner.u)?;
        return Ok(SvdFactors {
            u,
            sigma: inner.sigma,
            vt: inner.vt,
        });
    }
    jacobi_svd(columns_of(m), rows)
}

/// Thin QR via Householder reflections; returns `Q` (rows×cols) and `R` (cols×cols).
fn householder_qr(m: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = columns_of(m);
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for k in 0..cols {
        let x = &a[k][k..];
        let nx = norm2(x);
        let mut v = x.to_vec();
        if nx == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -nx } else { nx };
        v[0] -= alpha;
        let vv = dot(&v, &v);
        if vv == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let tail = &mut col[k..];
            let f = -2.0 * dot(&v, tail) / vv;
            axpy(f, &v, tail);
        }
        scale(1.0 / vv.sqrt(), &mut v);
        reflectors.push(v);
    }
    let r = DenseMatrix::from_fn(cols, cols, |i, j| if i <= j { a[j][i] } else { 0.0 });
    // Q = H_0 ⋯ H_{cols-1} [I; 0]
    let mut q_cols: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; rows];
            e[j] = 1.0;
            e
        })
        .collect();
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for col in q_cols.iter_mut() {
            let tail = &mut col[k..];
            let f = -2.0 * dot(v, tail);
            axpy(f, v, tail);
        }
    }
    let q = DenseMatrix::from_fn(rows, cols, |i, j| q_cols[j][i]);
    (q, r)
}

/// One-sided Jacobi on `cols.len()` column vectors of length `rows` (rows ≥ cols).
fn jacobi_svd(mut a: Vec<Vec<f64>>, rows: usize) -> Result<SvdFactors> {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON * (rows.max(1) as f64).sqrt();
    let mut converged = n < 2;
    let mut norms: Vec<f64> = a.iter().map(|c| dot(c, c)).collect();
    // columns this small are rounding residue of a rank-deficient input
    let negligible = norms.iter().sum::<f64>() * (f64::EPSILON * rows.max(1) as f64).powi(2);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let (lo, hi) = a.split_at_mut(q);
                let (ap, aq) = (&mut lo[p], &mut hi[0]);
                let gamma = dot(ap, aq);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(ap, aq, c, s);
                norms[p] = alpha - t * gamma;
                norms[q] = beta + t * gamma;
                let (vlo, vhi) = v.split_at_mut(q);
                rotate(&mut vlo[p], &mut vhi[0], c, s);
            }
        }
        for (nrm, col) in norms.iter_mut().zip(&a) {
            *nrm = dot(col, col);
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sig: Vec<f64> = a.iter().map(|c| norm2(c)).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]));
    let smax = sig[order[0]];
    let zero_cut = smax * f64::EPSILON * (rows as f64);

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        sigma.push(sig[j]);
        if sig[j] > zero_cut && sig[j] > 0.0 {
            let mut c = a[j].clone();
            scale(1.0 / sig[j], &mut c);
            u_cols.push(c);
        } else {
            u_cols.push(Vec::new());
            deficient.push(slot);
        }
    }
    complete_orthonormal(&mut u_cols, &deficient, rows);

    let u = DenseMatrix::from_fn(rows, n, |i, j| u_cols[j][i]);
    let vt = DenseMatrix::from_fn(n, n, |i, j| v[order[i]][j]);
    Ok(SvdFactors { u, sigma, vt })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Fills the empty slots of `cols` with unit vectors orthogonal to every
/// other column (Gram–Schmidt over the standard basis).
fn complete_orthonormal(cols: &mut [Vec<f64>], slots: &[usize], rows: usize) {
    let mut candidate = 0;
    for &slot in slots {
        while candidate < rows {
            let mut e = vec![0.0; rows];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for c in cols.iter().filter(|c| !c.is_empty()) {
                    let f = -dot(c, &e);
                    axpy(f, c, &mut e);
                }
            }
            let nrm = norm2(&e);
            if nrm > 0.5 {
                scale(1.0 / nrm, &mut e);
                cols[slot] = e;
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut r = SeededRng::new(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| r.normal())
    }

    fn orthonormal_residual(m: &DenseMatrix) -> f64 {
        // ‖MᵀM − I‖_max over columns
        let g = m.gram();
        let mut worst: f64 = 0.0;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.get(i, j) - target).abs());
            }
        }
        worst
    }

    fn check(m: &DenseMatrix) {
        let f = thin_svd(m).unwrap();
        let rec = f.reconstruct();
        let err = DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| rec.get(i, j) - m.get(i, j));
        assert!(err.frobenius_norm() <= 1e-8 * m.frobenius_norm().max(1e-300));
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(orthonormal_residual(&f.u) <= 1e-10);
        assert!(orthonormal_residual(&f.vt.transpose()) <= 1e-10);
    }

    #[test]
    fn diagonal_and_permutation() {
        let d = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(thin_svd(&d).unwrap().sigma, vec![3.0, 2.0]);
        let p = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = thin_svd(&p).unwrap().sigma;
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shapes_and_contracts() {
        for (r, c, seed) in [(20, 5, 1), (5, 20, 2), (8, 8, 3), (50, 7, 4), (1, 6, 5), (6, 1, 6)] {
            check(&random(r, c, seed));
        }
    }

    #[test]
    fn rank_deficient_input_keeps_orthonormal_u() {
        let a = random(10, 3, 9);
        // third column = first + second
        let m = DenseMatrix::from_fn(10, 3, |i, j| match j {
            2 => a.get(i, 0) + a.get(i, 1),
            _ => a.get(i, j),
        });
        check(&m);
        let f = thin_svd(&m).unwrap();
        assert!(f.sigma[2] < 1e-12 * f.sigma[0]);
        check(&DenseMatrix::zeros(4, 3));
    }

    #[test]
    fn colliding_countsketch_product_converges() {
        use crate::linalg::Matrix;
        use crate::sketch::{sketch_apply, SketchKind, SketchSpec};
        // more buckets than rows: collisions leave the 56×28 product rank deficient
        let a = Matrix::Dense(random(35, 28, 32));
        let spec = SketchSpec::new(SketchKind::CountSketch, 56, 35, 602743401).unwrap();
        let sa = sketch_apply(&spec, &a).unwrap().product;
        check(&sa);
        check(&sa.transpose());
        let m = random(56, 5, 10).matmul(&random(5, 28, 11)).unwrap();
        check(&m);
        assert!(thin_svd(&m).unwrap().sigma[5] < 1e-12);
    }
}
