//! Synthetic regression data with AR(1)-style feature correlation.
//!
//! With `Σ_ij = α^|i−j|`, training rows are `Σz/(nd)^{1/4}` (covariance
//! `Σ²/√(nd)`) and test rows `Σz/√(nd)` (covariance `Σ²/(nd)`), `z ∼ N(0, I_d)`.
//! Labels are `Av* + η` with `v* ∼ N(0, I_d/d)` and `η ∼ N(0, σ²)`.

use crate::data::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Matrix};
use crate::rng::SeededRng;

/// `Σz` in `O(d)`: forward and backward geometric sums share the diagonal.
pub fn ar_covariance_apply(alpha: f64, z: &[f64]) -> Vec<f64> {
    let d = z.len();
    let mut fwd = vec![0.0; d];
    let mut acc = 0.0;
    for i in 0..d {
        acc = z[i] + alpha * acc;
        fwd[i] = acc;
    }
    let mut acc = 0.0;
    for i in (0..d).rev() {
        acc = z[i] + alpha * acc;
        fwd[i] += acc - z[i];
    }
    fwd
}

fn rows(rng: &mut SeededRng, n: usize, d: usize, alpha: f64, scale: f64) -> DenseMatrix {
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let z: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        data.extend(ar_covariance_apply(alpha, &z).into_iter().map(|v| v * scale));
    }
    DenseMatrix::new(n, d, data).expect("shape by construction")
}

/// Draw order: `v*`, training rows, training noise, test rows, test noise.
/// The test set has `n` rows.
pub fn gen_synthetic(n: usize, d: usize, alpha: f64, sigma: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("need n ≥ 1 and d ≥ 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (0, 1)")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma} must be ≥ 0")));
    }
    let mut rng = SeededRng::new(seed);
    let nd = (n as f64) * (d as f64);
    let vstar: Vec<f64> = (0..d).map(|_| rng.normal() / (d as f64).sqrt()).collect();
    let train = rows(&mut rng, n, d, alpha, nd.powf(-0.25));
    let mut b = train.apply(&vstar)?;
    b.iter_mut().for_each(|v| *v += sigma * rng.normal());
    let test = rows(&mut rng, n, d, alpha, nd.powf(-0.5));
    let mut bt = test.apply(&vstar)?;
    bt.iter_mut().for_each(|v| *v += sigma * rng.normal());
    let mut ds = Dataset::new(
        Matrix::Dense(train),
        b,
        Some((Matrix::Dense(test), bt)),
        Provenance::Synthetic {
            n,
            d,
            alpha,
            sigma,
            seed,
        },
    )?;
    ds.truth = Some(vstar);
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_entry(alpha: f64, i: usize, j: usize) -> f64 {
        alpha.powi((i as i32 - j as i32).abs())
    }

    #[test]
    fn covariance_entry() {
        assert!((sigma_entry(0.99, 0, 2) - 0.9801).abs() < 1e-15);
    }

    #[test]
    fn recursion_matches_dense_product() {
        let z = [0.3, -1.2, 2.0, 0.7, -0.1];
        let fast = ar_covariance_apply(0.8, &z);
        for (i, f) in fast.iter().enumerate() {
            let slow: f64 = (0..5).map(|j| sigma_entry(0.8, i, j) * z[j]).sum();
            assert!((f - slow).abs() < 1e-14);
        }
    }

    #[test]
    fn noiseless_labels_are_exact() {
        let ds = gen_synthetic(20, 6, 0.99, 0.0, 3).unwrap();
        let v = ds.truth.clone().unwrap();
        assert_eq!(ds.a_train.apply(&v).unwrap(), ds.b_train);
        let (train, _) = crate::path::losses(&ds.a_train, &ds.b_train, None, &v, 0.0).unwrap();
        assert_eq!(train, 0.0);
    }

    #[test]
    fn reproducible() {
        let a = gen_synthetic(15, 7, 0.9, 0.1, 11).unwrap();
        let b = gen_synthetic(15, 7, 0.9, 0.1, 11).unwrap();
        assert_eq!(a.a_train.to_dense(), b.a_train.to_dense());
        assert_eq!(a.b_test, b.b_test);
        assert!(gen_synthetic(15, 7, 1.0, 0.1, 11).is_err());
    }

    #[test]
    fn empirical_covariance() {
        let (n, d, alpha) = (10_000, 4, 0.99);
        let ds = gen_synthetic(n, d, alpha, 0.0, 5).unwrap();
        let a = ds.a_train.to_dense();
        let scale = ((n * d) as f64).sqrt();
        for i in 0..d {
            for j in 0..d {
                let emp: f64 = (0..n).map(|r| a.get(r, i) * a.get(r, j)).sum::<f64>() / n as f64;
                let sig2: f64 = (0..d).map(|k| sigma_entry(alpha, i, k) * sigma_entry(alpha, k, j)).sum();
                let expect = sig2 / scale;
                assert!((emp - expect).abs() <= 0.05 * expect, "({i},{j}) {emp} vs {expect}");
            }
        }
    }
}
