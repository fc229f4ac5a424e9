use crate::data::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Matrix};
use crate::rng::SeededRng;

/// Dense: affine map of the global `[min, max]` onto `[−1, 1]`.
/// CSR: division by the largest magnitude, so zeros stay zero.
pub fn rescale_features(m: &Matrix) -> Result<Matrix> {
    match m {
        Matrix::Dense(d) => {
            let (lo, hi) = d
                .as_slice()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
            if !(hi > lo) {
                return Err(Error::InvalidArgument("cannot rescale a constant matrix".into()));
            }
            let span = hi - lo;
            Ok(Matrix::Dense(DenseMatrix::from_fn(d.rows(), d.cols(), |i, j| {
                2.0 * (d.get(i, j) - lo) / span - 1.0
            })))
        }
        Matrix::Sparse(s) => {
            let top = s.max_abs();
            if !(top > 0.0) {
                return Err(Error::InvalidArgument("cannot rescale an all-zero matrix".into()));
            }
            Ok(Matrix::Sparse(s.scaled(1.0 / top)))
        }
    }
}

/// Random permutation of the rows; the first `⌈n/2⌉` become training data.
/// Any existing test set is discarded.
pub fn split_half(ds: &Dataset, seed: u64) -> Result<Dataset> {
    let n = ds.a_train.rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("split needs at least 2 rows, got {n}")));
    }
    let perm = SeededRng::new(seed).permutation(n);
    let (train_idx, test_idx) = perm.split_at(n.div_ceil(2));
    let labels = |idx: &[usize]| idx.iter().map(|&i| ds.b_train[i]).collect::<Vec<_>>();
    let mut out = Dataset::new(
        ds.a_train.select_rows(train_idx),
        labels(train_idx),
        Some((ds.a_train.select_rows(test_idx), labels(test_idx))),
        Provenance::Split { seed },
    )?;
    out.truth = ds.truth.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;

    #[test]
    fn dense_affine_map() {
        let m = Matrix::Dense(DenseMatrix::new(1, 3, vec![0.0, 5.0, 10.0]).unwrap());
        let r = rescale_features(&m).unwrap().to_dense();
        assert_eq!(r.as_slice(), &[-1.0, 0.0, 1.0]);
        let already = Matrix::Dense(DenseMatrix::new(1, 3, vec![-1.0, 0.5, 1.0]).unwrap());
        assert_eq!(rescale_features(&already).unwrap().to_dense(), already.to_dense());
        let flat = Matrix::Dense(DenseMatrix::new(1, 2, vec![3.0, 3.0]).unwrap());
        assert!(rescale_features(&flat).is_err());
    }

    #[test]
    fn sparse_keeps_zeros() {
        let s = CsrMatrix::from_triplets(2, 3, &[(0, 1, 4.0), (1, 2, -8.0)]).unwrap();
        let r = rescale_features(&Matrix::Sparse(s.clone())).unwrap();
        assert!(r.is_sparse());
        assert_eq!(r.nnz(), s.nnz());
        assert_eq!(r.to_dense().as_slice(), &[0.0, 0.5, 0.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn split_is_a_partition() {
        let a = DenseMatrix::from_fn(7, 2, |i, j| (10 * i + j) as f64);
        let ds = Dataset::new(Matrix::Dense(a), (0..7).map(|i| i as f64).collect(), None, Provenance::InMemory).unwrap();
        let s = split_half(&ds, 3).unwrap();
        assert_eq!(s.a_train.rows(), 4);
        let mut seen: Vec<f64> = s.b_train.iter().chain(s.b_test.as_ref().unwrap()).copied().collect();
        seen.sort_by(f64::total_cmp);
        assert_eq!(seen, (0..7).map(|i| i as f64).collect::<Vec<_>>());
        for (row, label) in s.b_train.iter().enumerate() {
            assert_eq!(s.a_train.to_dense().get(row, 0), 10.0 * label);
        }
        let again = split_half(&ds, 3).unwrap();
        assert_eq!(again.b_train, s.b_train);

        let two = Dataset::new(Matrix::Dense(DenseMatrix::identity(2)), vec![1.0, 2.0], None, Provenance::InMemory).unwrap();
        let s2 = split_half(&two, 0).unwrap();
        assert_eq!((s2.a_train.rows(), s2.a_test.unwrap().rows()), (1, 1));
        let one = Dataset::new(Matrix::Dense(DenseMatrix::identity(1)), vec![1.0], None, Provenance::InMemory).unwrap();
        assert!(split_half(&one, 0).is_err());
    }
}
