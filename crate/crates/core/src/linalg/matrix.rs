use crate::error::{check_len, Result};
use crate::linalg::counters;
use crate::linalg::csr::CsrMatrix;
use crate::linalg::dense::DenseMatrix;

/// A data matrix in either storage format.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

impl From<DenseMatrix> for Matrix {
    fn from(m: DenseMatrix) -> Self {
        Matrix::Dense(m)
    }
}

impl From<CsrMatrix> for Matrix {
    fn from(m: CsrMatrix) -> Self {
        Matrix::Sparse(m)
    }
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows(),
            Matrix::Sparse(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.cols(),
            Matrix::Sparse(m) => m.cols(),
        }
    }

    /// Stored entries: every entry for dense storage, explicit entries for CSR.
    pub fn nnz(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows() * m.cols(),
            Matrix::Sparse(m) => m.nnz(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Matrix::Sparse(_))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(m) => m.to_dense(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.transpose()),
            Matrix::Sparse(m) => Matrix::Sparse(m.transpose()),
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.select_rows(idx)),
            Matrix::Sparse(m) => Matrix::Sparse(m.select_rows(idx)),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            Matrix::Dense(m) => m.frobenius_norm(),
            Matrix::Sparse(m) => m.frobenius_norm(),
        }
    }

    /// `A x`
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("Matrix::apply", self.cols(), x.len())?;
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Matrix::Dense(m) => m.apply_into(x, out),
            Matrix::Sparse(m) => m.apply_into(x, out),
        }
    }

    /// `Aᵀ y`
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("Matrix::apply_transpose", self.rows(), y.len())?;
        let mut out = vec![0.0; self.cols()];
        self.apply_transpose_into(y, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        match self {
            Matrix::Dense(m) => m.apply_transpose_into(y, out),
            Matrix::Sparse(m) => m.apply_transpose_into(y, out),
        }
    }

    /// `Aᵀ(A x)` without forming `AᵀA`; O(nnz(A)).
    pub fn gram_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("Matrix::gram_apply", self.cols(), x.len())?;
        let mut scratch = vec![0.0; self.rows()];
        let mut out = vec![0.0; self.cols()];
        self.gram_apply_into(x, &mut scratch, &mut out);
        Ok(out)
    }

    pub(crate) fn gram_apply_into(&self, x: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        counters::count_gram(1);
        self.apply_into(x, scratch);
        self.apply_transpose_into(scratch, out);
    }
}
