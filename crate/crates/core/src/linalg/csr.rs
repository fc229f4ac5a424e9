use crate::error::{check_len, Error, Result};
use crate::linalg::dense::DenseMatrix;
use crate::linalg::ops::dot;

/// Compressed sparse row matrix with strictly increasing column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_len("CsrMatrix row_offsets", rows + 1, row_offsets.len())?;
        check_len("CsrMatrix values", col_indices.len(), values.len())?;
        if row_offsets[0] != 0 || row_offsets[rows] != col_indices.len() {
            return Err(Error::InvalidArgument(format!(
                "row_offsets must start at 0 and end at nnz = {}",
                col_indices.len()
            )));
        }
        for r in 0..rows {
            let (s, e) = (row_offsets[r], row_offsets[r + 1]);
            if s > e {
                return Err(Error::InvalidArgument(format!(
                    "row_offsets decrease at row {r}"
                )));
            }
            let idx = &col_indices[s..e];
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "column indices not strictly increasing in row {r}"
                )));
            }
            if idx.last().is_some_and(|&c| c >= cols) {
                return Err(Error::InvalidArgument(format!(
                    "column index out of range in row {r}"
                )));
            }
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("CsrMatrix::new"));
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds from `(row, col, value)` triplets in any order; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(r, c, v) in &sorted {
            if r >= rows || c >= cols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("CsrMatrix::from_triplets"));
            }
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut row_offsets = Vec::with_capacity(m.rows() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                let p = next[j];
                col_indices[p] = i;
                values[p] = v;
                next[j] += 1;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut row_offsets = Vec::with_capacity(idx.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for &i in idx {
            let (c, v) = self.row(i);
            col_indices.extend_from_slice(c);
            values.extend_from_slice(v);
            row_offsets.push(col_indices.len());
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Returns a copy whose column count is `cols` (must not drop entries).
    pub fn with_cols(&self, cols: usize) -> Result<Self> {
        if self.col_indices.iter().any(|&c| c >= cols) {
            return Err(Error::InvalidArgument(format!(
                "cannot shrink to {cols} columns: entries beyond it exist"
            )));
        }
        let mut out = self.clone();
        out.cols = cols;
        Ok(out)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("CsrMatrix::apply", self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (idx, val) = self.row(i);
            let mut s = 0.0;
            for (&j, &v) in idx.iter().zip(val) {
                s += v * x[j];
            }
            *o = s;
        }
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("CsrMatrix::apply_transpose", self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        self.apply_transpose_into(y, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                out[j] += v * yi;
            }
        }
    }

    /// Squared Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_expanded_product() {
        // [[0,1],[2,0]]
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(a.apply(&[1.0, 1.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(a.apply_transpose(&[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let a = CsrMatrix::from_triplets(1, 3, &[(0, 2, 1.0), (0, 0, 1.0), (0, 2, 0.5)]).unwrap();
        assert_eq!(a.col_indices(), &[0, 2]);
        assert_eq!(a.values(), &[1.0, 1.5]);
    }

    #[test]
    fn validation_rejects_unsorted_columns() {
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn transpose_round_trips() {
        let a = CsrMatrix::from_triplets(3, 4, &[(0, 3, 1.0), (2, 0, -2.0), (1, 1, 4.0), (2, 3, 0.5)])
            .unwrap();
        let t = a.transpose();
        assert_eq!(t.to_dense(), a.to_dense().transpose());
        assert_eq!(t.transpose(), a);
    }
}
