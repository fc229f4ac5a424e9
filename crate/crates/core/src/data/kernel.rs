use std::io::{Read, Write};

use crate::data::{Dataset, Provenance};
use crate::error::{check_len, Error, Result};
use crate::linalg::{DenseMatrix, Matrix};

const MAGIC: &[u8; 4] = b"RPKB";

/// `k(x, y) = (2πh)^{−p/2} exp(−‖x − y‖²/(2h))` for `p`-dimensional points
/// given as matrix rows. Returns the train block and, if given, test × train.
pub fn gaussian_kernel(
    train: &DenseMatrix,
    test: Option<&DenseMatrix>,
    h: f64,
) -> Result<(DenseMatrix, Option<DenseMatrix>)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("bandwidth h = {h} must be positive")));
    }
    if let Some(t) = test {
        check_len("gaussian_kernel point dimension", train.cols(), t.cols())?;
    }
    let p = train.cols() as f64;
    let norm = (2.0 * std::f64::consts::PI * h).powf(-p / 2.0);
    let k = |x: &[f64], y: &[f64]| {
        let dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        norm * (-dist / (2.0 * h)).exp()
    };
    let n = train.rows();
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = k(train.row(i), train.row(j));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let at = test.map(|t| DenseMatrix::from_fn(t.rows(), n, |i, j| k(t.row(i), train.row(j))));
    Ok((a, at))
}

pub fn kernel_dataset(
    train: &DenseMatrix,
    y_train: Vec<f64>,
    test: Option<(&DenseMatrix, Vec<f64>)>,
    h: f64,
) -> Result<Dataset> {
    let (a, at) = gaussian_kernel(train, test.as_ref().map(|t| t.0), h)?;
    let test = match (at, test) {
        (Some(at), Some((_, yt))) => Some((Matrix::Dense(at), yt)),
        _ => None,
    };
    Dataset::new(Matrix::Dense(a), y_train, test, Provenance::Kernel { bandwidth: h })
}

/// Little-endian `RPKB`, rows and cols as `u64`, then row-major `f64` entries.
pub fn write_dense_binary<W: Write>(mut w: W, m: &DenseMatrix) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dense_binary<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidArgument("not a dense kernel block".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let mut data = Vec::with_capacity(rows.saturating_mul(cols));
    for _ in 0..rows * cols {
        r.read_exact(&mut word)?;
        data.push(f64::from_le_bytes(word));
    }
    DenseMatrix::new(rows, cols, data)
}
