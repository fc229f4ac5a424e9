//! Random sketching matrices `S ∈ ℝ^{m×n}` and the product `S·A`.
//!
//! Draw order from the seeded stream is fixed per family so that
//! [`sketch_apply`] and [`realize_dense`] see identical realizations:
//!
//! * Gaussian: `S` row by row, `n` draws per row, entries `N(0, 1/m)`.
//! * CountSketch: for each input row `i` in order, one `(bucket, sign)` pair.
//! * SJLT: for each input row `i`, for each of the `s` blocks of `m/s` rows,
//!   one `(bucket, sign)` pair; entries `±1/√s`.
//! * SRHT: `n` Rademacher signs, then `m` distinct rows of the padded
//!   Hadamard matrix; `S = √(n_pad/m)·P·H·D` with orthonormal `H`.

use crate::error::{Error, Result};
use crate::linalg::ops::axpy;
use crate::linalg::{DenseMatrix, Matrix};
use crate::rng::SeededRng;

const REALIZE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchKind {
    Gaussian,
    CountSketch,
    /// Sparse Johnson–Lindenstrauss transform with `s` nonzeros per column.
    Sjlt { s: usize },
    Srht,
    Identity,
}

impl SketchKind {
    pub fn name(&self) -> &'static str {
        match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::CountSketch => "countsketch",
            SketchKind::Sjlt { .. } => "sjlt",
            SketchKind::Srht => "srht",
            SketchKind::Identity => "identity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchSpec {
    pub kind: SketchKind,
    /// Sketch rows.
    pub m: usize,
    /// Input rows.
    pub n: usize,
    pub seed: u64,
}

impl SketchSpec {
    pub fn new(kind: SketchKind, m: usize, n: usize, seed: u64) -> Result<Self> {
        let spec = Self { kind, m, n, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            kind: SketchKind::Identity,
            m: n,
            n,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidArgument(
                "sketch needs m ≥ 1 and n ≥ 1".into(),
            ));
        }
        match self.kind {
            SketchKind::Sjlt { s } if s == 0 || self.m % s != 0 => Err(Error::InvalidArgument(
                format!("SJLT sparsity s = {s} must be ≥ 1 and divide m = {}", self.m),
            )),
            SketchKind::Srht if self.m > self.padded_rows() => Err(Error::InvalidArgument(
                format!(
                    "SRHT samples m = {} rows from only {} padded rows",
                    self.m,
                    self.padded_rows()
                ),
            )),
            SketchKind::Identity if self.m != self.n => Err(Error::InvalidArgument(format!(
                "identity sketch needs m = n (got m = {}, n = {})",
                self.m, self.n
            ))),
            _ => Ok(()),
        }
    }

    /// `n` rounded up to a power of two (SRHT only uses this).
    pub fn padded_rows(&self) -> usize {
        self.n.next_power_of_two()
    }

    /// Same family and seed at a new sketch size.
    pub fn with_m(&self, m: usize) -> Result<Self> {
        Self::new(self.kind, m, self.n, self.seed)
    }
}

/// `S·A` together with the spec that produced it.
#[derive(Debug, Clone)]
pub struct SketchedMatrix {
    pub product: DenseMatrix,
    pub spec: SketchSpec,
}

/// One CountSketch-style nonzero: `S[row, col] = value`.
struct Hash {
    row: usize,
    value: f64,
}

fn hashes(spec: &SketchSpec, rng: &mut SeededRng) -> Vec<Vec<Hash>> {
    let (per_col, block) = match spec.kind {
        SketchKind::CountSketch => (1, spec.m),
        SketchKind::Sjlt { s } => (s, spec.m / s),
        _ => unreachable!("hashes only for sparse families"),
    };
    let value = 1.0 / (per_col as f64).sqrt();
    (0..spec.n)
        .map(|_| {
            (0..per_col)
                .map(|b| {
                    let bucket = rng.index(block);
                    let sign = rng.sign();
                    Hash {
                        row: b * block + bucket,
                        value: sign * value,
                    }
                })
                .collect()
        })
        .collect()
}

struct SrhtDraw {
    signs: Vec<f64>,
    rows: Vec<usize>,
}

fn srht_draw(spec: &SketchSpec, rng: &mut SeededRng) -> SrhtDraw {
    let signs = (0..spec.n).map(|_| rng.sign()).collect();
    let rows = rng.sample_without_replacement(spec.padded_rows(), spec.m);
    SrhtDraw { signs, rows }
}

/// Computes `S·A` for the realized random `S`.
pub fn sketch_apply(spec: &SketchSpec, a: &Matrix) -> Result<SketchedMatrix> {
    spec.validate()?;
    if a.rows() != spec.n {
        return Err(Error::DimensionMismatch {
            context: "sketch_apply",
            expected: spec.n,
            actual: a.rows(),
        });
    }
    let d = a.cols();
    let mut rng = SeededRng::new(spec.seed);
    let product = match spec.kind {
        SketchKind::Identity => a.to_dense(),
        SketchKind::Gaussian => {
            let scale = 1.0 / (spec.m as f64).sqrt();
            let mut out = DenseMatrix::zeros(spec.m, d);
            let mut srow = vec![0.0; spec.n];
            for r in 0..spec.m {
                for v in srow.iter_mut() {
                    *v = rng.normal() * scale;
                }
                a.apply_transpose_into(&srow, out.row_mut(r));
            }
            out
        }
        SketchKind::CountSketch | SketchKind::Sjlt { .. } => {
            let h = hashes(spec, &mut rng);
            let mut out = DenseMatrix::zeros(spec.m, d);
            match a {
                Matrix::Dense(m) => {
                    for (i, hs) in h.iter().enumerate() {
                        for e in hs {
                            axpy(e.value, m.row(i), out.row_mut(e.row));
                        }
                    }
                }
                Matrix::Sparse(m) => {
                    for (i, hs) in h.iter().enumerate() {
                        let (idx, val) = m.row(i);
                        for e in hs {
                            let orow = out.row_mut(e.row);
                            for (&j, &v) in idx.iter().zip(val) {
                                orow[j] += e.value * v;
                            }
                        }
                    }
                }
            }
            out
        }
        SketchKind::Srht => {
            let draw = srht_draw(spec, &mut rng);
            let npad = spec.padded_rows();
            let dense = a.to_dense();
            let mut work = vec![0.0; npad * d];
            for i in 0..spec.n {
                let s = draw.signs[i];
                for (w, v) in work[i * d..(i + 1) * d].iter_mut().zip(dense.row(i)) {
                    *w = s * v;
                }
            }
            fwht_rows(&mut work, npad, d);
            let scale = 1.0 / (spec.m as f64).sqrt();
            let mut out = DenseMatrix::zeros(spec.m, d);
            for (r, &src) in draw.rows.iter().enumerate() {
                for (o, w) in out.row_mut(r).iter_mut().zip(&work[src * d..(src + 1) * d]) {
                    *o = w * scale;
                }
            }
            out
        }
    };
    Ok(SketchedMatrix {
        product,
        spec: *spec,
    })
}

/// Materializes `S` explicitly (test-scale only: `m·n ≤ 10⁶`).
pub fn realize_dense(spec: &SketchSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let size = spec.m.saturating_mul(spec.n);
    if size > REALIZE_LIMIT {
        return Err(Error::SizeGuard {
            what: "realized sketch",
            size,
            limit: REALIZE_LIMIT,
        });
    }
    let mut rng = SeededRng::new(spec.seed);
    let mut s = DenseMatrix::zeros(spec.m, spec.n);
    match spec.kind {
        SketchKind::Identity => s = DenseMatrix::identity(spec.n),
        SketchKind::Gaussian => {
            let scale = 1.0 / (spec.m as f64).sqrt();
            for r in 0..spec.m {
                for i in 0..spec.n {
                    s.set(r, i, rng.normal() * scale);
                }
            }
        }
        SketchKind::CountSketch | SketchKind::Sjlt { .. } => {
            for (i, hs) in hashes(spec, &mut rng).iter().enumerate() {
                for e in hs {
                    s.set(e.row, i, s.get(e.row, i) + e.value);
                }
            }
        }
        SketchKind::Srht => {
            let draw = srht_draw(spec, &mut rng);
            let scale = 1.0 / (spec.m as f64).sqrt();
            for (r, &src) in draw.rows.iter().enumerate() {
                for i in 0..spec.n {
                    s.set(r, i, scale * hadamard_entry(src, i) * draw.signs[i]);
                }
            }
        }
    }
    Ok(s)
}

/// Unnormalized Sylvester–Hadamard entry `(−1)^{popcount(i & j)}`.
#[inline]
pub fn hadamard_entry(i: usize, j: usize) -> f64 {
    if (i & j).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Orthonormal Hadamard matrix of order `n` (a power of two).
pub fn hadamard(n: usize) -> Result<DenseMatrix> {
    if !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "Hadamard order {n} is not a power of two"
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(DenseMatrix::from_fn(n, n, |i, j| scale * hadamard_entry(i, j)))
}

/// In-place unnormalized fast Walsh–Hadamard transform of a vector whose
/// length is a power of two.
pub fn fwht(x: &mut [f64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (x[i], x[i + h]);
                x[i] = a + b;
                x[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Transforms along the row index of a row-major `n × d` block.
fn fwht_rows(work: &mut [f64], n: usize, d: usize) {
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let (top, bottom) = work.split_at_mut((i + h) * d);
                let a = &mut top[i * d..(i + 1) * d];
                let b = &mut bottom[..d];
                for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                    let (u, v) = (*x, *y);
                    *x = u + v;
                    *y = u - v;
                }
            }
        }
        h *= 2;
    }
}
