//! Datasets: LIBSVM files, synthetic generation, Gaussian kernels and
//! preprocessing.

mod kernel;
mod libsvm;
mod synthetic;
mod transform;

use std::path::PathBuf;

pub use kernel::{gaussian_kernel, kernel_dataset, read_dense_binary, write_dense_binary};
pub use libsvm::{parse_libsvm, write_libsvm};
pub use synthetic::{ar_covariance_apply, gen_synthetic};
pub use transform::{rescale_features, split_half};

use crate::error::{check_len, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    File(PathBuf),
    Synthetic {
        n: usize,
        d: usize,
        alpha: f64,
        sigma: f64,
        seed: u64,
    },
    Kernel {
        bandwidth: f64,
    },
    Split {
        seed: u64,
    },
    InMemory,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub a_train: Matrix,
    pub b_train: Vec<f64>,
    pub a_test: Option<Matrix>,
    pub b_test: Option<Vec<f64>>,
    pub provenance: Provenance,
    /// Generating coefficients, when known.
    pub truth: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(a_train: Matrix, b_train: Vec<f64>, test: Option<(Matrix, Vec<f64>)>, provenance: Provenance) -> Result<Self> {
        check_len("Dataset labels", a_train.rows(), b_train.len())?;
        let (a_test, b_test) = match test {
            Some((at, bt)) => {
                check_len("Dataset test labels", at.rows(), bt.len())?;
                check_len("Dataset test features", a_train.cols(), at.cols())?;
                (Some(at), Some(bt))
            }
            None => (None, None),
        };
        Ok(Self {
            a_train,
            b_train,
            a_test,
            b_test,
            provenance,
            truth: None,
        })
    }

    pub fn feature_count(&self) -> usize {
        self.a_train.cols()
    }

    pub fn test(&self) -> Option<(&Matrix, &[f64])> {
        match (&self.a_test, &self.b_test) {
            (Some(a), Some(b)) => Some((a, b.as_slice())),
            _ => None,
        }
    }
}
