use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ridgepath::data::{gen_synthetic, kernel_dataset, parse_libsvm, rescale_features, split_half, Dataset, Provenance};
use ridgepath::{DenseMatrix, Error, Matrix, Result};

/// `n=200,d=50,alpha=0.99,sigma=0.02,seed=7`
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub seed: u64,
}

fn pairs(s: &str) -> std::result::Result<Vec<(&str, &str)>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| format!("expected key=value, got '{p}'"))
        })
        .collect()
}

fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("bad value for {key}: '{v}'"))
}

impl FromStr for SyntheticSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut spec = SyntheticSpec {
            n: 0,
            d: 0,
            alpha: 0.99,
            sigma: 0.0,
            seed: 0,
        };
        for (k, v) in pairs(s)? {
            match k {
                "n" => spec.n = num(k, v)?,
                "d" => spec.d = num(k, v)?,
                "alpha" => spec.alpha = num(k, v)?,
                "sigma" => spec.sigma = num(k, v)?,
                "seed" => spec.seed = num(k, v)?,
                other => return Err(format!("unknown synthetic key '{other}'")),
            }
        }
        if spec.n == 0 || spec.d == 0 {
            return Err("synthetic spec needs n and d".into());
        }
        Ok(spec)
    }
}

/// `file=PATH,h=1000`: Gaussian kernel over the feature rows of a LIBSVM file.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub file: PathBuf,
    pub h: f64,
}

impl FromStr for KernelSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut file = None;
        let mut h = 1000.0;
        for (k, v) in pairs(s)? {
            match k {
                "file" => file = Some(PathBuf::from(v)),
                "h" => h = num(k, v)?,
                other => return Err(format!("unknown kernel key '{other}'")),
            }
        }
        Ok(KernelSpec {
            file: file.ok_or("kernel spec needs file=PATH")?,
            h,
        })
    }
}

pub fn read_libsvm(path: &Path, cols: Option<usize>) -> Result<(Matrix, Vec<f64>)> {
    let (m, y) = parse_libsvm(BufReader::new(File::open(path)?), cols)?;
    Ok((Matrix::Sparse(m), y))
}

pub struct Source<'a> {
    pub data: Option<&'a Path>,
    pub test_data: Option<&'a Path>,
    pub synthetic: Option<&'a SyntheticSpec>,
    pub kernel: Option<&'a KernelSpec>,
    pub split: bool,
    pub rescale: bool,
    pub seed: u64,
}

pub fn load(src: &Source) -> Result<Dataset> {
    let mut ds = if let Some(spec) = src.synthetic {
        gen_synthetic(spec.n, spec.d, spec.alpha, spec.sigma, spec.seed)?
    } else if let Some(k) = src.kernel {
        let (m, y) = read_libsvm(&k.file, None)?;
        let m = if src.rescale { rescale_features(&m)? } else { m };
        let points = Dataset::new(m, y, None, Provenance::File(k.file.clone()))?;
        let points = split_half(&points, src.seed)?;
        let (ft, yt) = points.test().expect("split has a test set");
        return kernel_dataset(
            &points.a_train.to_dense(),
            points.b_train.clone(),
            Some((&ft.to_dense(), yt.to_vec())),
            k.h,
        );
    } else if let Some(path) = src.data {
        let (m, y) = read_libsvm(path, None)?;
        let test = match src.test_data {
            Some(tp) => Some(read_libsvm(tp, Some(m.cols()))?),
            None => None,
        };
        Dataset::new(m, y, test, Provenance::File(path.to_path_buf()))?
    } else {
        return Err(Error::InvalidArgument("no data source given".into()));
    };
    if src.rescale {
        ds.a_train = rescale_features(&ds.a_train)?;
        if let Some(at) = ds.a_test.take() {
            ds.a_test = Some(rescale_features(&at)?);
        }
    }
    if src.split {
        ds = split_half(&ds, src.seed)?;
    }
    Ok(ds)
}

/// Whitespace-separated rows, one line per row; blank lines and `#` lines skipped.
pub fn read_text_matrix(path: &Path) -> Result<DenseMatrix> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let row = body
            .split_whitespace()
            .enumerate()
            .map(|(c, t)| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    column: c + 1,
                    message: format!("bad number '{t}'"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows)
}
