mod input;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ridgepath::adaptive::adaptive_sketch_dim;
use ridgepath::data::{gaussian_kernel, write_dense_binary, write_libsvm, Dataset};
use ridgepath::linalg::thin_svd;
use ridgepath::path::MatrixPathResult;
use ridgepath::report::{write_csv, write_summary, CSV_HEADER};
use ridgepath::spectrum::{effective_dimension, GridKind};
use ridgepath::{
    direct_path, dual_path, gd_bin_path, ihs_bin_path, ihs_bin_path_matrix, svd_path, warm_cg_path, warm_ihs_path,
    AdaptiveConfig, CsrMatrix, Error, IhsBinOptions, IntervalCount, Matrix, PathConfig, RegPathResult, RhoBounds,
    SketchKind, SketchSpec,
};

use input::{KernelSpec, Source, SyntheticSpec};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(Error),
    #[error("solver error: {0}")]
    Solver(Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Solver(_) => 4,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn data_err(e: impl Into<Error>) -> CliError {
    CliError::Data(e.into())
}

fn solver_err(e: Error) -> CliError {
    CliError::Solver(e)
}

/// Ridge regularization paths from a sketched binomial basis.
#[derive(Debug, Parser)]
#[command(name = "ridgepath", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve over a lambda grid with one solver and write CSV.
    Path(PathArgs),
    /// Run several solvers on one dataset; one CSV per solver plus a timing summary.
    Bench(BenchArgs),
    /// Estimate a sketch dimension by adaptive doubling.
    SketchDim(SketchDimArgs),
    /// Write a synthetic dataset as LIBSVM text.
    GenData(GenDataArgs),
    /// Write Gaussian kernel blocks in dense binary form.
    Kernel(KernelArgs),
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
struct SourceArgs {
    /// LIBSVM training file.
    #[arg(long, group = "source")]
    data: Option<PathBuf>,
    /// Synthetic data, e.g. n=200,d=50,alpha=0.99,sigma=0.02,seed=7.
    #[arg(long, group = "source")]
    gen_synthetic: Option<SyntheticSpec>,
    /// Gaussian kernel over LIBSVM points, e.g. file=points.svm,h=1000.
    #[arg(long, group = "source")]
    kernel: Option<KernelSpec>,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// LIBSVM test file for --data.
    #[arg(long, requires = "data")]
    test_data: Option<PathBuf>,
    /// Split the training rows in half at random (seeded by --seed).
    #[arg(long)]
    split_half: bool,
    /// Scale features so the largest magnitude is one.
    #[arg(long)]
    rescale: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DataArgs {
    fn load(&self) -> CliResult<Dataset> {
        input::load(&Source {
            data: self.source.data.as_deref(),
            test_data: self.test_data.as_deref(),
            synthetic: self.source.gen_synthetic.as_ref(),
            kernel: self.source.kernel.as_ref(),
            split: self.split_half,
            rescale: self.rescale,
            seed: self.seed,
        })
        .map_err(data_err)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Grid {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    IhsBin,
    GdBin,
    Svd,
    Direct,
    Cg,
    Ihs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sketch {
    Gaussian,
    Countsketch,
    Sjlt,
    Srht,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dual {
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Intervals(IntervalCount);

impl std::str::FromStr for Intervals {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Intervals(IntervalCount::Auto));
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Intervals(IntervalCount::Fixed(n))),
            _ => Err(format!("expected a positive integer or 'auto', got '{s}'")),
        }
    }
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    lambda_min: f64,
    #[arg(long)]
    lambda_max: f64,
    #[arg(long, default_value_t = 25)]
    num_lambdas: usize,
    #[arg(long, value_enum, default_value_t = Grid::Log)]
    grid: Grid,
    /// Target accuracy of the binomial bases.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Interval count, or `auto` for floor(2 ln(lambda_max/lambda_min)).
    #[arg(long, default_value = "auto")]
    intervals: Intervals,
}

impl GridArgs {
    fn config(&self) -> CliResult<PathConfig> {
        let kind = match self.grid {
            Grid::Log => GridKind::Log,
            Grid::Linear => GridKind::Linear,
        };
        PathConfig::grid(self.lambda_min, self.lambda_max, self.num_lambdas, kind, self.eps)
            .map(|c| c.with_intervals(self.intervals.0))
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
struct SketchArgs {
    #[arg(long, value_enum, default_value_t = Sketch::Sjlt)]
    sketch: Sketch,
    /// Sketch rows; estimated adaptively when omitted.
    #[arg(long)]
    sketch_dim: Option<usize>,
    /// Nonzeros per column for SJLT.
    #[arg(long, default_value_t = 1)]
    sjlt_s: usize,
    #[arg(long, requires = "rho2", conflicts_with = "rho_auto")]
    rho1: Option<f64>,
    #[arg(long, requires = "rho1", conflicts_with = "rho_auto")]
    rho2: Option<f64>,
    /// Measure the preconditioned spectrum instead of taking bounds (default).
    #[arg(long)]
    rho_auto: bool,
    /// Smallest singular value of the data matrix; shifts both interval endpoints by its square.
    #[arg(long)]
    sigma_d: Option<f64>,
}

impl SketchArgs {
    fn kind(&self) -> SketchKind {
        match self.sketch {
            Sketch::Gaussian => SketchKind::Gaussian,
            Sketch::Countsketch => SketchKind::CountSketch,
            Sketch::Sjlt => SketchKind::Sjlt { s: self.sjlt_s },
            Sketch::Srht => SketchKind::Srht,
            Sketch::Identity => SketchKind::Identity,
        }
    }

    /// `a` is the matrix whose rows get sketched; `b` feeds the adaptive estimate.
    fn options(&self, a: &Matrix, b: Option<&[f64]>, lambda_min: f64, seed: u64) -> CliResult<IhsBinOptions> {
        let n = a.rows();
        let spec = match self.kind() {
            SketchKind::Identity => SketchSpec::identity(n),
            kind => {
                let m = match (self.sketch_dim, b) {
                    (Some(m), _) => m,
                    (None, Some(b)) => {
                        let template = SketchSpec::new(kind, 1.max(self.sjlt_s), n, seed)
                            .map_err(|e| CliError::Usage(e.to_string()))?;
                        let cfg = AdaptiveConfig::for_dim(a.cols());
                        adaptive_sketch_dim(a, b, lambda_min, &cfg, &template)
                            .map_err(solver_err)?
                            .m
                    }
                    (None, None) => {
                        return Err(CliError::Usage("--sketch-dim is required for this run".into()));
                    }
                };
                SketchSpec::new(kind, m, n, seed).map_err(|e| CliError::Usage(e.to_string()))?
            }
        };
        let mut opts = IhsBinOptions::new(spec);
        if let (Some(r1), Some(r2)) = (self.rho1, self.rho2) {
            opts = opts.with_rho(RhoBounds::manual(r1, r2).map_err(|e| CliError::Usage(e.to_string()))?);
        }
        if let Some(s) = self.sigma_d {
            opts = opts.with_sigma_d(s);
        }
        Ok(opts)
    }
}

#[derive(Debug, Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Solver::IhsBin)]
    solver: Solver,
    #[command(flatten)]
    sketch: SketchArgs,
    /// Whitespace-separated right-hand sides, one row per training row.
    #[arg(long)]
    matrix_rhs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Dual::Auto)]
    dual: Dual,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave time_s empty so identical runs give identical files.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![Solver::IhsBin, Solver::Svd, Solver::Direct, Solver::Cg, Solver::Ihs])]
    solvers: Vec<Solver>,
    #[command(flatten)]
    sketch: SketchArgs,
    /// Directory for `<solver>.csv` and `summary.csv`.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Debug, Args)]
struct SketchDimArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    lambda_min: f64,
    #[arg(long)]
    lambda_max: f64,
    #[arg(long, value_enum, default_value_t = Sketch::Sjlt)]
    sketch: Sketch,
    #[arg(long, default_value_t = 1)]
    sjlt_s: usize,
    #[arg(long)]
    m_initial: Option<usize>,
    #[arg(long)]
    m_cap: Option<usize>,
    /// Stopping threshold on the Newton decrement.
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    #[arg(long)]
    gen_synthetic: SyntheticSpec,
    /// Training rows in LIBSVM format.
    #[arg(long)]
    out: PathBuf,
    /// Test rows in LIBSVM format.
    #[arg(long)]
    test_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Kernel bandwidth h.
    #[arg(long, default_value_t = 1000.0)]
    bandwidth: f64,
    /// Train-by-train block.
    #[arg(long)]
    out: PathBuf,
    /// Test-by-train block, written when a test set exists.
    #[arg(long)]
    test_out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(data_err)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_solver(
    solver: Solver,
    ds: &Dataset,
    cfg: &PathConfig,
    sketch: &SketchArgs,
    dual: Dual,
    seed: u64,
) -> CliResult<RegPathResult> {
    let (a, b) = (&ds.a_train, ds.b_train.as_slice());
    let use_dual = match dual {
        Dual::Auto => a.rows() < a.cols(),
        Dual::Primal => false,
        Dual::Dual => true,
    };
    let mut result = match solver {
        Solver::IhsBin if use_dual => {
            let at = a.transpose();
            let opts = sketch.options(&at, None, cfg.lambda_min, seed)?;
            dual_path(a, b, cfg, &opts)
        }
        Solver::IhsBin => ihs_bin_path(a, b, cfg, &sketch.options(a, Some(b), cfg.lambda_min, seed)?),
        Solver::Ihs => warm_ihs_path(a, b, cfg, &sketch.options(a, Some(b), cfg.lambda_min, seed)?),
        Solver::GdBin => gd_bin_path(a, b, cfg),
        Solver::Svd => svd_path(a, b, cfg),
        Solver::Direct => direct_path(a, b, cfg),
        Solver::Cg => warm_cg_path(a, b, cfg),
    }
    .map_err(solver_err)?;
    if let Some((at, bt)) = ds.test() {
        result.attach_test_losses(at, bt).map_err(solver_err)?;
    }
    Ok(result)
}

fn write_matrix_csv<W: Write>(mut w: W, r: &MatrixPathResult, omit_timing: bool) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for p in &r.points {
        let time = if omit_timing { String::new() } else { format!("{:.16e}", p.time_s) };
        writeln!(w, "{:.16e},{:.16e},,{time},ihs-bin", p.lambda, p.train_loss)?;
    }
    Ok(())
}

fn cmd_path(args: &PathArgs) -> CliResult<()> {
    let cfg = args.grid.config()?;
    let ds = args.data.load()?;
    let seed = args.data.seed;
    if let Some(rhs) = &args.matrix_rhs {
        if args.solver != Solver::IhsBin {
            return Err(CliError::Usage("--matrix-rhs needs --solver ihs-bin".into()));
        }
        let b = input::read_text_matrix(rhs).map_err(data_err)?;
        if b.rows() != ds.a_train.rows() {
            return Err(data_err(Error::DimensionMismatch {
                context: "--matrix-rhs rows",
                expected: ds.a_train.rows(),
                actual: b.rows(),
            }));
        }
        let first = b.column(0);
        let opts = args.sketch.options(&ds.a_train, Some(&first), cfg.lambda_min, seed)?;
        let r = ihs_bin_path_matrix(&ds.a_train, &b, &cfg, &opts).map_err(solver_err)?;
        let mut w = output(args.out.as_deref())?;
        write_matrix_csv(&mut w, &r, args.omit_timing).map_err(data_err)?;
        return w.flush().map_err(data_err);
    }
    let r = run_solver(args.solver, &ds, &cfg, &args.sketch, args.dual, seed)?;
    let mut w = output(args.out.as_deref())?;
    write_csv(&mut w, &[&r], args.omit_timing).map_err(data_err)?;
    w.flush().map_err(data_err)
}

fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    let cfg = args.grid.config()?;
    let ds = args.data.load()?;
    fs::create_dir_all(&args.out_dir).map_err(data_err)?;
    let mut results = Vec::new();
    for &solver in &args.solvers {
        let start = Instant::now();
        let r = run_solver(solver, &ds, &cfg, &args.sketch, Dual::Auto, args.data.seed)?;
        eprintln!("{}: {:.3} s", r.solver.name(), start.elapsed().as_secs_f64());
        let path = args.out_dir.join(format!("{}.csv", r.solver.name()));
        let mut w = BufWriter::new(File::create(path).map_err(data_err)?);
        write_csv(&mut w, &[&r], args.omit_timing).map_err(data_err)?;
        w.flush().map_err(data_err)?;
        results.push(r);
    }
    let refs: Vec<&RegPathResult> = results.iter().collect();
    let mut summary = BufWriter::new(File::create(args.out_dir.join("summary.csv")).map_err(data_err)?);
    write_summary(&mut summary, &refs).map_err(data_err)?;
    summary.flush().map_err(data_err)?;
    write_summary(io::stdout().lock(), &refs).map_err(data_err)
}

fn cmd_sketch_dim(args: &SketchDimArgs) -> CliResult<()> {
    if !(args.lambda_min > 0.0 && args.lambda_min <= args.lambda_max) {
        return Err(CliError::Usage("need 0 < --lambda-min ≤ --lambda-max".into()));
    }
    let ds = args.data.load()?;
    let (a, b) = (&ds.a_train, ds.b_train.as_slice());
    let d = a.cols();
    let mut cfg = AdaptiveConfig::for_dim(d);
    cfg.epsilon = args.eps;
    cfg.max_iterations = args.max_iterations;
    if let Some(m) = args.m_initial {
        cfg.m_initial = m;
    }
    if let Some(m) = args.m_cap {
        cfg.m_cap = m;
    }
    let template = SketchArgs {
        sketch: args.sketch,
        sketch_dim: None,
        sjlt_s: args.sjlt_s,
        rho1: None,
        rho2: None,
        rho_auto: true,
        sigma_d: None,
    };
    let template = match template.kind() {
        SketchKind::Identity => SketchSpec::identity(a.rows()),
        kind => SketchSpec::new(kind, cfg.m_initial.max(args.sjlt_s), a.rows(), args.data.seed)
            .map_err(|e| CliError::Usage(e.to_string()))?,
    };
    let res = adaptive_sketch_dim(a, b, args.lambda_min, &cfg, &template).map_err(solver_err)?;
    let mut out = io::stdout().lock();
    let p = |e: io::Error| data_err(e);
    writeln!(out, "m {}", res.m).map_err(p)?;
    writeln!(out, "iterations {}", res.iterations).map_err(p)?;
    writeln!(out, "doublings {}", res.doublings).map_err(p)?;
    writeln!(out, "saturated {}", res.saturated).map_err(p)?;
    if d <= 2048 {
        let lambda0 = (args.lambda_min * args.lambda_max).sqrt();
        let svd = thin_svd(&a.to_dense()).map_err(solver_err)?;
        let de = effective_dimension(&svd.sigma, lambda0).map_err(solver_err)?;
        writeln!(out, "effective_dimension {de:.6} at lambda0 {lambda0:.6e}").map_err(p)?;
    }
    Ok(())
}

fn cmd_gen_data(args: &GenDataArgs) -> CliResult<()> {
    let s = &args.gen_synthetic;
    let ds = ridgepath::gen_synthetic(s.n, s.d, s.alpha, s.sigma, s.seed).map_err(data_err)?;
    let write = |path: &Path, a: &Matrix, y: &[f64]| -> CliResult<()> {
        let csr = CsrMatrix::from_dense(&a.to_dense());
        let mut w = BufWriter::new(File::create(path).map_err(data_err)?);
        write_libsvm(&mut w, &csr, y).map_err(data_err)?;
        w.flush().map_err(data_err)
    };
    write(&args.out, &ds.a_train, &ds.b_train)?;
    if let (Some(path), Some((at, bt))) = (&args.test_out, ds.test()) {
        write(path, at, bt)?;
    }
    Ok(())
}

fn cmd_kernel(args: &KernelArgs) -> CliResult<()> {
    let ds = args.data.load()?;
    let test = ds.a_test.as_ref().map(Matrix::to_dense);
    let (k, kt) = gaussian_kernel(&ds.a_train.to_dense(), test.as_ref(), args.bandwidth).map_err(data_err)?;
    let write = |path: &Path, m: &ridgepath::DenseMatrix| -> CliResult<()> {
        let mut w = BufWriter::new(File::create(path).map_err(data_err)?);
        write_dense_binary(&mut w, m).map_err(data_err)?;
        w.flush().map_err(data_err)
    };
    write(&args.out, &k)?;
    if let (Some(path), Some(kt)) = (&args.test_out, kt) {
        write(path, &kt)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Path(a) => cmd_path(a),
        Command::Bench(a) => cmd_bench(a),
        Command::SketchDim(a) => cmd_sketch_dim(a),
        Command::GenData(a) => cmd_gen_data(a),
        Command::Kernel(a) => cmd_kernel(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ridgepath: {e}");
            ExitCode::from(e.code())
        }
    }
}
