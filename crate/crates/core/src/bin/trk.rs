use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trk_core::benchmarks::Benchmark;
use trk_core::model::{Dataset, RegressionBasis, Theta};
use trk_core::objective::{hessian_spectrum, likelihood_gradient, likelihood_hessian, profiled_log_likelihood, PenaltyKind, PenaltySpec};
use trk_core::optimizer::{FitOptions, Optimizer};
use trk_core::runner::{self, ExperimentConfig, SweepRequest, SweepRow};
use trk_core::sampling::lhs;
use trk_core::tuner::{gscv, GscvConfig};
use trk_core::{Result, TrkError};

#[derive(Parser)]
#[command(name = "trk", version, about = "Theta-regularized Kriging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Latin Hypercube design, optionally evaluated on a benchmark
    Sample(SampleArgs),
    /// Fit one model and save it as JSON
    Fit(FitArgs),
    /// Predict with a saved model
    Predict(PredictArgs),
    /// Select a penalty coefficient by cross-validation
    Tune(TuneArgs),
    /// Run an experiment described by a TOML file
    Bench(BenchArgs),
    /// Likelihood gradient, Hessian and spectrum at a fixed theta
    Diag(DiagArgs),
    /// Test error over a grid of penalty coefficients
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    /// Input dimension; taken from the benchmark when one is given
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct FitFlags {
    #[arg(long, default_value = "linear")]
    basis: RegressionBasis,
    #[arg(long, default_value = "none")]
    penalty: PenaltyKind,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// One value, or one per dimension, comma separated
    #[arg(long, value_delimiter = ',')]
    theta_init: Option<Vec<f64>>,
    /// `low,high`
    #[arg(long, value_delimiter = ',', num_args = 2)]
    theta_bounds: Option<Vec<f64>>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
}

impl FitFlags {
    fn options(&self) -> FitOptions {
        let mut o = FitOptions::default();
        if let Some(t) = &self.theta_init {
            o.theta_init = t.clone();
        }
        if let Some(b) = &self.theta_bounds {
            o.theta_bounds = (b[0], b[1]);
        }
        if let Some(m) = self.max_iters {
            o.max_iters = m;
        }
        if let Some(e) = self.epsilon {
            o.epsilon = e;
        }
        o
    }

    fn spec(&self) -> Result<PenaltySpec> {
        let coefficient = match self.penalty {
            PenaltyKind::None => Some(0.0),
            PenaltyKind::Lasso => self.lambda,
            PenaltyKind::Ridge => self.mu,
            PenaltyKind::ElasticNet => self.gamma,
        };
        let coefficient = coefficient.ok_or_else(|| {
            TrkError::InvalidArgument(format!("the {} penalty needs its coefficient flag", self.penalty))
        })?;
        let spec = PenaltySpec::from_kind(self.penalty, coefficient, self.alpha);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    flags: FitFlags,
    /// `pattern` or `box`
    #[arg(long, default_value = "pattern")]
    optimizer: Optimizer,
    /// Model document path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optimizer trace CSV
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    points: PathBuf,
    /// Also report the predictive mean squared error
    #[arg(long)]
    mse: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    flags: FitFlags,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1e-5)]
    a0: f64,
    #[arg(long, default_value_t = 10f64.sqrt())]
    q: f64,
    #[arg(long, default_value_t = 20)]
    n_terms: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha_step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Candidate scores CSV; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Report directory
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args)]
struct DiagArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "linear")]
    basis: RegressionBasis,
    /// One value, or one per dimension, comma separated
    #[arg(long, value_delimiter = ',', default_value = "10")]
    theta: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    benchmark: Benchmark,
    #[arg(long, default_value_t = 60)]
    n_train: usize,
    #[arg(long, default_value_t = 1000)]
    n_test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "linear")]
    basis: RegressionBasis,
    #[arg(long, default_value = "ridge")]
    penalty: PenaltyKind,
    #[arg(long, value_delimiter = ',', default_value = "0,1e-5,1e-4,1e-3,1e-2,1e-1,1,10,100,1000,10000,100000")]
    coefficients: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    theta_init: Option<Vec<f64>>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_dataset(path: &PathBuf) -> Result<Dataset> {
    let (x, y) = runner::read_dataset(path)?;
    Dataset::new(x, y)
}

fn sample(a: SampleArgs) -> Result<()> {
    let out = output(&a.out)?;
    match &a.benchmark {
        Some(name) => {
            let bench: Benchmark = name.parse()?;
            if let Some(d) = a.dim.filter(|d| *d != bench.dim()) {
                return Err(TrkError::DimensionMismatch { expected: bench.dim(), actual: d });
            }
            let x = bench.sample_inputs(a.n, a.seed)?;
            let y = (0..a.n)
                .map(|i| bench.eval(&x.row(i).iter().copied().collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            runner::write_points(out, &x, Some(&y))
        }
        None => {
            let dim = a.dim.ok_or_else(|| TrkError::InvalidArgument("give --dim or --benchmark".into()))?;
            runner::write_points(out, &lhs(a.n, dim, a.seed), None)
        }
    }
}

fn fit(a: FitArgs) -> Result<()> {
    let data = load_dataset(&a.data)?;
    let fit = a.optimizer.fit(&data, a.flags.basis, &a.flags.spec()?, &a.flags.options())?;
    log::info!(
        "theta = {:?}, objective = {:e}, {} after {} iterations",
        fit.model.theta().values(),
        fit.objective,
        fit.termination.name(),
        fit.iterations()
    );
    if let Some(path) = &a.trace {
        fit.write_trace(BufWriter::new(File::create(path)?))?;
    }
    let mut out = output(&a.out)?;
    writeln!(out, "{}", runner::save_model(&fit.model)?)?;
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = runner::load_model(&std::fs::read_to_string(&a.model)?)?;
    let (x, _) = runner::read_points(&a.points)?;
    let mut w = csv::Writer::from_writer(output(&a.out)?);
    if a.mse {
        w.write_record(["prediction", "mse"])?;
    } else {
        w.write_record(["prediction"])?;
    }
    for i in 0..x.nrows() {
        let row: Vec<f64> = x.row(i).iter().copied().collect();
        let mut rec = vec![model.predict(&row)?.to_string()];
        if a.mse {
            rec.push(model.predict_mse(&row)?.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn tune(a: TuneArgs) -> Result<()> {
    let data = load_dataset(&a.data)?;
    let cfg = GscvConfig { k: a.k, a0: a.a0, q: a.q, n_terms: a.n_terms, alpha_step: a.alpha_step, seed: a.seed };
    let res = gscv(&data, a.flags.basis, a.flags.penalty, &cfg, &a.flags.options())?;
    res.write_csv(output(&a.out)?)?;
    let alpha = if res.best.kind == PenaltyKind::ElasticNet { format!(",alpha={}", res.best.alpha) } else { String::new() };
    eprintln!(
        "selected penalty={},coefficient={}{alpha},cv_score={},ties_broken={}",
        res.best.kind,
        res.best.coefficient(),
        res.best_score,
        res.ties_broken
    );
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let cfg = ExperimentConfig::from_file(&a.config)?;
    let report = runner::run_experiment(&cfg)?;
    runner::emit_report(&report, &a.out)?;
    for r in report.aggregates.iter().filter(|r| r.is_best) {
        eprintln!("best {}: {} ({} +/- {})", r.metric, r.model, r.mean, r.std);
    }
    Ok(())
}

fn diag(a: DiagArgs) -> Result<()> {
    let data = load_dataset(&a.data)?;
    let values = if a.theta.len() == 1 { vec![a.theta[0]; data.dim()] } else { a.theta.clone() };
    let bounds = values.iter().fold((f64::INFINITY, 0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let theta = Theta::new(values, bounds)?;
    let g = likelihood_gradient(&data, a.basis, &theta)?;
    let h = likelihood_hessian(&data, a.basis, &theta)?;
    let spectrum = hessian_spectrum(&data, a.basis, &theta)?;
    let mut w = csv::Writer::from_writer(output(&a.out)?);
    w.write_record(["kind", "i", "j", "value"])?;
    let ll = profiled_log_likelihood(&data, a.basis, &theta)?;
    w.write_record(["log_likelihood", "", "", &ll.to_string()])?;
    for (i, v) in g.iter().enumerate() {
        w.write_record(["gradient", &(i + 1).to_string(), "", &v.to_string()])?;
    }
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            w.write_record(["hessian", &(i + 1).to_string(), &(j + 1).to_string(), &h[(i, j)].to_string()])?;
        }
    }
    for (i, v) in spectrum.singular_values.iter().enumerate() {
        w.write_record(["singular_value", &(i + 1).to_string(), "", &v.to_string()])?;
    }
    w.write_record(["condition_ratio", "", "", &spectrum.condition_ratio.to_string()])?;
    w.flush()?;
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut fit = FitOptions::default();
    if let Some(t) = a.theta_init {
        fit.theta_init = t;
    }
    if let Some(m) = a.max_iters {
        fit.max_iters = m;
    }
    let req = SweepRequest {
        benchmark: a.benchmark,
        n_train: a.n_train,
        n_test: a.n_test,
        seed: a.seed,
        basis: a.basis,
        kind: a.penalty,
        coefficients: a.coefficients,
        alphas: a.alphas,
        fit,
    };
    let rows = runner::sensitivity_sweep(&req)?;
    SweepRow::write_csv(&rows, output(&a.out)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => sample(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Tune(a) => tune(a),
        Command::Bench(a) => bench(a),
        Command::Diag(a) => diag(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
