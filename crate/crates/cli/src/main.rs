use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gaussrisk::data::{gen_gaussian_with_outliers, parse_libsvm, write_libsvm};
use gaussrisk::harness::{
    self, emit_trace, read_model, read_moments, run_experiment, train_model, write_model,
    write_moments, write_report, DataSource, Normalization,
};
use gaussrisk::metrics::evaluate;
use gaussrisk::{
    ClassMoments64, Dataset64, ExperimentConfig, GaussianSpec64, LineSearchConfig64, Method,
    MomentSource,
};

/// Linear classifiers trained on closed-form Gaussian risk, with baselines.
#[derive(Parser)]
#[command(name = "gaussrisk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a two-Gaussian dataset; writes LIBSVM data and a moments sidecar.
    Gen(GenArgs),
    /// Fit one method on one dataset.
    Train(TrainArgs),
    /// Score a saved model on a dataset.
    Eval(EvalArgs),
    /// Repeated k-fold cross-validation of one method.
    Cv(CvArgs),
    /// Cross-validate several methods on the same data and splits.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct SpecArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    prior_pos: f64,
    #[arg(long, default_value_t = 0.0)]
    outlier_pct: f64,
    #[arg(long, default_value_t = 1.0)]
    mean_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    cov_scale: f64,
}

impl SpecArgs {
    fn spec(&self, seed: u64) -> GaussianSpec64 {
        GaussianSpec64 {
            d: self.d,
            n: self.n,
            prior_pos: self.prior_pos,
            outlier_pct: self.outlier_pct,
            seed,
            mean_scale: self.mean_scale,
            cov_scale: self.cov_scale,
        }
    }
}

#[derive(Args, Clone)]
struct OptimizerArgs {
    #[arg(long, default_value_t = 1e-4)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha0: f64,
    #[arg(long, default_value_t = 250)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    grad_tol_rel: f64,
    #[arg(long, default_value_t = 60)]
    max_backtracks: usize,
}

impl OptimizerArgs {
    fn config(&self) -> LineSearchConfig64 {
        LineSearchConfig64 {
            c: self.c,
            beta: self.beta,
            alpha0: self.alpha0,
            max_iters: self.max_iters,
            grad_tol_rel: self.grad_tol_rel,
            max_backtracks: self.max_backtracks,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// LIBSVM output; labels include the injected outliers.
    #[arg(long)]
    out: PathBuf,
    /// Generator moments sidecar.
    #[arg(long)]
    moments: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    method: Method,
    /// LIBSVM training data.
    #[arg(long)]
    data: PathBuf,
    /// Moments sidecar; makes direct methods use it instead of sample moments.
    #[arg(long)]
    moments: Option<PathBuf>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// LIBSVM file; omit to generate data from the `--d/--n/...` flags.
    #[arg(long, conflicts_with_all = ["d", "n"])]
    data: Option<PathBuf>,
    #[command(flatten)]
    spec: Option<SpecArgs>,
    /// Generator seed; defaults to `--seed`.
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 4)]
    repeats: usize,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// none, dataset or per-fold (file data only).
    #[arg(long, default_value = "dataset")]
    normalization: Normalization,
    #[arg(long)]
    contaminate_test: bool,
    /// Report zero train times so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    parallel: bool,
    /// Directory receiving one trace CSV per run.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self, method: Method, moment_source: MomentSource) -> Result<ExperimentConfig<f64>> {
        let data = match (&self.data, &self.spec) {
            (Some(path), _) => DataSource::File(path.clone()),
            (None, Some(spec)) => DataSource::Synthetic(spec.spec(self.data_seed.unwrap_or(self.seed))),
            (None, None) => bail!("either --data or --d and --n are required"),
        };
        let mut cfg = ExperimentConfig::new(method, data);
        cfg.moment_source = moment_source;
        cfg.folds = self.folds;
        cfg.repeats = self.repeats;
        cfg.optimizer = self.optimizer.config();
        cfg.seed = self.seed;
        cfg.normalization = self.normalization;
        cfg.contaminate_test = self.contaminate_test;
        cfg.record_timing = !self.no_timing;
        cfg.parallel = self.parallel;
        cfg.keep_traces = self.trace_dir.is_some();
        Ok(cfg)
    }
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    method: Method,
    #[arg(long, default_value = "empirical")]
    moment_source: MomentSource,
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Report CSV; defaults to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "error-direct,auc-direct,logistic,hinge,lda")]
    methods: Vec<Method>,
    /// Comma-separated moment sources tried for each direct method.
    #[arg(long, value_delimiter = ',', default_value = "empirical")]
    moment_sources: Vec<MomentSource>,
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Combined report CSV; defaults to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn load_dataset(path: &Path) -> Result<Dataset64> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_libsvm(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn gen(args: GenArgs) -> Result<()> {
    let spec = args.spec.spec(args.seed);
    let (dataset, moments) = gen_gaussian_with_outliers(&spec)?;
    write_libsvm(&dataset, BufWriter::new(File::create(&args.out)?))?;
    write_moments(&moments, BufWriter::new(File::create(&args.moments)?))?;
    eprintln!(
        "wrote {} samples ({} positive) to {}",
        dataset.n(),
        dataset.n_pos(),
        args.out.display()
    );
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let dataset = load_dataset(&args.data)?;
    let exact: Option<ClassMoments64> = match &args.moments {
        Some(p) if args.method.is_direct() => Some(read_moments(BufReader::new(
            File::open(p).with_context(|| format!("opening {}", p.display()))?,
        ))?),
        Some(_) => bail!("--moments applies to direct methods only"),
        None => None,
    };
    let cfg = args.optimizer.config();
    cfg.validate()?;
    let outcome = train_model(args.method, &dataset, exact.as_ref(), &cfg, args.seed)?;
    write_model(args.method, &outcome.model, BufWriter::new(File::create(&args.model)?))?;
    if let (Some(path), Some(trace)) = (&args.trace, &outcome.trace) {
        emit_trace(trace, path)?;
    }
    let eval = evaluate(&outcome.model, &dataset)?;
    match &outcome.trace {
        Some(t) => eprintln!(
            "{}: {} iterations ({}), objective {:.6e}, train accuracy {:.4}, train auc {:.4}",
            args.method,
            t.iterations(),
            t.termination.map_or("none".to_string(), |r| r.to_string()),
            t.final_objective(),
            eval.accuracy,
            eval.auc
        ),
        None => eprintln!(
            "{}: train accuracy {:.4}, train auc {:.4}",
            args.method, eval.accuracy, eval.auc
        ),
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let (method, model) = read_model::<f64, _>(BufReader::new(
        File::open(&args.model).with_context(|| format!("opening {}", args.model.display()))?,
    ))?;
    let dataset = load_dataset(&args.data)?;
    let r = evaluate(&model, &dataset)?;
    println!("method {method}");
    println!("n_pos {}", r.n_pos);
    println!("n_neg {}", r.n_neg);
    println!("accuracy {}", harness::fmt_num(r.accuracy));
    println!("auc {}", harness::fmt_num(r.auc));
    Ok(())
}

fn run_and_trace(cfg: &ExperimentConfig<f64>, trace_dir: Option<&Path>) -> Result<gaussrisk::ExperimentReport64> {
    let report = run_experiment(cfg)?;
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir)?;
        for run in &report.runs {
            if let Some(trace) = run.trace.as_ref().filter(|t| !t.records.is_empty()) {
                let name = format!("{}-{}-run{:03}.csv", report.method, report.moment_source, run.run);
                emit_trace(trace, dir.join(name))?;
            }
        }
    }
    let s = &report.summary;
    eprintln!(
        "{} [{}]: {}/{} runs, accuracy {:.4} ± {:.4}, auc {:.4} ± {:.4}",
        report.method,
        report.moment_source,
        s.completed,
        report.runs.len(),
        s.mean_accuracy,
        s.std_accuracy,
        s.mean_auc,
        s.std_auc
    );
    Ok(report)
}

fn cv(args: CvArgs) -> Result<()> {
    let cfg = args.experiment.config(args.method, args.moment_source)?;
    let report = run_and_trace(&cfg, args.experiment.trace_dir.as_deref())?;
    let mut out = open_output(args.report.as_deref())?;
    write_report(&report, &mut out)?;
    out.flush()?;
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut out = open_output(args.report.as_deref())?;
    let mut first = true;
    for &method in &args.methods {
        let sources: Vec<MomentSource> = if method.is_direct() {
            args.moment_sources.clone()
        } else {
            vec![MomentSource::Empirical]
        };
        for source in sources {
            let cfg = args.experiment.config(method, source)?;
            let report = run_and_trace(&cfg, args.experiment.trace_dir.as_deref())?;
            let mut buf = Vec::new();
            write_report(&report, &mut buf)?;
            let text = String::from_utf8(buf)?;
            let body = if first {
                text.as_str()
            } else {
                text.split_once('\n').map_or("", |(_, rest)| rest)
            };
            out.write_all(body.as_bytes())?;
            first = false;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Cv(a) => cv(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn cv_flags_build_a_synthetic_config() {
        let cli = Cli::try_parse_from([
            "gaussrisk", "cv", "--method", "auc-direct", "--moment-source", "exact", "--d", "3",
            "--n", "100", "--seed", "9", "--folds", "3",
        ])
        .unwrap();
        let Command::Cv(args) = cli.command else { panic!("expected cv") };
        let cfg = args.experiment.config(args.method, args.moment_source).unwrap();
        assert_eq!(cfg.folds, 3);
        assert!(cfg.validate().is_ok());
        match cfg.data {
            DataSource::Synthetic(s) => assert_eq!((s.d, s.n, s.seed), (3, 100, 9)),
            _ => panic!("expected synthetic data"),
        }
    }

    #[test]
    fn data_file_and_generator_flags_conflict() {
        assert!(Cli::try_parse_from([
            "gaussrisk", "cv", "--method", "lda", "--data", "x.svm", "--d", "3", "--n", "10",
        ])
        .is_err());
    }
}
