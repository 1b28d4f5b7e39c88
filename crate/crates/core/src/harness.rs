//! Cross-validated benchmark runs and their file formats.
//!
//! A run trains one method on one training split and scores accuracy and
//! AUC on the held-out fold. [`run_experiment`] repeats k-fold CV with fresh
//! seeded permutations and aggregates mean and sample standard deviation.
//!
//! For synthetic sources, label-flip outliers are injected into each
//! training split only; held-out folds keep the generator's labels unless
//! [`ExperimentConfig::contaminate_test`] is set.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::data::{
    self, gen_gaussian, inject_outliers, kfold_split, parse_libsvm, zscore_stats, Dataset,
    GaussianSpec,
};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::evaluate;
use crate::moments::{auc_moments, estimate_class_moments, ClassMoments};
use crate::objectives::{AucObjective, ErrorObjective};
use crate::optimizer::{
    gd_backtracking, init_random, init_w0_error, LineSearchConfig, OptimizationTrace, Termination,
};
use crate::scalar::Scalar;
use crate::surrogates::{lda_fit, HingeObjective, LinearModel, LogisticObjective};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ErrorDirect,
    AucDirect,
    Logistic,
    Hinge,
    Lda,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ErrorDirect,
        Method::AucDirect,
        Method::Logistic,
        Method::Hinge,
        Method::Lda,
    ];

    pub fn is_direct(self) -> bool {
        matches!(self, Method::ErrorDirect | Method::AucDirect)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ErrorDirect => "error-direct",
            Method::AucDirect => "auc-direct",
            Method::Logistic => "logistic",
            Method::Hinge => "hinge",
            Method::Lda => "lda",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MomentSource {
    /// The generator's true moments (synthetic data only).
    Exact,
    /// Sample moments of the training split.
    #[default]
    Empirical,
}

impl MomentSource {
    pub fn as_str(self) -> &'static str {
        match self {
            MomentSource::Exact => "exact",
            MomentSource::Empirical => "empirical",
        }
    }
}

impl fmt::Display for MomentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MomentSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(MomentSource::Exact),
            "empirical" => Ok(MomentSource::Empirical),
            _ => Err(Error::invalid(format!("unknown moment source {s:?}"))),
        }
    }
}

/// How file-backed data is standardized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    None,
    /// z-score the whole dataset once before splitting.
    #[default]
    Dataset,
    /// z-score with statistics of each training split.
    PerFold,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "dataset" => Ok(Normalization::Dataset),
            "per-fold" => Ok(Normalization::PerFold),
            _ => Err(Error::invalid(format!("unknown normalization {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource<T> {
    /// LIBSVM file.
    File(PathBuf),
    /// Generated in memory; generator coordinates are never normalized.
    Synthetic(GaussianSpec<T>),
    /// Sampled from a fixed moment model.
    Moments {
        moments: ClassMoments<T>,
        n: usize,
        outlier_pct: T,
        seed: u64,
    },
}

impl<T> DataSource<T> {
    pub fn is_synthetic(&self) -> bool {
        !matches!(self, DataSource::File(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig<T> {
    pub method: Method,
    pub moment_source: MomentSource,
    pub data: DataSource<T>,
    pub folds: usize,
    pub repeats: usize,
    pub optimizer: LineSearchConfig<T>,
    pub seed: u64,
    /// Applies to [`DataSource::File`] only.
    pub normalization: Normalization,
    /// Also flip labels in held-out folds of synthetic data.
    pub contaminate_test: bool,
    /// When false, train times are reported as 0 so reports are byte-stable.
    pub record_timing: bool,
    pub parallel: bool,
    pub keep_traces: bool,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn new(method: Method, data: DataSource<T>) -> Self {
        ExperimentConfig {
            method,
            moment_source: MomentSource::Empirical,
            data,
            folds: 5,
            repeats: 4,
            optimizer: LineSearchConfig::default(),
            seed: 0,
            normalization: Normalization::Dataset,
            contaminate_test: false,
            record_timing: true,
            parallel: false,
            keep_traces: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.moment_source == MomentSource::Exact {
            if !self.method.is_direct() {
                return Err(Error::invalid(format!(
                    "exact moments apply to direct methods only, not {}",
                    self.method
                )));
            }
            if !self.data.is_synthetic() {
                return Err(Error::invalid("exact moments require a synthetic data source"));
            }
        }
        if self.folds < 2 {
            return Err(Error::invalid("folds must be at least 2"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be positive"));
        }
        match &self.data {
            DataSource::Synthetic(spec) => spec.validate()?,
            DataSource::Moments { outlier_pct, .. } => {
                if !(*outlier_pct >= T::zero() && *outlier_pct < T::lit(50.0)) {
                    return Err(Error::invalid("outlier percentage must lie in [0, 50)"));
                }
            }
            DataSource::File(_) => {}
        }
        self.optimizer.validate()
    }

    /// Moment source as echoed in reports.
    pub fn moment_label(&self) -> &'static str {
        match self.method {
            Method::ErrorDirect | Method::AucDirect => self.moment_source.as_str(),
            Method::Lda => MomentSource::Empirical.as_str(),
            Method::Logistic | Method::Hinge => "none",
        }
    }
}

/// Derives an independent stream seed from a base seed and a tag.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A fitted model with its optimization record.
#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub model: LinearModel<T>,
    pub trace: Option<OptimizationTrace<T>>,
    /// Moment estimation plus optimization.
    pub train_seconds: f64,
    /// Optimization alone.
    pub optimize_seconds: f64,
}

/// Trains `method` on `train`. `exact` supplies generator moments for direct
/// methods; `None` means estimate them from `train`. `seed` drives the
/// random start of the surrogate methods.
pub fn train_model<T: Scalar>(
    method: Method,
    train: &Dataset<T>,
    exact: Option<&ClassMoments<T>>,
    optimizer: &LineSearchConfig<T>,
    seed: u64,
) -> Result<TrainOutcome<T>> {
    let start = Instant::now();
    let moments = || -> Result<ClassMoments<T>> {
        match exact {
            Some(m) => Ok(m.clone()),
            None => estimate_class_moments(train),
        }
    };
    let (model, trace, optimize_seconds) = match method {
        Method::ErrorDirect => {
            let m = moments()?;
            let w0 = init_w0_error(&m)?;
            let t = Instant::now();
            let (model, trace) = gd_backtracking(&ErrorObjective { moments: &m }, &w0, optimizer)?;
            (model, Some(trace), t.elapsed().as_secs_f64())
        }
        Method::AucDirect => {
            let m = moments()?;
            let a = auc_moments(&m, None)?;
            let w0 = init_w0_error(&m)?;
            let t = Instant::now();
            let (model, trace) = gd_backtracking(&AucObjective { moments: &a }, &w0, optimizer)?;
            (model, Some(trace), t.elapsed().as_secs_f64())
        }
        Method::Logistic => {
            let w0 = init_random(train.d(), seed)?;
            let t = Instant::now();
            let obj = LogisticObjective::with_default_lambda(train);
            let (model, trace) = gd_backtracking(&obj, &w0, optimizer)?;
            (model, Some(trace), t.elapsed().as_secs_f64())
        }
        Method::Hinge => {
            if train.n_pos() == 0 || train.n_neg() == 0 {
                return Err(Error::InsufficientData("training split has a single class".into()));
            }
            let w0 = init_random(train.d(), seed)?;
            let t = Instant::now();
            let (model, trace) = gd_backtracking(&HingeObjective::new(train), &w0, optimizer)?;
            (model, Some(trace), t.elapsed().as_secs_f64())
        }
        Method::Lda => {
            let m = estimate_class_moments(train)?;
            let t = Instant::now();
            let model = lda_fit(&m)?;
            (model, None, t.elapsed().as_secs_f64())
        }
    };
    Ok(TrainOutcome {
        model,
        trace,
        train_seconds: start.elapsed().as_secs_f64(),
        optimize_seconds,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub accuracy: f64,
    pub auc: f64,
    pub train_seconds: f64,
    pub optimize_seconds: f64,
    pub iterations: usize,
    pub termination: Option<Termination>,
}

/// One (repeat, fold) cell.
#[derive(Clone, Debug)]
pub struct RunRecord<T> {
    pub run: usize,
    pub fold: usize,
    pub repeat: usize,
    /// Failure reason when the run could not complete.
    pub outcome: std::result::Result<RunMetrics, String>,
    pub trace: Option<OptimizationTrace<T>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub completed: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub mean_seconds: f64,
}

impl Summary {
    pub fn from_metrics<'a>(metrics: impl IntoIterator<Item = &'a RunMetrics>) -> Summary {
        let metrics: Vec<&RunMetrics> = metrics.into_iter().collect();
        let acc: Vec<f64> = metrics.iter().map(|m| m.accuracy).collect();
        let auc: Vec<f64> = metrics.iter().map(|m| m.auc).collect();
        let secs: Vec<f64> = metrics.iter().map(|m| m.train_seconds).collect();
        Summary {
            completed: metrics.len(),
            mean_accuracy: mean(&acc),
            std_accuracy: sample_std(&acc),
            mean_auc: mean(&auc),
            std_auc: sample_std(&auc),
            mean_seconds: mean(&secs),
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard deviation with the `(k − 1)` denominator; 0 for fewer than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

#[derive(Clone, Debug)]
pub struct ExperimentReport<T> {
    pub method: Method,
    pub moment_source: String,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Sorted by `(repeat, fold)`.
    pub runs: Vec<RunRecord<T>>,
    pub summary: Summary,
}

impl<T: Scalar> ExperimentReport<T> {
    pub fn completed(&self) -> impl Iterator<Item = &RunMetrics> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn traces(&self) -> impl Iterator<Item = &OptimizationTrace<T>> {
        self.runs.iter().filter_map(|r| r.trace.as_ref())
    }
}

/// Loaded data plus the generator moments when synthetic.
struct Prepared<T> {
    clean: Dataset<T>,
    exact: Option<ClassMoments<T>>,
    outlier_pct: T,
}

fn prepare<T: Scalar>(cfg: &ExperimentConfig<T>) -> Result<Prepared<T>> {
    match &cfg.data {
        DataSource::File(path) => {
            let file = File::open(path)
                .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            let ds: Dataset<T> = parse_libsvm(BufReader::new(file))?;
            let ds = match cfg.normalization {
                Normalization::Dataset => data::normalize_zscore(&ds)?.0,
                Normalization::None | Normalization::PerFold => ds,
            };
            Ok(Prepared {
                clean: ds,
                exact: None,
                outlier_pct: T::zero(),
            })
        }
        DataSource::Synthetic(spec) => {
            let (ds, moments) = gen_gaussian(spec)?;
            Ok(Prepared {
                clean: ds,
                exact: Some(moments),
                outlier_pct: spec.outlier_pct,
            })
        }
        DataSource::Moments {
            moments,
            n,
            outlier_pct,
            seed,
        } => Ok(Prepared {
            clean: data::sample_gaussian(moments, *n, *seed)?,
            exact: Some(moments.clone()),
            outlier_pct: *outlier_pct,
        }),
    }
}

const TAG_SPLIT: u64 = 1;
const TAG_INIT: u64 = 2;
const TAG_OUTLIER_TRAIN: u64 = 3;
const TAG_OUTLIER_TEST: u64 = 4;

fn run_one<T: Scalar>(
    cfg: &ExperimentConfig<T>,
    prepared: &Prepared<T>,
    repeat: usize,
    fold: usize,
    split: &data::Fold,
) -> RunRecord<T> {
    let run = repeat * cfg.folds + fold;
    let run_seed = derive_seed(cfg.seed, run as u64);
    let result = (|| -> Result<(RunMetrics, Option<OptimizationTrace<T>>)> {
        let mut train = prepared.clean.subset(&split.train)?;
        let mut test = prepared.clean.subset(&split.test)?;
        if prepared.outlier_pct > T::zero() {
            train = inject_outliers(
                &train,
                prepared.outlier_pct,
                derive_seed(run_seed, TAG_OUTLIER_TRAIN),
            )?;
            if cfg.contaminate_test {
                test = inject_outliers(
                    &test,
                    prepared.outlier_pct,
                    derive_seed(run_seed, TAG_OUTLIER_TEST),
                )?;
            }
        }
        if !cfg.data.is_synthetic() && cfg.normalization == Normalization::PerFold {
            let stats = zscore_stats(&train)?;
            train = stats.apply(&train)?;
            test = stats.apply(&test)?;
        }
        if train.n_pos() == 0 || train.n_neg() == 0 {
            return Err(Error::InsufficientData("training fold has a single class".into()));
        }
        let exact = match cfg.moment_source {
            MomentSource::Exact => prepared.exact.as_ref(),
            MomentSource::Empirical => None,
        };
        let outcome = train_model(
            cfg.method,
            &train,
            exact,
            &cfg.optimizer,
            derive_seed(run_seed, TAG_INIT),
        )?;
        let eval = evaluate(&outcome.model, &test)?;
        let (iterations, termination) = outcome
            .trace
            .as_ref()
            .map_or((0, None), |t| (t.iterations(), t.termination));
        let (train_seconds, optimize_seconds) = if cfg.record_timing {
            (outcome.train_seconds, outcome.optimize_seconds)
        } else {
            (0.0, 0.0)
        };
        let metrics = RunMetrics {
            accuracy: eval.accuracy,
            auc: eval.auc,
            train_seconds,
            optimize_seconds,
            iterations,
            termination,
        };
        let trace = if cfg.keep_traces { outcome.trace } else { None };
        Ok((metrics, trace))
    })();
    match result {
        Ok((metrics, trace)) => RunRecord {
            run,
            fold,
            repeat,
            outcome: Ok(metrics),
            trace,
        },
        Err(e) => RunRecord {
            run,
            fold,
            repeat,
            outcome: Err(e.to_string()),
            trace: None,
        },
    }
}

/// Repeated k-fold cross-validation of one method.
///
/// Per-run failures (for example a single-class training fold) are recorded
/// in the report; only configuration and data-loading errors are returned.
pub fn run_experiment<T: Scalar>(cfg: &ExperimentConfig<T>) -> Result<ExperimentReport<T>> {
    cfg.validate()?;
    let prepared = prepare(cfg)?;
    let n = prepared.clean.n();

    let mut jobs = Vec::with_capacity(cfg.repeats * cfg.folds);
    for repeat in 0..cfg.repeats {
        let folds = kfold_split(n, cfg.folds, derive_seed(cfg.seed, TAG_SPLIT + 16 * repeat as u64))?;
        for (fold, split) in folds.into_iter().enumerate() {
            jobs.push((repeat, fold, split));
        }
    }

    let mut runs: Vec<RunRecord<T>> = if cfg.parallel {
        jobs.par_iter()
            .map(|(r, f, s)| run_one(cfg, &prepared, *r, *f, s))
            .collect()
    } else {
        jobs.iter()
            .map(|(r, f, s)| run_one(cfg, &prepared, *r, *f, s))
            .collect()
    };
    runs.sort_by_key(|r| (r.repeat, r.fold));

    let summary = Summary::from_metrics(runs.iter().filter_map(|r| r.outcome.as_ref().ok()));
    Ok(ExperimentReport {
        method: cfg.method,
        moment_source: cfg.moment_label().to_string(),
        folds: cfg.folds,
        repeats: cfg.repeats,
        seed: cfg.seed,
        runs,
        summary,
    })
}

pub const REPORT_HEADER: [&str; 9] = [
    "method",
    "moment_source",
    "run",
    "fold",
    "repeat",
    "accuracy",
    "auc",
    "train_seconds",
    "reason",
];

pub const TRACE_HEADER: [&str; 5] = ["iter", "objective", "grad_norm", "step", "seconds"];

/// Marker in the `run` column of the aggregate row.
pub const SUMMARY_MARKER: &str = "summary";

/// Scientific notation with 17 significant digits, enough to round-trip f64.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes one row per run followed by the aggregate row
/// `method,moment_source,summary,mean_accuracy,std_accuracy,mean_auc,std_auc,mean_seconds,`.
pub fn write_report<T: Scalar, W: Write>(report: &ExperimentReport<T>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(REPORT_HEADER)?;
    let method = report.method.as_str();
    let source = report.moment_source.as_str();
    for r in &report.runs {
        let (acc, auc, secs, reason) = match &r.outcome {
            Ok(m) => (
                fmt_num(m.accuracy),
                fmt_num(m.auc),
                fmt_num(m.train_seconds),
                String::new(),
            ),
            Err(reason) => (String::new(), String::new(), String::new(), reason.clone()),
        };
        w.write_record([
            method,
            source,
            &r.run.to_string(),
            &r.fold.to_string(),
            &r.repeat.to_string(),
            &acc,
            &auc,
            &secs,
            &reason,
        ])?;
    }
    let s = &report.summary;
    w.write_record([
        method,
        source,
        SUMMARY_MARKER,
        &fmt_num(s.mean_accuracy),
        &fmt_num(s.std_accuracy),
        &fmt_num(s.mean_auc),
        &fmt_num(s.std_auc),
        &fmt_num(s.mean_seconds),
        "",
    ])?;
    w.flush()?;
    Ok(())
}

pub fn emit_report<T: Scalar>(report: &ExperimentReport<T>, path: impl AsRef<Path>) -> Result<()> {
    write_report(report, BufWriter::new(File::create(path)?))
}

/// One run row read back from a report CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub moment_source: String,
    pub run: usize,
    pub fold: usize,
    pub repeat: usize,
    /// `None` for failed runs.
    pub metrics: Option<(f64, f64, f64)>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedReport {
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

pub fn parse_report<R: std::io::Read>(input: R) -> Result<ParsedReport> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(Error::parse(1, "unexpected report header"));
    }
    let num = |s: &str, line: usize| -> Result<f64> {
        s.parse().map_err(|_| Error::parse(line, format!("bad number {s:?}")))
    };
    let int = |s: &str, line: usize| -> Result<usize> {
        s.parse().map_err(|_| Error::parse(line, format!("bad integer {s:?}")))
    };
    let mut rows = Vec::new();
    let mut summary = None;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() < 8 {
            return Err(Error::parse(line, "too few fields"));
        }
        if &rec[2] == SUMMARY_MARKER {
            summary = Some(Summary {
                completed: 0,
                mean_accuracy: num(&rec[3], line)?,
                std_accuracy: num(&rec[4], line)?,
                mean_auc: num(&rec[5], line)?,
                std_auc: num(&rec[6], line)?,
                mean_seconds: num(&rec[7], line)?,
            });
            continue;
        }
        let metrics = if rec[5].is_empty() {
            None
        } else {
            Some((num(&rec[5], line)?, num(&rec[6], line)?, num(&rec[7], line)?))
        };
        rows.push(ReportRow {
            method: rec[0].to_string(),
            moment_source: rec[1].to_string(),
            run: int(&rec[2], line)?,
            fold: int(&rec[3], line)?,
            repeat: int(&rec[4], line)?,
            metrics,
            reason: rec.get(8).unwrap_or("").to_string(),
        });
    }
    let mut summary = summary.ok_or_else(|| Error::parse(0, "missing summary row"))?;
    summary.completed = rows.iter().filter(|r| r.metrics.is_some()).count();
    Ok(ParsedReport { rows, summary })
}

pub fn write_trace<T: Scalar, W: Write>(trace: &OptimizationTrace<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        w.write_record([
            r.iter.to_string(),
            fmt_num(r.objective.as_f64()),
            fmt_num(r.grad_norm.as_f64()),
            fmt_num(r.step.as_f64()),
            fmt_num(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `iter,objective,grad_norm,step,seconds`, one row per accepted step.
pub fn emit_trace<T: Scalar>(trace: &OptimizationTrace<T>, path: impl AsRef<Path>) -> Result<()> {
    if trace.records.is_empty() {
        return Err(Error::invalid("trace has no iterations"));
    }
    write_trace(trace, BufWriter::new(File::create(path)?))
}

/// Row of a trace CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub seconds: f64,
}

pub fn parse_trace<R: std::io::Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_reader(input);
    if reader.headers()?.iter().ne(TRACE_HEADER) {
        return Err(Error::parse(1, "unexpected trace header"));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let f = |k: usize| -> Result<f64> {
            rec[k]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad number {:?}", &rec[k])))
        };
        rows.push(TraceRow {
            iter: rec[0]
                .parse()
                .map_err(|_| Error::parse(line, "bad iteration"))?,
            objective: f(1)?,
            grad_norm: f(2)?,
            step: f(3)?,
            seconds: f(4)?,
        });
    }
    Ok(rows)
}

fn write_values<T: Scalar, W: Write>(out: &mut W, key: &str, values: &[T]) -> std::io::Result<()> {
    write!(out, "{key}")?;
    for v in values {
        write!(out, " {v}")?;
    }
    writeln!(out)
}

/// Whitespace `key value...` lines, blank lines and `#` comments ignored.
fn read_key_values<R: BufRead>(input: R) -> Result<Vec<(usize, String, Vec<String>)>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let key = parts.next().expect("nonempty").to_string();
        out.push((i + 1, key, parts.map(str::to_string).collect()));
    }
    Ok(out)
}

fn parse_values<T: Scalar>(line: usize, key: &str, values: &[String], expected: usize) -> Result<Vec<T>> {
    if values.len() != expected {
        return Err(Error::parse(
            line,
            format!("{key} expects {expected} values, found {}", values.len()),
        ));
    }
    values
        .iter()
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::parse(line, format!("non-numeric value {v:?} for {key}")))
        })
        .collect()
}

/// Serializes class moments as `key value...` lines with covariances in
/// row-major order, using shortest round-trip decimals.
pub fn write_moments<T: Scalar, W: Write>(m: &ClassMoments<T>, mut out: W) -> Result<()> {
    writeln!(out, "d {}", m.dim())?;
    write_values(&mut out, "prior_pos", &[m.prior_pos])?;
    write_values(&mut out, "prior_neg", &[m.prior_neg])?;
    write_values(&mut out, "mu_pos", &m.mu_pos)?;
    write_values(&mut out, "mu_neg", &m.mu_neg)?;
    write_values(&mut out, "sigma_pos", m.sigma_pos.as_slice())?;
    write_values(&mut out, "sigma_neg", m.sigma_neg.as_slice())?;
    out.flush()?;
    Ok(())
}

pub fn read_moments<T: Scalar, R: BufRead>(input: R) -> Result<ClassMoments<T>> {
    let entries = read_key_values(input)?;
    let find = |key: &str| {
        entries
            .iter()
            .find(|(_, k, _)| k == key)
            .ok_or_else(|| Error::parse(0, format!("missing key {key}")))
    };
    let (line, _, v) = find("d")?;
    let d: usize = match v.as_slice() {
        [x] => x.parse().map_err(|_| Error::parse(*line, "bad dimension"))?,
        _ => return Err(Error::parse(*line, "d expects one value")),
    };
    let get = |key: &str, count: usize| -> Result<Vec<T>> {
        let (line, k, v) = find(key)?;
        parse_values(*line, k, v, count)
    };
    ClassMoments::new(
        get("mu_pos", d)?,
        get("mu_neg", d)?,
        Matrix::from_row_major(d, d, get("sigma_pos", d * d)?)?,
        Matrix::from_row_major(d, d, get("sigma_neg", d * d)?)?,
        get("prior_pos", 1)?[0],
        get("prior_neg", 1)?[0],
    )
}

pub fn write_model<T: Scalar, W: Write>(method: Method, model: &LinearModel<T>, mut out: W) -> Result<()> {
    writeln!(out, "method {method}")?;
    writeln!(out, "d {}", model.dim())?;
    write_values(&mut out, "intercept", &[model.intercept])?;
    write_values(&mut out, "w", &model.w)?;
    out.flush()?;
    Ok(())
}

pub fn read_model<T: Scalar, R: BufRead>(input: R) -> Result<(Method, LinearModel<T>)> {
    let entries = read_key_values(input)?;
    let find = |key: &str| {
        entries
            .iter()
            .find(|(_, k, _)| k == key)
            .ok_or_else(|| Error::parse(0, format!("missing key {key}")))
    };
    let (line, _, v) = find("method")?;
    let method: Method = v
        .first()
        .ok_or_else(|| Error::parse(*line, "method expects a name"))?
        .parse()?;
    let (line, _, v) = find("d")?;
    let d: usize = v
        .first()
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| Error::parse(*line, "bad dimension"))?;
    let (line, k, v) = find("intercept")?;
    let intercept = parse_values::<T>(*line, k, v, 1)?[0];
    let (line, k, v) = find("w")?;
    let w = parse_values(*line, k, v, d)?;
    Ok((method, LinearModel::new(w, intercept)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GaussianSpec<f64> {
        GaussianSpec {
            d: 3,
            n: 200,
            prior_pos: 0.5,
            outlier_pct: 0.0,
            seed: 5,
            mean_scale: 1.0,
            cov_scale: 1.0,
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("svm".parse::<Method>().is_err());
    }

    #[test]
    fn exact_moments_need_synthetic_direct() {
        let mut cfg = ExperimentConfig::new(Method::Logistic, DataSource::Synthetic(spec()));
        cfg.moment_source = MomentSource::Exact;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::<f64>::new(Method::ErrorDirect, DataSource::File("x".into()));
        cfg.moment_source = MomentSource::Exact;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sample_std_uses_k_minus_one() {
        assert_eq!(sample_std(&[1.0, 3.0]), 2f64.sqrt());
        assert_eq!(sample_std(&[1.0]), 0.0);
    }

    #[test]
    fn derive_seed_spreads() {
        assert_ne!(derive_seed(0, 1), derive_seed(0, 2));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn model_file_round_trip() {
        let model = LinearModel::new(vec![0.1, -2.5e-7, 3.0], 0.25).unwrap();
        let mut buf = Vec::new();
        write_model(Method::Lda, &model, &mut buf).unwrap();
        let (method, back) = read_model::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(method, Method::Lda);
        assert_eq!(back, model);
    }

    #[test]
    fn moments_file_round_trip() {
        let (_, m) = gen_gaussian(&spec()).unwrap();
        let mut buf = Vec::new();
        write_moments(&m, &mut buf).unwrap();
        let back: ClassMoments<f64> = read_moments(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn moments_file_errors() {
        assert!(read_moments::<f64, _>("d 1\nprior_pos 0.5\n".as_bytes()).is_err());
        let text = "d 1\nprior_pos 0.5\nprior_neg 0.5\nmu_pos 1 2\nmu_neg 0\nsigma_pos 1\nsigma_neg 1\n";
        assert!(matches!(
            read_moments::<f64, _>(text.as_bytes()),
            Err(Error::Parse { line: 4, .. })
        ));
    }
}
