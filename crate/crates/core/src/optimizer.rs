//! Gradient descent with Armijo backtracking, and the starting points used
//! for the direct and surrogate objectives.

use std::fmt;
use std::time::Instant;

use crate::data::{seeded_rng, std_normal};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::moments::ClassMoments;
use crate::objectives::Objective;
use crate::scalar::Scalar;
use crate::surrogates::LinearModel;

#[derive(Clone, Debug, PartialEq)]
pub struct LineSearchConfig<T> {
    /// Armijo sufficient-decrease constant.
    pub c: T,
    /// Step shrink factor.
    pub beta: T,
    /// First trial step of every iteration.
    pub alpha0: T,
    pub max_iters: usize,
    /// Stop once `‖∇F(w_k)‖ < grad_tol_rel·‖∇F(w_0)‖`.
    pub grad_tol_rel: T,
    pub max_backtracks: usize,
}

impl<T: Scalar> Default for LineSearchConfig<T> {
    fn default() -> Self {
        LineSearchConfig {
            c: T::lit(1e-4),
            beta: T::lit(0.5),
            alpha0: T::one(),
            max_iters: 250,
            grad_tol_rel: T::lit(1e-7),
            max_backtracks: 60,
        }
    }
}

impl<T: Scalar> LineSearchConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: T| v > T::zero() && v < T::one();
        if !unit(self.c) || !unit(self.beta) {
            return Err(Error::invalid("c and beta must lie in (0,1)"));
        }
        if !(self.alpha0 > T::zero()) || !(self.grad_tol_rel > T::zero()) {
            return Err(Error::invalid("alpha0 and grad_tol_rel must be positive"));
        }
        if self.max_iters == 0 || self.max_backtracks == 0 {
            return Err(Error::invalid("max_iters and max_backtracks must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailure,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::GradientTolerance => "gradient-tolerance",
            Termination::MaxIterations => "max-iterations",
            Termination::LineSearchFailure => "line-search-failure",
        })
    }
}

/// State after one accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord<T> {
    /// 1-based iteration number.
    pub iter: usize,
    /// `F(w_k)` at the accepted iterate.
    pub objective: T,
    /// `‖∇F(w_k)‖` at the accepted iterate.
    pub grad_norm: T,
    /// Step `α_k` that produced `w_k` from `w_{k−1}`.
    pub step: T,
    pub cumulative_backtracks: usize,
    /// Wall-clock seconds since the run started.
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationTrace<T> {
    pub initial_objective: T,
    pub initial_grad_norm: T,
    pub records: Vec<IterationRecord<T>>,
    /// `None` only in the partial trace of a failed run.
    pub termination: Option<Termination>,
    /// Armijo constant the run used, kept for replay.
    pub c: T,
}

impl<T: Scalar> OptimizationTrace<T> {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_objective(&self) -> T {
        self.records
            .last()
            .map_or(self.initial_objective, |r| r.objective)
    }

    pub fn total_seconds(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.seconds)
    }

    /// Re-checks `F(w_k) ≤ F(w_{k−1}) − c·α_k·‖∇F(w_{k−1})‖²` for every
    /// accepted step. Returns the first iteration that violates it.
    pub fn replay_armijo(&self) -> std::result::Result<(), usize> {
        let mut prev_obj = self.initial_objective;
        let mut prev_grad = self.initial_grad_norm;
        for r in &self.records {
            if r.objective > prev_obj - self.c * r.step * prev_grad * prev_grad {
                return Err(r.iter);
            }
            prev_obj = r.objective;
            prev_grad = r.grad_norm;
        }
        Ok(())
    }

    pub fn is_monotone(&self) -> bool {
        let mut prev = self.initial_objective;
        self.records.iter().all(|r| {
            let ok = r.objective <= prev;
            prev = r.objective;
            ok
        })
    }
}

/// A run whose objective failed to evaluate, with everything recorded so far.
#[derive(Debug)]
pub struct OptimizeFailure<T> {
    pub error: Error,
    pub trace: OptimizationTrace<T>,
}

impl<T> fmt::Display for OptimizeFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "optimization failed: {}", self.error)
    }
}

impl<T: fmt::Debug> std::error::Error for OptimizeFailure<T> {}

impl<T> From<OptimizeFailure<T>> for Error {
    fn from(f: OptimizeFailure<T>) -> Error {
        f.error
    }
}

/// Minimizes `objective` from `w0` with `w_{k+1} = w_k − α_k∇F(w_k)`, where
/// `α_k` is the first of `alpha0·beta^j` passing the Armijo test.
///
/// Running out of backtracks is not an error: the run stops with
/// [`Termination::LineSearchFailure`] and returns the incumbent.
pub fn gd_backtracking<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    w0: &[T],
    cfg: &LineSearchConfig<T>,
) -> std::result::Result<(LinearModel<T>, OptimizationTrace<T>), OptimizeFailure<T>> {
    let start = Instant::now();
    let mut trace = OptimizationTrace {
        initial_objective: T::nan(),
        initial_grad_norm: T::nan(),
        records: Vec::new(),
        termination: None,
        c: cfg.c,
    };
    macro_rules! bail {
        ($e:expr) => {
            return Err(OptimizeFailure { error: $e, trace })
        };
    }
    if let Err(e) = cfg.validate() {
        bail!(e);
    }
    if w0.len() != objective.dim() {
        bail!(Error::invalid("starting point dimension does not match objective"));
    }

    let mut w = w0.to_vec();
    let mut current = match objective.eval(&w) {
        Ok(e) => e,
        Err(e) => bail!(e),
    };
    let grad0 = norm(&current.gradient);
    trace.initial_objective = current.value;
    trace.initial_grad_norm = grad0;
    let tol = cfg.grad_tol_rel * grad0;

    let mut backtracks = 0usize;
    let mut trial = vec![T::zero(); w.len()];
    let termination = loop {
        let gnorm = norm(&current.gradient);
        if gnorm == T::zero() || gnorm < tol {
            break Termination::GradientTolerance;
        }
        if trace.records.len() >= cfg.max_iters {
            break Termination::MaxIterations;
        }
        let g2 = gnorm * gnorm;
        let mut alpha = cfg.alpha0;
        let mut accepted = None;
        for j in 0..=cfg.max_backtracks {
            if j > 0 {
                alpha *= cfg.beta;
                backtracks += 1;
            }
            for ((t, &wi), &gi) in trial.iter_mut().zip(&w).zip(&current.gradient) {
                *t = wi - alpha * gi;
            }
            let value = match objective.value(&trial) {
                Ok(v) => v,
                Err(e) => bail!(e),
            };
            if value <= current.value - cfg.c * alpha * g2 {
                accepted = Some(alpha);
                break;
            }
        }
        let Some(alpha) = accepted else {
            break Termination::LineSearchFailure;
        };
        std::mem::swap(&mut w, &mut trial);
        current = match objective.eval(&w) {
            Ok(e) => e,
            Err(e) => bail!(e),
        };
        trace.records.push(IterationRecord {
            iter: trace.records.len() + 1,
            objective: current.value,
            grad_norm: norm(&current.gradient),
            step: alpha,
            cumulative_backtracks: backtracks,
            seconds: start.elapsed().as_secs_f64(),
        });
    };
    trace.termination = Some(termination);
    match LinearModel::through_origin(w) {
        Ok(model) => Ok((model, trace)),
        Err(e) => Err(OptimizeFailure { error: e, trace }),
    }
}

/// Unit vector along the part of `μ⁺` orthogonal to `μ⁻`; falls back to
/// `μ⁺/‖μ⁺‖` when the means are parallel.
pub fn init_w0_error<T: Scalar>(m: &ClassMoments<T>) -> Result<Vec<T>> {
    let mu_pos = &m.mu_pos;
    let mu_neg = &m.mu_neg;
    let pos_norm = norm(mu_pos);
    if pos_norm == T::zero() {
        return Err(Error::NoInitializer(
            "positive class mean is zero".into(),
        ));
    }
    let neg_sq = dot(mu_neg, mu_neg);
    let mut w: Vec<T> = mu_pos.clone();
    if neg_sq > T::zero() {
        let coef = dot(mu_neg, mu_pos) / neg_sq;
        for (wi, &n) in w.iter_mut().zip(mu_neg) {
            *wi -= coef * n;
        }
    }
    let w_norm = norm(&w);
    if w_norm < T::lit(1e-12) * pos_norm.max(T::one()) {
        return Ok(mu_pos.iter().map(|&v| v / pos_norm).collect());
    }
    Ok(w.into_iter().map(|v| v / w_norm).collect())
}

/// `d` seeded standard-normal draws scaled to unit length.
pub fn init_random<T: Scalar>(d: usize, seed: u64) -> Result<Vec<T>> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let mut rng = seeded_rng(seed);
    loop {
        let v: Vec<T> = (0..d).map(|_| std_normal(&mut rng)).collect();
        let n = norm(&v);
        if n > T::zero() {
            return Ok(v.into_iter().map(|x| x / n).collect());
        }
    }
}
