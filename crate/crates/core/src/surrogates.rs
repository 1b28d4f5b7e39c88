//! Baselines the direct objectives are compared against: L2-regularized
//! logistic loss, the pairwise hinge ranking loss, and closed-form LDA.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, cholesky_solve, dot, norm, Matrix};
use crate::moments::ClassMoments;
use crate::objectives::{Objective, ObjectiveEval};
use crate::scalar::Scalar;

/// `f(x) = wᵀx + intercept`. The direct and surrogate methods keep the
/// intercept at zero; only LDA sets it.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel<T> {
    pub w: Vec<T>,
    pub intercept: T,
}

impl<T: Scalar> LinearModel<T> {
    pub fn new(w: Vec<T>, intercept: T) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::invalid("model needs d >= 1"));
        }
        if !intercept.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("model weights must be finite"));
        }
        Ok(LinearModel { w, intercept })
    }

    pub fn through_origin(w: Vec<T>) -> Result<Self> {
        Self::new(w, T::zero())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    #[inline]
    pub fn score(&self, x: &[T]) -> T {
        dot(&self.w, x) + self.intercept
    }

    pub fn scores(&self, dataset: &Dataset<T>) -> Vec<T> {
        (0..dataset.n()).map(|i| self.score(dataset.row(i))).collect()
    }
}

#[inline]
fn softplus<T: Scalar>(u: T) -> T {
    // log(1 + e^u)
    u.max(T::zero()) + (-u.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid<T: Scalar>(u: T) -> T {
    if u >= T::zero() {
        T::one() / (T::one() + (-u).exp())
    } else {
        let e = u.exp();
        e / (T::one() + e)
    }
}

/// `(1/n)·Σ log(1 + exp(−y_i wᵀx_i)) + λ‖w‖²` and its gradient.
pub fn logistic_eval<T: Scalar>(w: &[T], dataset: &Dataset<T>, lambda: T) -> Result<ObjectiveEval<T>> {
    if dataset.n() == 0 {
        return Err(Error::invalid("logistic loss of an empty dataset"));
    }
    if w.len() != dataset.d() {
        return Err(Error::invalid("weight dimension does not match dataset"));
    }
    if !(lambda >= T::zero()) {
        return Err(Error::invalid("lambda must be nonnegative"));
    }
    let n = T::from_count(dataset.n());
    let mut loss = T::zero();
    let mut gradient = vec![T::zero(); w.len()];
    for i in 0..dataset.n() {
        let x = dataset.row(i);
        let y: T = dataset.labels()[i].sign();
        let margin = y * dot(w, x);
        loss += softplus(-margin);
        // d/dw log(1+e^{−m}) = −y·σ(−m)·x
        axpy(-y * sigmoid(-margin), x, &mut gradient);
    }
    let two_lambda = T::lit(2.0) * lambda;
    for (g, &wi) in gradient.iter_mut().zip(w) {
        *g = *g / n + two_lambda * wi;
    }
    Ok(ObjectiveEval {
        value: loss / n + lambda * dot(w, w),
        gradient,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct LogisticObjective<'a, T> {
    pub dataset: &'a Dataset<T>,
    pub lambda: T,
}

impl<'a, T: Scalar> LogisticObjective<'a, T> {
    /// Regularization `λ = 1/n`.
    pub fn with_default_lambda(dataset: &'a Dataset<T>) -> Self {
        LogisticObjective {
            dataset,
            lambda: T::one() / T::from_count(dataset.n()),
        }
    }
}

impl<T: Scalar> Objective<T> for LogisticObjective<'_, T> {
    fn dim(&self) -> usize {
        self.dataset.d()
    }

    fn eval(&self, w: &[T]) -> Result<ObjectiveEval<T>> {
        logistic_eval(w, self.dataset, self.lambda)
    }
}

/// Which class a pairwise hinge term pushes upward.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HingeOrientation {
    /// `max{0, 1 − (s⁺ − s⁻)}`: positives should out-score negatives by 1.
    #[default]
    PositivesAbove,
    /// `max{0, 1 − (s⁻ − s⁺)}`, which ranks negatives above positives.
    /// Kept only for auditing against the historical formula.
    NegativesAbove,
}

/// Mean pairwise hinge loss over all positive/negative pairs, in
/// `O(n log n + n·d)` via sorting and prefix sums.
pub fn pairwise_hinge_eval<T: Scalar>(w: &[T], dataset: &Dataset<T>) -> Result<ObjectiveEval<T>> {
    pairwise_hinge_eval_oriented(w, dataset, HingeOrientation::PositivesAbove)
}

pub fn pairwise_hinge_eval_oriented<T: Scalar>(
    w: &[T],
    dataset: &Dataset<T>,
    orientation: HingeOrientation,
) -> Result<ObjectiveEval<T>> {
    if w.len() != dataset.d() {
        return Err(Error::invalid("weight dimension does not match dataset"));
    }
    let scores = dataset.scores(w);
    let mut upper: Vec<(T, usize)> = Vec::new();
    let mut lower: Vec<(T, usize)> = Vec::new();
    for (i, (&s, label)) in scores.iter().zip(dataset.labels()).enumerate() {
        let is_upper = match orientation {
            HingeOrientation::PositivesAbove => label.is_positive(),
            HingeOrientation::NegativesAbove => !label.is_positive(),
        };
        if is_upper {
            upper.push((s, i));
        } else {
            lower.push((s, i));
        }
    }
    if upper.is_empty() || lower.is_empty() {
        return Err(Error::invalid("pairwise hinge needs both classes"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("non-finite score"));
    }
    let by_score = |x: &(T, usize), y: &(T, usize)| x.0.partial_cmp(&y.0).expect("finite scores");
    upper.sort_unstable_by(by_score);
    lower.sort_unstable_by(by_score);

    // A pair (a upper, b lower) is active iff s_a < s_b + 1. Both sweeps
    // walk the sorted lists once; coef[i] collects how often row i enters
    // the gradient with sign.
    let mut coef = vec![T::zero(); scores.len()];
    let mut total = T::zero();
    let mut prefix = T::zero();
    let mut p = 0;
    for &(s_b, b) in &lower {
        let threshold = s_b + T::one();
        while p < upper.len() && upper[p].0 < threshold {
            prefix += upper[p].0;
            p += 1;
        }
        if p > 0 {
            let c = T::from_count(p);
            total += c * threshold - prefix;
            coef[b] += c;
        }
    }
    let mut q = 0;
    for &(s_a, a) in &upper {
        while q < lower.len() && !(s_a < lower[q].0 + T::one()) {
            q += 1;
        }
        coef[a] -= T::from_count(lower.len() - q);
    }

    let mut gradient = vec![T::zero(); w.len()];
    for (i, &c) in coef.iter().enumerate() {
        if c != T::zero() {
            axpy(c, dataset.row(i), &mut gradient);
        }
    }
    let pairs = T::from_count(upper.len()) * T::from_count(lower.len());
    for g in &mut gradient {
        *g /= pairs;
    }
    Ok(ObjectiveEval {
        value: total / pairs,
        gradient,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct HingeObjective<'a, T> {
    pub dataset: &'a Dataset<T>,
    pub orientation: HingeOrientation,
}

impl<'a, T: Scalar> HingeObjective<'a, T> {
    pub fn new(dataset: &'a Dataset<T>) -> Self {
        HingeObjective {
            dataset,
            orientation: HingeOrientation::PositivesAbove,
        }
    }
}

impl<T: Scalar> Objective<T> for HingeObjective<'_, T> {
    fn dim(&self) -> usize {
        self.dataset.d()
    }

    fn eval(&self, w: &[T]) -> Result<ObjectiveEval<T>> {
        pairwise_hinge_eval_oriented(w, self.dataset, self.orientation)
    }
}

/// Linear discriminant with pooled covariance `P⁺Σ⁺ + P⁻Σ⁻`:
/// `w = Σ_pooled⁻¹(μ⁺ − μ⁻)`, `b = −wᵀ(μ⁺ + μ⁻)/2 + ln(P⁺/P⁻)`.
///
/// A singular pooled covariance is retried once with `1e−8·trace/d` added
/// to the diagonal.
pub fn lda_fit<T: Scalar>(m: &ClassMoments<T>) -> Result<LinearModel<T>> {
    let d = m.dim();
    let diff: Vec<T> = m.mu_pos.iter().zip(&m.mu_neg).map(|(&p, &n)| p - n).collect();
    if norm(&diff) == T::zero() {
        return Err(Error::DegenerateModel(
            "class means coincide; no discriminant direction".into(),
        ));
    }
    let pooled = m
        .sigma_pos
        .scaled(m.prior_pos)
        .add_scaled(m.prior_neg, &m.sigma_neg)?;
    let chol = match pooled.cholesky() {
        Ok(l) => l,
        Err(_) => {
            let jitter = T::lit(1e-8) * pooled.trace() / T::from_count(d);
            let jittered = pooled.add_scaled(jitter, &Matrix::identity(d))?;
            jittered.cholesky().map_err(|_| {
                Error::SingularModel(format!(
                    "pooled covariance singular even with jitter {jitter:e}"
                ))
            })?
        }
    };
    let w = cholesky_solve(&chol, &diff);
    let mid: Vec<T> = m.mu_pos.iter().zip(&m.mu_neg).map(|(&p, &n)| p + n).collect();
    let intercept = -dot(&w, &mid) / T::lit(2.0) + (m.prior_pos / m.prior_neg).ln();
    LinearModel::new(w, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Label;

    fn tiny() -> Dataset<f64> {
        Dataset::new(
            Matrix::from_rows(&[vec![1.0, 0.5], vec![-0.5, 2.0], vec![0.3, -1.0]]).unwrap(),
            vec![Label::Positive, Label::Negative, Label::Positive],
        )
        .unwrap()
    }

    #[test]
    fn logistic_at_origin_is_log_two() {
        let e = logistic_eval(&[0.0, 0.0], &tiny(), 0.0).unwrap();
        assert!((e.value - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn logistic_single_sample() {
        let ds = Dataset::new(Matrix::from_rows(&[vec![1.0]]).unwrap(), vec![Label::Positive]).unwrap();
        let e = logistic_eval(&[1.0f64], &ds, 0.0).unwrap();
        // log(1 + e^{-1})
        assert!((e.value - 0.31326168751822286).abs() < 1e-15);
    }

    #[test]
    fn logistic_is_stable_for_huge_margins() {
        let e = logistic_eval(&[1e4, 1e4], &tiny(), 0.0).unwrap();
        assert!(e.value.is_finite());
        assert!(e.gradient.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn logistic_rejects_negative_lambda() {
        assert!(logistic_eval(&[0.0, 0.0], &tiny(), -1.0).is_err());
    }

    #[test]
    fn hinge_at_origin_is_one() {
        let e = pairwise_hinge_eval(&[0.0, 0.0], &tiny()).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn hinge_vanishes_with_margin() {
        let ds = Dataset::new(
            Matrix::from_rows(&[vec![3.0], vec![2.0], vec![0.5], vec![-1.0]]).unwrap(),
            vec![Label::Positive, Label::Positive, Label::Negative, Label::Negative],
        )
        .unwrap();
        let e = pairwise_hinge_eval(&[1.0], &ds).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.gradient, vec![0.0]);
        // the printed orientation penalizes exactly this ranking
        let flipped = pairwise_hinge_eval_oriented(&[1.0], &ds, HingeOrientation::NegativesAbove).unwrap();
        assert!(flipped.value > 1.0);
    }

    #[test]
    fn hinge_needs_both_classes() {
        let ds = Dataset::new(Matrix::from_rows(&[vec![1.0]]).unwrap(), vec![Label::Positive]).unwrap();
        assert!(pairwise_hinge_eval(&[1.0], &ds).is_err());
    }

    fn moments(mu_pos: Vec<f64>, mu_neg: Vec<f64>) -> ClassMoments<f64> {
        let i = Matrix::identity(mu_pos.len());
        ClassMoments::new(mu_pos, mu_neg, i.clone(), i, 0.5, 0.5).unwrap()
    }

    #[test]
    fn lda_with_identity_covariance() {
        let m = lda_fit(&moments(vec![1.0, 0.0], vec![-1.0, 0.0])).unwrap();
        assert_eq!(m.w, vec![2.0, 0.0]);
        assert_eq!(m.intercept, 0.0);
    }

    #[test]
    fn lda_equal_means_is_degenerate() {
        assert!(matches!(
            lda_fit(&moments(vec![1.0, 1.0], vec![1.0, 1.0])),
            Err(Error::DegenerateModel(_))
        ));
    }

    #[test]
    fn lda_jitters_singular_covariance() {
        let mut m = moments(vec![1.0, 0.0], vec![-1.0, 0.0]);
        m.sigma_pos = Matrix::diag(&[1.0, 0.0]);
        m.sigma_neg = Matrix::diag(&[1.0, 0.0]);
        let fit = lda_fit(&m).unwrap();
        assert!((fit.w[0] - 2.0).abs() < 1e-6);
        m.sigma_pos = Matrix::zeros(2, 2);
        m.sigma_neg = Matrix::zeros(2, 2);
        assert!(matches!(lda_fit(&m), Err(Error::SingularModel(_))));
    }

    #[test]
    fn lda_prior_shifts_intercept() {
        let mut m = moments(vec![1.0], vec![-1.0]);
        m.prior_pos = 0.25;
        m.prior_neg = 0.75;
        let fit = lda_fit(&m).unwrap();
        assert!((fit.intercept - (1.0f64 / 3.0).ln()).abs() < 1e-15);
    }
}
