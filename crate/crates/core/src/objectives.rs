//! Closed-form expected 0-1 error and expected ranking loss of a linear
//! classifier `f(x) = wᵀx` under Gaussian class-conditional models, with
//! their analytic gradients.
//!
//! Both objectives only see moment models, never samples, so one evaluation
//! costs `O(d²)` regardless of how much data produced the moments.
//!
//! Writing `t = wᵀμ / sqrt(wᵀΣw)`, the building block is `Φ(t)` with gradient
//! `pdf(t)·(σμ − tΣw)/σ²`. Both objectives are invariant under `w → cw` for
//! `c > 0`, so their gradients are orthogonal to `w`.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Matrix};
use crate::moments::{AucMoments, ClassMoments, SIGMA_EPS};
use crate::scalar::Scalar;
use crate::special::{density, phi};

/// `|t|` is clamped to this before evaluating Φ or its density.
pub const RATIO_CLAMP: f64 = 40.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveEval<T> {
    pub value: T,
    pub gradient: Vec<T>,
}

/// Something gradient descent can minimize.
pub trait Objective<T: Scalar> {
    fn dim(&self) -> usize;

    fn eval(&self, w: &[T]) -> Result<ObjectiveEval<T>>;

    /// Objective value alone; override when it is cheaper than [`eval`](Self::eval).
    fn value(&self, w: &[T]) -> Result<T> {
        self.eval(w).map(|e| e.value)
    }
}

/// Projection of `w` onto one Gaussian: `t = μ_w/σ_w` plus `Σw` for the gradient.
struct Projection<T> {
    sigma: T,
    ratio: T,
    sigma_w: Vec<T>,
}

fn project<T: Scalar>(w: &[T], mu: &[T], sigma: &Matrix<T>) -> Result<Projection<T>> {
    if w.len() != mu.len() {
        return Err(Error::invalid(format!(
            "weight dimension {} does not match moment dimension {}",
            w.len(),
            mu.len()
        )));
    }
    let sigma_w = sigma.matvec(w);
    let var = dot(w, &sigma_w);
    let s = var.max(T::zero()).sqrt();
    if !(s >= T::lit(SIGMA_EPS)) {
        return Err(Error::DegenerateProjection { sigma: s.as_f64() });
    }
    let clamp = T::lit(RATIO_CLAMP);
    let ratio = (dot(w, mu) / s).max(-clamp).min(clamp);
    Ok(Projection {
        sigma: s,
        ratio,
        sigma_w,
    })
}

impl<T: Scalar> Projection<T> {
    /// Adds `c·∇Φ(t)` to `grad`.
    fn add_cdf_gradient(&self, c: T, mu: &[T], grad: &mut [T]) {
        let coef = c * density(self.ratio) / (self.sigma * self.sigma);
        axpy(coef * self.sigma, mu, grad);
        axpy(-coef * self.ratio, &self.sigma_w, grad);
    }
}

/// Expected 0-1 error `P⁺·(1 − Φ(t⁺)) + P⁻·Φ(t⁻)`.
pub fn f_error<T: Scalar>(w: &[T], m: &ClassMoments<T>) -> Result<T> {
    Ok(error_eval(w, m)?.value)
}

pub fn grad_f_error<T: Scalar>(w: &[T], m: &ClassMoments<T>) -> Result<Vec<T>> {
    Ok(error_eval(w, m)?.gradient)
}

/// Value and gradient of [`f_error`] sharing one projection per class.
pub fn error_eval<T: Scalar>(w: &[T], m: &ClassMoments<T>) -> Result<ObjectiveEval<T>> {
    let pos = project(w, &m.mu_pos, &m.sigma_pos)?;
    let neg = project(w, &m.mu_neg, &m.sigma_neg)?;
    let value = m.prior_pos * phi(-pos.ratio) + m.prior_neg * phi(neg.ratio);
    let mut gradient = vec![T::zero(); w.len()];
    neg.add_cdf_gradient(m.prior_neg, &m.mu_neg, &mut gradient);
    pos.add_cdf_gradient(-m.prior_pos, &m.mu_pos, &mut gradient);
    Ok(ObjectiveEval { value, gradient })
}

/// Expected ranking loss `1 − AUC = Φ(μ_Z/σ_Z)` with `μ_Z = wᵀμ̂`,
/// `σ_Z = sqrt(wᵀΣ̂w)`.
pub fn f_auc<T: Scalar>(w: &[T], a: &AucMoments<T>) -> Result<T> {
    let p = project(w, &a.mu_hat, &a.sigma_hat)?;
    Ok(phi(p.ratio))
}

pub fn grad_f_auc<T: Scalar>(w: &[T], a: &AucMoments<T>) -> Result<Vec<T>> {
    Ok(auc_eval(w, a)?.gradient)
}

pub fn auc_eval<T: Scalar>(w: &[T], a: &AucMoments<T>) -> Result<ObjectiveEval<T>> {
    let p = project(w, &a.mu_hat, &a.sigma_hat)?;
    let mut gradient = vec![T::zero(); w.len()];
    p.add_cdf_gradient(T::one(), &a.mu_hat, &mut gradient);
    Ok(ObjectiveEval {
        value: phi(p.ratio),
        gradient,
    })
}

/// Expected 0-1 error over a fixed moment model.
#[derive(Clone, Copy, Debug)]
pub struct ErrorObjective<'a, T> {
    pub moments: &'a ClassMoments<T>,
}

impl<T: Scalar> Objective<T> for ErrorObjective<'_, T> {
    fn dim(&self) -> usize {
        self.moments.dim()
    }

    fn eval(&self, w: &[T]) -> Result<ObjectiveEval<T>> {
        error_eval(w, self.moments)
    }

    fn value(&self, w: &[T]) -> Result<T> {
        f_error(w, self.moments)
    }
}

/// Expected ranking loss over a fixed moment model.
#[derive(Clone, Copy, Debug)]
pub struct AucObjective<'a, T> {
    pub moments: &'a AucMoments<T>,
}

impl<T: Scalar> Objective<T> for AucObjective<'_, T> {
    fn dim(&self) -> usize {
        self.moments.dim()
    }

    fn eval(&self, w: &[T]) -> Result<ObjectiveEval<T>> {
        auc_eval(w, self.moments)
    }

    fn value(&self, w: &[T]) -> Result<T> {
        f_auc(w, self.moments)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::auc_moments;

    fn separated() -> ClassMoments<f64> {
        let i = Matrix::identity(2);
        ClassMoments::new(vec![1.0, 0.0], vec![-1.0, 0.0], i.clone(), i, 0.5, 0.5).unwrap()
    }

    #[test]
    fn error_of_unit_separated_classes() {
        let v = f_error(&[1.0, 0.0], &separated()).unwrap();
        assert!((v - 0.15865525393145707).abs() < 1e-15);
    }

    #[test]
    fn identical_classes_give_half() {
        let mut m = separated();
        m.mu_neg = m.mu_pos.clone();
        m.sigma_neg = m.sigma_pos.clone();
        for w in [[1.0, 0.0], [0.3, -2.0], [-1.0, 4.0]] {
            assert!((f_error(&w, &m).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_means_give_zero_error_gradient() {
        let mut m = separated();
        m.mu_pos = vec![0.0, 0.0];
        m.mu_neg = vec![0.0, 0.0];
        m.sigma_neg = Matrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let g = grad_f_error(&[0.7, -1.2], &m).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn ranking_loss_of_unit_separated_classes() {
        let a = auc_moments(&separated(), None).unwrap();
        let v = f_auc(&[1.0, 0.0], &a).unwrap();
        // Φ(−√2)
        assert!((v - 0.07864960352514257).abs() < 1e-15);
    }

    #[test]
    fn zero_mean_difference_gives_half() {
        let a = AucMoments {
            mu_hat: vec![0.0, 0.0],
            sigma_hat: Matrix::identity(2),
        };
        assert_eq!(f_auc(&[0.2, 5.0], &a).unwrap(), 0.5);
    }

    #[test]
    fn gradient_at_zero_projected_mean() {
        let a = AucMoments {
            mu_hat: vec![1.0, 0.0],
            sigma_hat: Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 3.0]]).unwrap(),
        };
        let w = [0.0, 2.0];
        let sigma_z = (3.0f64 * 4.0).sqrt();
        let g = grad_f_auc(&w, &a).unwrap();
        let expected = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma_z);
        assert!((g[0] - expected).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn orthogonal_direction_with_identity_gives_parallel_gradient() {
        let a = AucMoments {
            mu_hat: vec![1.0f64, 2.0, 0.0],
            sigma_hat: Matrix::identity(3),
        };
        let w = [2.0, -1.0, 0.5];
        let g = grad_f_auc(&w, &a).unwrap();
        let ratio = g[0] / 1.0;
        assert!((g[1] - 2.0 * ratio).abs() < 1e-15);
        assert!(g[2].abs() < 1e-15);
    }

    #[test]
    fn degenerate_direction_is_reported() {
        assert!(matches!(
            f_error(&[0.0, 0.0], &separated()),
            Err(Error::DegenerateProjection { .. })
        ));
        let a = auc_moments(&separated(), None).unwrap();
        assert!(matches!(
            grad_f_auc(&[0.0, 0.0], &a),
            Err(Error::DegenerateProjection { .. })
        ));
    }

    #[test]
    fn far_separated_ratio_is_clamped() {
        let mut m = separated();
        m.mu_pos = vec![1e3, 0.0];
        m.mu_neg = vec![-1e3, 0.0];
        let e = error_eval(&[1.0, 0.0], &m).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.gradient.iter().all(|g| g.is_finite()));
    }
}
