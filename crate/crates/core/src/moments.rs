//! Gaussian moment models of the two classes.
//!
//! [`ClassMoments`] holds per-class means, covariances and priors; it feeds
//! the expected-error objective directly. [`AucMoments`] holds the moments of
//! the difference `X⁻ − X⁺` that the expected ranking loss depends on.

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// Smallest admissible `sqrt(wᵀΣw)` before the objectives would divide by ~0.
pub const SIGMA_EPS: f64 = 1e-12;

/// Most negative eigenvalue tolerated in a combined AUC covariance.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassMoments<T> {
    pub mu_pos: Vec<T>,
    pub mu_neg: Vec<T>,
    pub sigma_pos: Matrix<T>,
    pub sigma_neg: Matrix<T>,
    pub prior_pos: T,
    pub prior_neg: T,
}

impl<T: Scalar> ClassMoments<T> {
    /// Checks dimensions, symmetry and the priors.
    ///
    /// Positive semidefiniteness is not checked here (it costs a
    /// factorization); see [`ClassMoments::check_psd`].
    pub fn new(
        mu_pos: Vec<T>,
        mu_neg: Vec<T>,
        sigma_pos: Matrix<T>,
        sigma_neg: Matrix<T>,
        prior_pos: T,
        prior_neg: T,
    ) -> Result<Self> {
        let d = mu_pos.len();
        if d == 0 {
            return Err(Error::invalid("moments need d >= 1"));
        }
        if mu_neg.len() != d
            || sigma_pos.rows() != d
            || sigma_pos.cols() != d
            || sigma_neg.rows() != d
            || sigma_neg.cols() != d
        {
            return Err(Error::invalid("moment dimensions disagree"));
        }
        for sigma in [&sigma_pos, &sigma_neg] {
            let tol = T::lit(1e-12) * sigma.max_abs().max(T::one());
            if sigma.asymmetry() > tol {
                return Err(Error::InvalidModel("covariance is not symmetric".into()));
            }
            if (0..d).any(|i| sigma[(i, i)] < T::zero()) {
                return Err(Error::InvalidModel("negative variance".into()));
            }
        }
        let in_unit = |p: T| p > T::zero() && p < T::one();
        if !in_unit(prior_pos) || !in_unit(prior_neg) {
            return Err(Error::invalid("class priors must lie in (0,1)"));
        }
        let prior_tol = T::lit(1e-12).max(T::epsilon() * T::lit(4.0));
        if (prior_pos + prior_neg - T::one()).abs() > prior_tol {
            return Err(Error::invalid("class priors must sum to 1"));
        }
        Ok(ClassMoments {
            mu_pos,
            mu_neg,
            sigma_pos,
            sigma_neg,
            prior_pos,
            prior_neg,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mu_pos.len()
    }

    /// Verifies both covariances are positive semidefinite up to
    /// [`PSD_TOLERANCE`].
    pub fn check_psd(&self) -> Result<()> {
        for sigma in [&self.sigma_pos, &self.sigma_neg] {
            let min = sigma.symmetric_eigenvalues()?[0];
            if min < -T::lit(PSD_TOLERANCE) {
                return Err(Error::InvalidModel(format!(
                    "covariance has eigenvalue {min:e}"
                )));
            }
        }
        Ok(())
    }
}

/// Mean and covariance of `X⁻ − X⁺`.
#[derive(Clone, Debug, PartialEq)]
pub struct AucMoments<T> {
    pub mu_hat: Vec<T>,
    pub sigma_hat: Matrix<T>,
}

impl<T: Scalar> AucMoments<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.mu_hat.len()
    }
}

/// Per-class sample means, `(n−1)`-denominator covariances and frequency
/// priors.
pub fn estimate_class_moments<T: Scalar>(dataset: &Dataset<T>) -> Result<ClassMoments<T>> {
    let n_pos = dataset.n_pos();
    let n_neg = dataset.n_neg();
    if n_pos < 2 || n_neg < 2 {
        return Err(Error::InsufficientData(format!(
            "need two samples per class, have {n_pos} positive and {n_neg} negative"
        )));
    }
    let (mu_pos, sigma_pos) = class_mean_cov(dataset, Label::Positive, n_pos);
    let (mu_neg, sigma_neg) = class_mean_cov(dataset, Label::Negative, n_neg);
    let n = T::from_count(dataset.n());
    let prior_pos = T::from_count(n_pos) / n;
    let prior_neg = T::from_count(n_neg) / n;
    ClassMoments::new(mu_pos, mu_neg, sigma_pos, sigma_neg, prior_pos, prior_neg)
}

fn class_mean_cov<T: Scalar>(dataset: &Dataset<T>, class: Label, count: usize) -> (Vec<T>, Matrix<T>) {
    let d = dataset.d();
    let members = || (0..dataset.n()).filter(move |&i| dataset.labels()[i] == class);

    let mut mean = vec![T::zero(); d];
    for i in members() {
        for (m, &v) in mean.iter_mut().zip(dataset.row(i)) {
            *m += v;
        }
    }
    let cnt = T::from_count(count);
    for m in &mut mean {
        *m /= cnt;
    }

    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![T::zero(); d];
    for i in members() {
        for ((c, &v), &m) in centered.iter_mut().zip(dataset.row(i)).zip(&mean) {
            *c = v - m;
        }
        for a in 0..d {
            let ca = centered[a];
            if ca == T::zero() {
                continue;
            }
            let row = cov.row_mut(a);
            for b in a..d {
                row[b] += ca * centered[b];
            }
        }
    }
    let denom = T::from_count(count - 1);
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    (mean, cov)
}

/// `μ̂ = μ⁻ − μ⁺` and `Σ̂ = Σ⁻ + Σ⁺ − C − Cᵀ`, with `C = Σ⁺⁻` when supplied and
/// zero otherwise.
pub fn auc_moments<T: Scalar>(
    moments: &ClassMoments<T>,
    cross_cov_pos_neg: Option<&Matrix<T>>,
) -> Result<AucMoments<T>> {
    let d = moments.dim();
    let mu_hat = moments
        .mu_neg
        .iter()
        .zip(&moments.mu_pos)
        .map(|(&n, &p)| n - p)
        .collect();
    let mut sigma_hat = moments.sigma_neg.add_scaled(T::one(), &moments.sigma_pos)?;
    if let Some(c) = cross_cov_pos_neg {
        if c.rows() != d || c.cols() != d {
            return Err(Error::invalid("cross-covariance dimension mismatch"));
        }
        for i in 0..d {
            for j in 0..d {
                sigma_hat[(i, j)] -= c[(i, j)] + c[(j, i)];
            }
        }
        let min = sigma_hat.symmetric_eigenvalues()?[0];
        if min < -T::lit(PSD_TOLERANCE) {
            return Err(Error::InvalidModel(format!(
                "combined covariance is indefinite (eigenvalue {min:e})"
            )));
        }
    }
    Ok(AucMoments { mu_hat, sigma_hat })
}

/// `(wᵀμ, sqrt(wᵀΣw))`.
pub fn projected_stats<T: Scalar>(w: &[T], mu: &[T], sigma: &Matrix<T>) -> Result<(T, T)> {
    if w.len() != mu.len() || sigma.rows() != w.len() || sigma.cols() != w.len() {
        return Err(Error::invalid("projection dimensions disagree"));
    }
    let mu_w = dot(w, mu);
    let var = sigma.quad_form(w);
    let sigma_w = var.max(T::zero()).sqrt();
    if !(sigma_w >= T::lit(SIGMA_EPS)) {
        return Err(Error::DegenerateProjection {
            sigma: sigma_w.as_f64(),
        });
    }
    Ok((mu_w, sigma_w))
}
