//! Test-set accuracy and the Wilcoxon-Mann-Whitney AUC.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::surrogates::LinearModel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub accuracy: f64,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// Credit a positive/negative pair with equal scores receives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieCredit {
    /// Ties count as misordered (the strict WMW indicator).
    #[default]
    Zero,
    /// Ties count one half, as in midrank-based AUC.
    Half,
}

/// Fraction of samples with `sign(wᵀx + b) = y`, where a score of exactly 0
/// predicts `+1`.
pub fn empirical_accuracy<T: Scalar>(model: &LinearModel<T>, dataset: &Dataset<T>) -> Result<f64> {
    if dataset.n() == 0 {
        return Err(Error::invalid("accuracy of an empty dataset"));
    }
    check_dim(model, dataset)?;
    let correct = (0..dataset.n())
        .filter(|&i| {
            let predicted_pos = model.score(dataset.row(i)) >= T::zero();
            predicted_pos == dataset.labels()[i].is_positive()
        })
        .count();
    Ok(correct as f64 / dataset.n() as f64)
}

/// Fraction of positive/negative pairs the model orders strictly correctly.
pub fn empirical_auc<T: Scalar>(model: &LinearModel<T>, dataset: &Dataset<T>) -> Result<f64> {
    empirical_auc_with(model, dataset, TieCredit::Zero)
}

pub fn empirical_auc_with<T: Scalar>(
    model: &LinearModel<T>,
    dataset: &Dataset<T>,
    ties: TieCredit,
) -> Result<f64> {
    check_dim(model, dataset)?;
    let scores = model.scores(dataset);
    let (pos, neg): (Vec<_>, Vec<_>) = scores
        .iter()
        .zip(dataset.labels())
        .partition(|(_, l)| l.is_positive());
    let pos: Vec<T> = pos.into_iter().map(|(&s, _)| s).collect();
    let neg: Vec<T> = neg.into_iter().map(|(&s, _)| s).collect();
    auc_from_scores(&pos, &neg, ties)
}

/// WMW AUC of raw scores in `O((n⁺ + n⁻) log n⁻)`.
pub fn auc_from_scores<T: Scalar>(pos: &[T], neg: &[T], ties: TieCredit) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid("AUC needs at least one sample of each class"));
    }
    if pos.iter().chain(neg).any(|s| !s.is_finite()) {
        return Err(Error::invalid("non-finite score"));
    }
    let mut sorted = neg.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    // exact integer counts; doubled so that half credit stays integral
    let mut credit2: u128 = 0;
    for &s in pos {
        let below = sorted.partition_point(|&v| v < s);
        credit2 += 2 * below as u128;
        if ties == TieCredit::Half {
            let not_above = sorted.partition_point(|&v| v <= s);
            credit2 += (not_above - below) as u128;
        }
    }
    let pairs = pos.len() as u128 * neg.len() as u128;
    Ok(credit2 as f64 / (2 * pairs) as f64)
}

pub fn evaluate<T: Scalar>(model: &LinearModel<T>, dataset: &Dataset<T>) -> Result<EvalResult> {
    Ok(EvalResult {
        accuracy: empirical_accuracy(model, dataset)?,
        auc: empirical_auc(model, dataset)?,
        n_pos: dataset.n_pos(),
        n_neg: dataset.n_neg(),
    })
}

fn check_dim<T: Scalar>(model: &LinearModel<T>, dataset: &Dataset<T>) -> Result<()> {
    if model.dim() != dataset.d() {
        return Err(Error::invalid(format!(
            "model dimension {} does not match dataset dimension {}",
            model.dim(),
            dataset.d()
        )));
    }
    Ok(())
}
