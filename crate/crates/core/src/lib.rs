//! Linear binary classifiers trained by directly minimizing closed-form
//! Gaussian-model expressions for the expected 0-1 error and the expected
//! ranking loss (1 − AUC), together with the logistic, pairwise-hinge and LDA
//! baselines and a cross-validation harness to compare them.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the CLI and
//! the accuracy guarantees assume.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod moments;
pub mod objectives;
pub mod optimizer;
pub mod scalar;
pub mod special;
pub mod surrogates;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use data::{Dataset, GaussianSpec, Label, NormalizationStats};
pub use harness::{ExperimentConfig, ExperimentReport, Method, MomentSource};
pub use linalg::Matrix;
pub use metrics::EvalResult;
pub use moments::{AucMoments, ClassMoments};
pub use objectives::ObjectiveEval;
pub use optimizer::{LineSearchConfig, OptimizationTrace, Termination};
pub use surrogates::LinearModel;

pub type Matrix64 = Matrix<f64>;
pub type Dataset64 = Dataset<f64>;
pub type ClassMoments64 = ClassMoments<f64>;
pub type AucMoments64 = AucMoments<f64>;
pub type LinearModel64 = LinearModel<f64>;
pub type ObjectiveEval64 = ObjectiveEval<f64>;
pub type OptimizationTrace64 = OptimizationTrace<f64>;
pub type LineSearchConfig64 = LineSearchConfig<f64>;
pub type GaussianSpec64 = GaussianSpec<f64>;
pub type ExperimentReport64 = ExperimentReport<f64>;

pub type Matrix32 = Matrix<f32>;
pub type Dataset32 = Dataset<f32>;
pub type ClassMoments32 = ClassMoments<f32>;
pub type AucMoments32 = AucMoments<f32>;
pub type LinearModel32 = LinearModel<f32>;
