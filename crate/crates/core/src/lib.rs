//! Numeric core shared by the market simulator and the learning pipeline.
//!
//! Every routine is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the element type for the common cases: the large archetype
//! networks train in single precision, gradient checks and statistics run in
//! double precision.

pub mod baselines;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod plot;
mod scalar;
pub mod stats;
pub mod tuner;

pub use error::{Error, Result};
pub use metrics::{evaluate, EvalReport};
pub use scalar::Scalar;

/// Double-precision network.
pub type Mlp = nn::MlpModel<f64>;
/// Single-precision network used for the full-width classifier and cloners.
pub type Mlp32 = nn::MlpModel<f32>;
pub type Adam = nn::AdamState<f64>;
pub type Adam32 = nn::AdamState<f32>;
pub type Tree = baselines::DecisionTree<f64>;
pub type Forest = baselines::RandomForest<f64>;
pub type AdaBoost = baselines::AdaBoostSamme<f64>;
pub type Knn = baselines::Knn<f64>;
pub type LinearSvm = baselines::LinearSvm<f64>;
