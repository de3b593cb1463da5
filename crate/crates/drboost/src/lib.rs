//! Boosting that minimizes the worst-case expected loss over a KL ball
//! around the empirical distribution.
//!
//! The inner maximization over reweightings of the data has a one-dimensional
//! dual whose root gives the worst-case weights in closed form
//! ([`worstcase`]); the outer minimization is functional subgradient descent
//! over tree ensembles ([`boost`]). With the radius chosen per round by the
//! AdaBoost corollary, the loop reproduces discrete AdaBoost ([`adaboost`])
//! exactly. The radius itself can be calibrated from the chi-square limit of
//! the empirical profile likelihood ([`calibrate`]).

pub mod adaboost;
pub mod boost;
pub mod calibrate;
pub mod data;
pub mod dataset;
pub mod ensemble;
pub mod error;
mod gamma;
pub mod learners;
pub mod loss;
pub mod tree;
pub mod worstcase;

pub use adaboost::{train_adaboost, AdaboostOutput};
pub use boost::{
    corollary_delta, line_search, robust_gradient, train, DeltaPolicy, LineSearchConfig,
    LineSearchKind, TraceRecord, TrainConfig, TrainTrace,
};
pub use calibrate::{chi2_cdf, chi2_quantile, epl_value, select_delta, CalibrationSpec, Moments};
pub use data::{load_csv, split, Schema, SplitMix64, SplitSpec};
pub use dataset::Dataset;
pub use ensemble::{evaluate_margins, inner_product, Ensemble, Term};
pub use error::{Error, Result};
pub use learners::{fit_projection, projection_error, TreeConfig};
pub use loss::{loss_vector, LossVector, MarginLoss};
pub use tree::{Node, Tree};
pub use worstcase::{kl_divergence, psi, solve_worst_case, KlBall, WorstCase};
