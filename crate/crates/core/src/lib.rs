//! Primal-dual policy optimization for finite-horizon constrained MDPs with
//! linear transitions, adversarial losses and a stochastic cost constraint.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar.

pub mod envmodel;
pub mod error;
pub mod estimate;
pub mod learner;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod policy;
mod scalar;

pub use envmodel::{
    job_scheduling_v1, EnvConfig, FeatureMap, InlineEnv, LinearCmdpSpec, LossSchedule, LossVariant, RunStreams,
    SpecParts,
};
pub use error::{Error, Result};
pub use estimate::HyperParams;
pub use learner::{EpisodeRecord, Learner, PolicyTable};
pub use linalg::DesignMatrix;
pub use metrics::{RunMetrics, RunSummary};
pub use oracle::{constrained_optimum, dp_policy_value, slater_margin, ConstrainedOptimum};
pub use policy::EpochPolicy;
pub use scalar::Real;

pub type LinearCmdpSpec64 = LinearCmdpSpec<f64>;
pub type LinearCmdpSpec32 = LinearCmdpSpec<f32>;
pub type HyperParams64 = HyperParams<f64>;
pub type HyperParams32 = HyperParams<f32>;
pub type Learner64 = Learner<f64>;
pub type Learner32 = Learner<f32>;
pub type DesignMatrix64 = DesignMatrix<f64>;
pub type DesignMatrix32 = DesignMatrix<f32>;
pub type RunMetrics64 = RunMetrics<f64>;
pub type RunMetrics32 = RunMetrics<f32>;
