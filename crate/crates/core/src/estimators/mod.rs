//! Monte Carlo estimators.
//!
//! Every estimator keys trial `i` to its own stream derived from the caller's
//! [`RngStream`](crate::RngStream) and aggregates integer counters, so the
//! results do not depend on the number of worker threads.

mod coalescence;
mod mixing;
mod stats;
mod tails;

pub use coalescence::{coalescence_tail, path_coupling_tv_bound, PathBound, SurvivalCurve};
pub use mixing::{
    mixing_time_upper, particles_for, reference_configurations, scaling_experiment, MixingEstimate, MixingOptions,
    ScalingRecord, ScalingResult, StartClass, DEFAULT_REFERENCES,
};
pub use stats::{linear_fit, wilson, Estimate, LinearFit, Z_95};
pub use tails::{
    empty_fraction_tail, occupation_tail, thermalization_time, LevelEstimate, OccupationTail, TailFit, TailOptions,
    DEFAULT_DRIFT, MIN_FIT_HITS, MIN_TAIL_TRIALS, SENSITIVITY_DRIFTS,
};
