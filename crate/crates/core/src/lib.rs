//! Simulation and verification toolkit for the repeated balls-into-bins (RBB)
//! process.
//!
//! At every step one ball leaves each non-empty bin and all removed balls are
//! thrown back uniformly at random, in parallel. The crate provides
//!
//! * [`process`]: the explicit construction of one parallel update from a
//!   shared assignment vector, trajectories and Maxwell-Boltzmann sampling;
//! * [`coupling`]: monotone pairs, the tagged two-particle coupling and
//!   adjacent-configuration paths;
//! * [`oracle`]: exact enumeration of small state spaces (transition rows,
//!   stationary law, total variation curves, mixing times);
//! * [`estimators`]: Monte Carlo estimators with Wilson intervals for tails,
//!   coalescence and mixing-time scaling;
//! * [`cli`]: the reproducible experiment runner behind the `rbb` binary.
//!
//! Sites are indexed from 0 throughout the API.

pub mod cli;
pub mod coupling;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod process;
pub mod rng;
pub mod state;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use state::{AssignmentVector, Configuration, StepRecord};
