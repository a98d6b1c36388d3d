//! Exact ground truth on shells small enough to enumerate.

mod chain;
mod dist;
mod na;
mod space;
mod tagged;

pub use chain::{transition_row, ExactChain, MixingStart, TransitionMatrix, MAX_ITERATIONS, STATIONARY_TOL};
pub use dist::{compensated_sum, tv_exact, SparseDistribution};
pub use na::{na_check, occupied_count_law, NaCheck, NA_TOLERANCE};
pub use space::{binomial, enumerate_states, next_composition, shell_size, StateSpace, DEFAULT_STATE_CAP};
pub use tagged::ExactTaggedChain;
