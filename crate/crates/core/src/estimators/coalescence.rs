//! Coalescence-time tails and path-coupling bounds on total variation.

use rayon::prelude::*;

use super::stats::{wilson, Estimate};
use crate::coupling::{adjacent_path, coalescing_time, TaggedState};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::state::Configuration;

/// Survival curve `P(τ > t)` on a grid of times.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub points: Vec<(u64, Estimate)>,
    /// Censoring horizon of every run.
    pub horizon: u64,
    pub censored: u64,
}

/// Samples `trials` coalescing times from `start`, censored at the last grid
/// time; censored runs count as survivors at every grid time.
pub fn coalescence_tail(start: &TaggedState, t_grid: &[u64], trials: u64, stream: RngStream) -> Result<SurvivalCurve> {
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("t_grid", "must be strictly increasing"));
    }
    let horizon = t_grid.last().copied().unwrap_or(0);
    let taus = sample_taus(start, horizon, trials, stream)?;
    let censored = taus.iter().filter(|t| t.is_none()).count() as u64;
    let points = t_grid
        .iter()
        .map(|&t| {
            let survivors = taus.iter().filter(|tau| tau.is_none_or(|v| v > t)).count() as u64;
            (t, Estimate::proportion(survivors, trials, stream.master_seed))
        })
        .collect();
    Ok(SurvivalCurve {
        points,
        horizon,
        censored,
    })
}

fn sample_taus(start: &TaggedState, horizon: u64, trials: u64, stream: RngStream) -> Result<Vec<Option<u64>>> {
    (0..trials)
        .into_par_iter()
        .map(|i| coalescing_time(start, stream.child(i), horizon).map(|o| o.tau))
        .collect()
}

/// Upper bound on `‖P_η^t − P_ξ^t‖` obtained by summing `P(τ_j > t)` along
/// an adjacent path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBound {
    /// `value` is the sum of per-pair failure rates; `ci_low` and `ci_high`
    /// are the sums of the per-pair Wilson bounds.
    pub estimate: Estimate,
    /// Non-coalesced runs at time `t`, per adjacent pair.
    pub failures: Vec<u64>,
    pub trials_per_pair: u64,
}

impl PathBound {
    pub fn path_len(&self) -> usize {
        self.failures.len()
    }
}

/// Estimates the path-coupling bound between `eta` and `xi` at time `t`.
///
/// Pair `j` of the path runs the tagged coupling from the state whose lifted
/// copies are `(ζ_{j−1}, ζ_j)`, on streams `stream.child(j).child(i)`.
pub fn path_coupling_tv_bound(
    eta: &Configuration,
    xi: &Configuration,
    t: u64,
    trials_per_pair: u64,
    stream: RngStream,
) -> Result<PathBound> {
    let path = adjacent_path(eta, xi)?;
    if !path.is_empty() && trials_per_pair == 0 {
        return Err(Error::invalid("trials", "need at least one trial per pair"));
    }
    let starts: Vec<TaggedState> = path.tagged_starts().collect();
    let failures: Vec<u64> = starts
        .par_iter()
        .enumerate()
        .map(|(j, start)| {
            let family = stream.child(j as u64);
            (0..trials_per_pair)
                .map(|i| {
                    let out = coalescing_time(start, family.child(i), t).expect("valid tagged start");
                    u64::from(out.survives(t))
                })
                .sum()
        })
        .collect();

    let mut value = 0.0;
    let mut ci_low = 0.0;
    let mut ci_high = 0.0;
    for &f in &failures {
        let (lo, hi) = wilson(f, trials_per_pair);
        value += f as f64 / trials_per_pair as f64;
        ci_low += lo;
        ci_high += hi;
    }
    Ok(PathBound {
        estimate: Estimate {
            value,
            ci_low,
            ci_high,
            trials: trials_per_pair * failures.len() as u64,
            master_seed: stream.master_seed,
        },
        failures,
        trials_per_pair,
    })
}
