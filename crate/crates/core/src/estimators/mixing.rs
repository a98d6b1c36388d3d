//! Mixing-time upper estimates from path coupling, and their scaling in `L`.
//!
//! For a start `η` and references `ξ_1, …, ξ_R` sampled after a long burn-in,
//!
//! ```text
//! ‖P_η^t − ν‖ ≲ (1/R) Σ_r ‖P_η^t − P_{ξ_r}^t‖ ≤ (1/R) Σ_r Σ_j P(τ_{r,j} > t)
//! ```
//!
//! where `j` runs over the adjacent pairs of the path from `η` to `ξ_r`.
//! Every pair gets the same number of tagged runs, so the double sum equals
//! `K̄ · p̄` with `K̄` the mean path length and `p̄` the pooled failure rate
//! over all runs; the bound's upper limit is `K̄` times the pooled Wilson
//! upper limit.

use rayon::prelude::*;

use super::stats::{linear_fit, wilson, Estimate, LinearFit};
use crate::coupling::{adjacent_path, TaggedChain, TaggedState};
use crate::error::{Error, Result};
use crate::process::Stepper;
use crate::rng::RngStream;
use crate::state::Configuration;

pub const DEFAULT_REFERENCES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartClass {
    /// All particles on one site.
    Worst,
    /// Balanced occupations.
    Flat,
}

impl StartClass {
    pub fn representative(self, sites: usize, particles: u32) -> Result<Configuration> {
        match self {
            StartClass::Worst => Configuration::worst(sites, particles),
            StartClass::Flat => Configuration::flat(sites, particles),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StartClass::Worst => "worst",
            StartClass::Flat => "flat",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingOptions {
    pub references: usize,
    pub trials_per_pair: u64,
    /// Burn-in before the first reference; default `4(N + L) + 64`.
    pub burn_in: Option<u64>,
    /// Steps between references; default `L`.
    pub thinning: Option<u64>,
    /// Largest time searched; default `64(N + L) + 256`.
    pub max_horizon: Option<u64>,
}

impl Default for MixingOptions {
    fn default() -> Self {
        Self {
            references: DEFAULT_REFERENCES,
            trials_per_pair: 4,
            burn_in: None,
            thinning: None,
            max_horizon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingEstimate {
    /// Smallest time whose bound has upper limit below `eps`; `None` when
    /// censored at `max_horizon`.
    pub time: Option<u64>,
    /// First point of the doubling grid `1, 2, 4, …` at which the bound held.
    pub grid_time: Option<u64>,
    /// Bound at `time` (or at `max_horizon` when censored).
    pub bound: Estimate,
    pub mean_path_len: f64,
    pub runs: u64,
    pub max_horizon: u64,
}

/// Reference configurations: a run from the flat start, `burn_in` steps
/// and then one sample every `thinning` steps.
pub fn reference_configurations(
    sites: usize,
    particles: u32,
    count: usize,
    burn_in: u64,
    thinning: u64,
    stream: RngStream,
) -> Result<Vec<Configuration>> {
    let mut stepper = Stepper::new(sites)?;
    let mut eta = Configuration::flat(sites, particles)?;
    let mut rng = stream.rng();
    let mut refs = Vec::with_capacity(count);
    for _ in 0..burn_in {
        stepper.advance(eta.occ_mut(), &mut rng);
    }
    for _ in 0..count {
        for _ in 0..thinning.max(1) {
            stepper.advance(eta.occ_mut(), &mut rng);
        }
        refs.push(eta.clone());
    }
    Ok(refs)
}

/// Upper estimate of `t_mix(η, eps)` for the representative of `class`.
pub fn mixing_time_upper(
    sites: usize,
    particles: u32,
    eps: f64,
    class: StartClass,
    stream: RngStream,
    opts: &MixingOptions,
) -> Result<MixingEstimate> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid("eps", format!("{eps} is outside (0, 1/2)")));
    }
    if opts.references == 0 {
        return Err(Error::invalid("references", "need at least one reference"));
    }
    if opts.trials_per_pair == 0 {
        return Err(Error::invalid("trials", "need at least one trial per pair"));
    }
    let scale = u64::from(particles) + sites as u64;
    let burn_in = opts.burn_in.unwrap_or(4 * scale + 64);
    let thinning = opts.thinning.unwrap_or(sites as u64);
    let max_horizon = opts.max_horizon.unwrap_or(64 * scale + 256);

    let start = class.representative(sites, particles)?;
    let refs = reference_configurations(sites, particles, opts.references, burn_in, thinning, stream.fork(1))?;

    let mut jobs: Vec<(TaggedState, RngStream)> = Vec::new();
    let runs_family = stream.fork(2);
    for (r, xi) in refs.iter().enumerate() {
        let path = adjacent_path(&start, xi)?;
        let pair_family = runs_family.child(r as u64);
        for (j, tagged) in path.tagged_starts().enumerate() {
            let trial_family = pair_family.child(j as u64);
            for i in 0..opts.trials_per_pair {
                jobs.push((tagged.clone(), trial_family.child(i)));
            }
        }
    }
    let total_pairs = jobs.len() as u64 / opts.trials_per_pair;
    let mean_path_len = total_pairs as f64 / refs.len() as f64;
    let runs = jobs.len() as u64;

    let taus: Vec<Option<u64>> = jobs
        .par_iter()
        .map(|(tagged, s)| {
            let mut chain = TaggedChain::new(tagged, *s).expect("valid tagged start");
            chain.run_until(max_horizon)
        })
        .collect();

    // survivors(t) = runs with τ > t, censored runs included.
    let mut coalesced_at = vec![0u64; max_horizon as usize + 1];
    for tau in taus.iter().flatten() {
        coalesced_at[*tau as usize] += 1;
    }
    let bound_at = |survivors: u64| {
        if runs == 0 {
            return Estimate {
                value: 0.0,
                ci_low: 0.0,
                ci_high: 0.0,
                trials: 0,
                master_seed: stream.master_seed,
            };
        }
        let (lo, hi) = wilson(survivors, runs);
        Estimate {
            value: mean_path_len * survivors as f64 / runs as f64,
            ci_low: mean_path_len * lo,
            ci_high: mean_path_len * hi,
            trials: runs,
            master_seed: stream.master_seed,
        }
    };

    let mut survivors = runs;
    let mut curve = Vec::with_capacity(max_horizon as usize + 1);
    for &c in &coalesced_at {
        survivors -= c;
        curve.push(survivors);
    }
    let time = curve.iter().position(|&s| bound_at(s).ci_high < eps).map(|t| t as u64);
    let grid_time = time.map(|t| if t == 0 { 0 } else { t.next_power_of_two() });
    let at = time.unwrap_or(max_horizon) as usize;
    Ok(MixingEstimate {
        time,
        grid_time,
        bound: bound_at(curve[at]),
        mean_path_len,
        runs,
        max_horizon,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    pub sites: usize,
    pub particles: u32,
    pub class: StartClass,
    pub estimate: MixingEstimate,
    pub trials_per_pair: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub records: Vec<ScalingRecord>,
    /// Fit of the worst-start estimates against `L`.
    pub worst_fit: Option<LinearFit>,
    /// `(L, estimate / L)` for the flat start.
    pub flat_ratios: Vec<(usize, f64)>,
}

impl ScalingResult {
    pub fn estimates(&self, class: StartClass) -> Vec<(usize, Option<u64>)> {
        self.records
            .iter()
            .filter(|r| r.class == class)
            .map(|r| (r.sites, r.estimate.time))
            .collect()
    }
}

/// Particle count `r·L`, which must be a non-negative integer.
pub fn particles_for(sites: usize, density: f64) -> Result<u32> {
    let n = density * sites as f64;
    if !(n.is_finite() && n >= 0.0) || (n - n.round()).abs() > 1e-9 || n.round() > f64::from(u32::MAX) {
        return Err(Error::invalid("r", format!("r·L = {n} is not a non-negative integer")));
    }
    Ok(n.round() as u32)
}

/// Worst- and flat-start mixing estimates for each `L` at density `r`.
pub fn scaling_experiment(
    site_list: &[usize],
    density: f64,
    eps: f64,
    stream: RngStream,
    opts: &MixingOptions,
) -> Result<ScalingResult> {
    if site_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("L", "site counts must be strictly increasing"));
    }
    let mut records = Vec::new();
    for &sites in site_list {
        let particles = particles_for(sites, density)?;
        let per_l = stream.child(sites as u64);
        for class in [StartClass::Worst, StartClass::Flat] {
            let estimate = mixing_time_upper(sites, particles, eps, class, per_l, opts)?;
            records.push(ScalingRecord {
                sites,
                particles,
                class,
                estimate,
                trials_per_pair: opts.trials_per_pair,
            });
        }
    }
    let worst_pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.class == StartClass::Worst)
        .filter_map(|r| r.estimate.time.map(|t| (r.sites as f64, t as f64)))
        .collect();
    let flat_ratios = records
        .iter()
        .filter(|r| r.class == StartClass::Flat)
        .filter_map(|r| r.estimate.time.map(|t| (r.sites, t as f64 / r.sites as f64)))
        .collect();
    Ok(ScalingResult {
        worst_fit: linear_fit(&worst_pts),
        records,
        flat_ratios,
    })
}
