//! Occupation-number tails and the probability of few empty sites.

use rayon::prelude::*;

use super::stats::{linear_fit, Estimate};
use crate::error::{Error, Result};
use crate::process::Stepper;
use crate::rng::RngStream;
use crate::state::Configuration;

/// Default per-step drift of a busy site: one ball leaves, and arrivals at a
/// busy site are close to Poisson with mean `1/e` below one.
pub const DEFAULT_DRIFT: f64 = 0.632;
/// Drifts reported alongside the main fit.
pub const SENSITIVITY_DRIFTS: [f64; 3] = [0.25, 0.5, 0.632];
/// A level enters the tail fit only with at least this many hits.
pub const MIN_FIT_HITS: u64 = 50;
pub const MIN_TAIL_TRIALS: u64 = 1_000;

/// Exponential fit `ln P(level a) ≈ intercept − rate · a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    /// Decay rate; positive for a decaying tail (the fitted slope is `-rate`).
    pub rate: f64,
    /// Fitted log-prefactor.
    pub intercept: f64,
    /// Drift used for the thresholds.
    pub drift: f64,
    pub r_squared: f64,
    /// Number of levels that entered the fit.
    pub levels_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelEstimate {
    pub level: f64,
    pub drift: f64,
    pub hits: u64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationTail {
    /// Estimates at the main drift, one per level.
    pub levels: Vec<LevelEstimate>,
    /// `None` when fewer than two levels reach [`MIN_FIT_HITS`].
    pub fit: Option<TailFit>,
    /// Estimates and fits for each drift in the sensitivity set.
    pub sensitivity: Vec<(Vec<LevelEstimate>, Option<TailFit>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailOptions {
    pub drift: f64,
    pub sensitivity: Vec<f64>,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            drift: DEFAULT_DRIFT,
            sensitivity: SENSITIVITY_DRIFTS.to_vec(),
        }
    }
}

/// Thermalization time `(⌊2r⌋ ∨ 1) + ⌈‖η₀‖∞ / drift⌉`.
pub fn thermalization_time(eta0: &Configuration, drift: f64) -> u64 {
    let r = eta0.particles() as f64 / eta0.sites() as f64;
    let base = ((2.0 * r).floor() as u64).max(1);
    base + (f64::from(eta0.sup_norm()) / drift).ceil() as u64
}

/// Smallest integer occupation meeting `max(η_x(0) − drift·t, 0) + a`.
fn integer_threshold(start: u32, drift: f64, t: u64, level: f64) -> i64 {
    let thr = (f64::from(start) - drift * t as f64).max(0.0) + level;
    // Thresholds within rounding of an integer count as that integer.
    (thr - 1e-9).ceil() as i64
}

fn fit_levels(levels: &[LevelEstimate], drift: f64) -> Option<TailFit> {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .filter(|l| l.hits >= MIN_FIT_HITS)
        .map(|l| (l.level, l.estimate.value.ln()))
        .collect();
    linear_fit(&pts).map(|f| TailFit {
        rate: -f.slope,
        intercept: f.intercept,
        drift,
        r_squared: f.r_squared,
        levels_used: f.points,
    })
}

/// Fraction of (trial, site) pairs with `η_x(t) ≥ max(η_x(0) − α t, 0) + a`
/// for every level `a`, plus an exponential fit of the tail.
pub fn occupation_tail(
    eta0: &Configuration,
    t: u64,
    levels: &[f64],
    trials: u64,
    stream: RngStream,
    opts: &TailOptions,
) -> Result<OccupationTail> {
    if t == 0 {
        return Err(Error::invalid("t", "must be at least 1"));
    }
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::invalid("trials", format!("must be at least {MIN_TAIL_TRIALS}")));
    }
    if levels.is_empty() {
        return Err(Error::invalid("levels", "no levels given"));
    }
    let sites = eta0.sites();
    let mut drifts = vec![opts.drift];
    drifts.extend(opts.sensitivity.iter().copied());
    for &d in &drifts {
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::invalid("drift", format!("{d} is not a non-negative number")));
        }
    }
    // thresholds[(d * levels + k) * sites + x]
    let mut thresholds = Vec::with_capacity(drifts.len() * levels.len() * sites);
    for &d in &drifts {
        for &a in levels {
            thresholds.extend(eta0.occ().iter().map(|&n| integer_threshold(n, d, t, a)));
        }
    }
    let cells = drifts.len() * levels.len();

    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || {
                (
                    vec![0u64; cells],
                    Stepper::new(sites).expect("sites > 0"),
                    eta0.occ().to_vec(),
                )
            },
            |(mut acc, mut stepper, mut occ), trial| {
                occ.copy_from_slice(eta0.occ());
                let mut rng = stream.child(trial).rng();
                for _ in 0..t {
                    stepper.advance(&mut occ, &mut rng);
                }
                for (cell, slot) in acc.iter_mut().enumerate() {
                    let thr = &thresholds[cell * sites..(cell + 1) * sites];
                    *slot += occ.iter().zip(thr).filter(|(&n, &h)| i64::from(n) >= h).count() as u64;
                }
                (acc, stepper, occ)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let pairs = trials * sites as u64;
    let per_drift: Vec<(Vec<LevelEstimate>, Option<TailFit>)> = drifts
        .iter()
        .enumerate()
        .map(|(di, &d)| {
            let est: Vec<LevelEstimate> = levels
                .iter()
                .enumerate()
                .map(|(k, &a)| {
                    let hits = counts[di * levels.len() + k];
                    LevelEstimate {
                        level: a,
                        drift: d,
                        hits,
                        estimate: Estimate::proportion(hits, pairs, stream.master_seed),
                    }
                })
                .collect();
            let fit = fit_levels(&est, d);
            (est, fit)
        })
        .collect();
    let mut per_drift = per_drift.into_iter();
    let (levels, fit) = per_drift.next().expect("main drift present");
    Ok(OccupationTail {
        levels,
        fit,
        sensitivity: per_drift.collect(),
    })
}

/// Proportion of trials with `w̄(t) ≥ 1 − eps`.
pub fn empty_fraction_tail(eta0: &Configuration, t: u64, eps: f64, trials: u64, stream: RngStream) -> Result<Estimate> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid("eps", format!("{eps} is outside [0, 1]")));
    }
    let sites = eta0.sites();
    let needed = (1.0 - eps) * sites as f64 - 1e-9 * sites as f64;
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || (Stepper::new(sites).expect("sites > 0"), eta0.occ().to_vec()),
            |(stepper, occ), trial| {
                occ.copy_from_slice(eta0.occ());
                let mut rng = stream.child(trial).rng();
                for _ in 0..t {
                    stepper.advance(occ, &mut rng);
                }
                let nonempty = occ.iter().filter(|&&n| n > 0).count();
                u64::from(nonempty as f64 >= needed)
            },
        )
        .sum();
    Ok(Estimate::proportion(hits, trials, stream.master_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ExactChain;

    fn cfg(v: &[u32]) -> Configuration {
        Configuration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(integer_threshold(3, 0.632, 3, 1.0), 3);
        assert_eq!(integer_threshold(3, 1.0, 3, 1.0), 1);
        assert_eq!(integer_threshold(0, 0.632, 3, -2.0), -2);
        assert_eq!(integer_threshold(5, 0.5, 2, 0.0), 4);
    }

    #[test]
    fn negative_level_always_met() {
        let out = occupation_tail(
            &cfg(&[1, 1, 1, 1]),
            3,
            &[-1.0, 0.0],
            1000,
            RngStream::new(1, 0),
            &TailOptions::default(),
        )
        .unwrap();
        assert_eq!(out.levels[0].estimate.value, 1.0);
        assert_eq!(out.levels[1].estimate.value, 1.0);
        assert_eq!(out.sensitivity.len(), 3);
    }

    #[test]
    fn rejects_bad_parameters() {
        let eta = cfg(&[1, 1]);
        let o = TailOptions::default();
        assert!(occupation_tail(&eta, 0, &[1.0], 1000, RngStream::new(1, 0), &o).is_err());
        assert!(occupation_tail(&eta, 1, &[1.0], 999, RngStream::new(1, 0), &o).is_err());
        assert!(empty_fraction_tail(&eta, 1, 1.5, 10, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn fit_refused_without_hits() {
        // Levels far beyond the particle count never fire.
        let out = occupation_tail(
            &cfg(&[1, 1]),
            2,
            &[10.0, 11.0],
            1000,
            RngStream::new(2, 0),
            &TailOptions::default(),
        )
        .unwrap();
        assert!(out.fit.is_none());
        assert!(out.levels.iter().all(|l| l.hits == 0));
    }

    #[test]
    fn occupation_tail_matches_oracle() {
        let eta0 = cfg(&[3, 0, 0]);
        let chain = ExactChain::new(3, 3).unwrap();
        let law = chain.distribution_at_dense(&eta0, 3).unwrap();
        for drift in [1.0, DEFAULT_DRIFT] {
            // Oracle: average over sites of P(η_x(3) ≥ threshold_x).
            let mut exact = 0.0;
            for (i, &p) in law.iter().enumerate() {
                let occ = chain.space().occ(i);
                for (x, &n) in occ.iter().enumerate() {
                    if i64::from(n) >= integer_threshold(eta0.get(x), drift, 3, 1.0) {
                        exact += p / 3.0;
                    }
                }
            }
            let opts = TailOptions {
                drift,
                sensitivity: vec![],
            };
            let out = occupation_tail(&eta0, 3, &[1.0], 20_000, RngStream::new(17, 0), &opts).unwrap();
            let est = out.levels[0].estimate;
            assert!(est.within_sigmas(exact, 4.0), "drift {drift}: {est:?} vs {exact}");
        }
    }

    #[test]
    fn empty_fraction_trivial_cases() {
        let e = empty_fraction_tail(&cfg(&[2, 0, 1]), 3, 1.0, 500, RngStream::new(3, 0)).unwrap();
        assert_eq!(e.value, 1.0);
        let e = empty_fraction_tail(&cfg(&[1, 1, 1]), 0, 0.25, 100, RngStream::new(3, 0)).unwrap();
        assert_eq!(e.value, 1.0);
        let e = empty_fraction_tail(&cfg(&[3, 0, 0]), 0, 0.25, 100, RngStream::new(3, 0)).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn empty_fraction_matches_oracle() {
        let eta0 = cfg(&[3, 0, 0]);
        let chain = ExactChain::new(3, 3).unwrap();
        let law = chain.distribution_at_dense(&eta0, 2).unwrap();
        let exact: f64 = law
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let nonempty = chain.space().occ(*i).iter().filter(|&&n| n > 0).count();
                nonempty as f64 / 3.0 >= 0.75
            })
            .map(|(_, &p)| p)
            .sum();
        let est = empty_fraction_tail(&eta0, 2, 0.25, 20_000, RngStream::new(5, 0)).unwrap();
        assert!(est.within_sigmas(exact, 4.0), "{est:?} vs {exact}");
    }

    #[test]
    fn thermalization() {
        assert_eq!(thermalization_time(&cfg(&[1, 1, 1, 1]), 0.5), 2 + 2);
        assert_eq!(thermalization_time(&cfg(&[4, 0, 0, 0]), 1.0), 2 + 4);
    }
}
