//! The parallel update and everything built directly on it.
//!
//! One step removes a ball from every occupied site and sends the ball of site
//! `y` to `U_y`. The arrival vector is always derived from an assignment
//! vector, never sampled directly, so that coupled copies can share it.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{RngStream, SiteSampler};
use crate::state::{AssignmentVector, Configuration, StepRecord};

/// Applies one update to `eta` using the destinations in `u`.
pub fn step(eta: &Configuration, u: &AssignmentVector) -> Result<(Configuration, StepRecord)> {
    check_len(eta, u)?;
    let mut next = eta.clone();
    let mut arrivals = vec![0; eta.sites()];
    let removed = apply(next.occ_mut(), u.dest(), &mut arrivals);
    Ok((next, StepRecord { arrivals, removed }))
}

/// In-place update. `arrivals` is overwritten with `B(t+1)`; returns the
/// number of balls thrown.
pub(crate) fn apply(occ: &mut [u32], dest: &[u32], arrivals: &mut [u32]) -> u32 {
    arrivals.fill(0);
    let mut removed = 0;
    for (&n, &d) in occ.iter().zip(dest) {
        if n > 0 {
            arrivals[d as usize] += 1;
            removed += 1;
        }
    }
    for (n, &b) in occ.iter_mut().zip(arrivals.iter()) {
        *n = *n - u32::from(*n > 0) + b;
    }
    removed
}

fn check_len(eta: &Configuration, u: &AssignmentVector) -> Result<()> {
    if eta.sites() != u.sites() {
        return Err(Error::LengthMismatch {
            expected: eta.sites(),
            actual: u.sites(),
        });
    }
    Ok(())
}

/// Reusable scratch space for running a chain that draws its own
/// assignments.
///
/// Each call to [`Stepper::advance`] consumes exactly `L` site draws, in site
/// order, whatever the configuration; this is the same sequence
/// [`AssignmentVector::draw`] would produce.
#[derive(Debug, Clone)]
pub struct Stepper {
    sampler: SiteSampler,
    arrivals: Vec<u32>,
}

impl Stepper {
    pub fn new(sites: usize) -> Result<Self> {
        Ok(Self {
            sampler: SiteSampler::new(sites)?,
            arrivals: vec![0; sites],
        })
    }

    #[inline]
    pub fn sampler(&self) -> &SiteSampler {
        &self.sampler
    }

    /// Advances `occ` by one step with fresh destinations; returns the number
    /// of balls thrown.
    #[inline]
    pub fn advance<R: Rng + ?Sized>(&mut self, occ: &mut [u32], rng: &mut R) -> u32 {
        debug_assert_eq!(occ.len(), self.arrivals.len());
        self.arrivals.fill(0);
        let mut removed = 0;
        for &n in occ.iter() {
            let d = self.sampler.sample(rng);
            if n > 0 {
                self.arrivals[d as usize] += 1;
                removed += 1;
            }
        }
        for (n, &b) in occ.iter_mut().zip(self.arrivals.iter()) {
            *n = *n - u32::from(*n > 0) + b;
        }
        removed
    }

    /// Arrivals of the last [`Stepper::advance`].
    pub fn arrivals(&self) -> &[u32] {
        &self.arrivals
    }
}

/// Which quantities [`simulate`] records at each time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Observables {
    pub nonempty: bool,
    pub sup_norm: bool,
    pub occupancy: bool,
}

impl Observables {
    pub const NONE: Observables = Observables {
        nonempty: false,
        sup_norm: false,
        occupancy: false,
    };
    pub const ALL: Observables = Observables {
        nonempty: true,
        sup_norm: true,
        occupancy: true,
    };

    fn any(&self) -> bool {
        self.nonempty || self.sup_norm || self.occupancy
    }
}

/// Observation of `η(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub time: u64,
    pub nonempty: Option<u32>,
    pub sup_norm: Option<u32>,
    pub occupancy: Option<Vec<u32>>,
}

impl Observation {
    fn of(time: u64, eta: &Configuration, record: Observables) -> Self {
        Observation {
            time,
            nonempty: record.nonempty.then(|| eta.nonempty()),
            sup_norm: record.sup_norm.then(|| eta.sup_norm()),
            occupancy: record.occupancy.then(|| eta.occ().to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub final_state: Configuration,
    /// One entry per time `0..=horizon` when any observable is selected,
    /// otherwise empty.
    pub observations: Vec<Observation>,
}

/// Runs `horizon` steps from `eta0` with assignments drawn from `stream`.
pub fn simulate(eta0: &Configuration, horizon: u64, stream: RngStream, record: Observables) -> Result<Trajectory> {
    let mut stepper = Stepper::new(eta0.sites())?;
    let mut rng = stream.rng();
    let mut eta = eta0.clone();
    let mut observations = Vec::new();
    if record.any() {
        observations.reserve(horizon as usize + 1);
        observations.push(Observation::of(0, &eta, record));
    }
    for t in 1..=horizon {
        stepper.advance(eta.occ_mut(), &mut rng);
        if record.any() {
            observations.push(Observation::of(t, &eta, record));
        }
    }
    Ok(Trajectory {
        final_state: eta,
        observations,
    })
}

/// Places `m` balls independently and uniformly into `sites` bins and returns
/// the occupancy counts.
pub fn maxwell_boltzmann_sample(m: u64, sites: usize, stream: RngStream) -> Result<Vec<u32>> {
    let sampler = SiteSampler::new(sites)?;
    let mut rng = stream.rng();
    let mut counts = vec![0u32; sites];
    for _ in 0..m {
        counts[sampler.sample(&mut rng) as usize] += 1;
    }
    Ok(counts)
}

/// Site-wise count of every potential placement in `assignments`, occupied
/// source or not: `B̃(t)` for a run that used these vectors.
pub fn accumulated_arrivals(assignments: &[AssignmentVector], sites: usize) -> Result<Vec<u32>> {
    let mut total = vec![0u32; sites];
    for u in assignments {
        if u.sites() != sites {
            return Err(Error::LengthMismatch {
                expected: sites,
                actual: u.sites(),
            });
        }
        accumulate(&mut total, u);
    }
    Ok(total)
}

#[inline]
pub(crate) fn accumulate(total: &mut [u32], u: &AssignmentVector) {
    for &d in u.dest() {
        total[d as usize] += 1;
    }
}
