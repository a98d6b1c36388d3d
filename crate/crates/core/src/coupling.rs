//! Couplings of two copies of the chain driven by shared randomness.
//!
//! * [`MonotonePair`]: two configurations advanced with the same assignment
//!   vector; entrywise order is preserved.
//! * [`TaggedState`]: a background configuration with `N - 1` particles plus
//!   two tagged particles at `X` and `Y`. Lifting the state gives two copies
//!   of the chain that differ by the position of one particle until the
//!   tagged particles meet.
//! * [`AdjacentPath`]: a chain of configurations in which consecutive
//!   elements differ by one particle move, used to split a distance between
//!   arbitrary starts into adjacent pairs.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::process::{self, Stepper};
use crate::rng::RngStream;
use crate::state::{AssignmentVector, Configuration};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonePair {
    lower: Configuration,
    upper: Configuration,
}

impl MonotonePair {
    pub fn new(lower: Configuration, upper: Configuration) -> Result<Self> {
        check_order(&lower, &upper)?;
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &Configuration {
        &self.lower
    }

    pub fn upper(&self) -> &Configuration {
        &self.upper
    }

    pub fn into_parts(self) -> (Configuration, Configuration) {
        (self.lower, self.upper)
    }
}

fn check_order(lower: &Configuration, upper: &Configuration) -> Result<()> {
    if lower.sites() != upper.sites() {
        return Err(Error::LengthMismatch {
            expected: lower.sites(),
            actual: upper.sites(),
        });
    }
    for (site, (&a, &b)) in lower.occ().iter().zip(upper.occ()).enumerate() {
        if a > b {
            return Err(Error::Unordered {
                site,
                lower: a,
                upper: b,
            });
        }
    }
    Ok(())
}

/// Advances both members of the pair with the same `u`.
pub fn monotone_step(pair: &MonotonePair, u: &AssignmentVector) -> Result<MonotonePair> {
    // Pairs can be built with invalid order only through `into_parts`
    // round trips, so re-check the contract here.
    check_order(&pair.lower, &pair.upper)?;
    let (lower, _) = process::step(&pair.lower, u)?;
    let (upper, _) = process::step(&pair.upper, u)?;
    MonotonePair::new(lower, upper)
}

/// Background configuration plus the positions of two tagged particles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedState {
    pub background: Configuration,
    pub x_pos: usize,
    pub y_pos: usize,
}

impl TaggedState {
    pub fn new(background: Configuration, x_pos: usize, y_pos: usize) -> Result<Self> {
        background.check_site(x_pos)?;
        background.check_site(y_pos)?;
        Ok(Self {
            background,
            x_pos,
            y_pos,
        })
    }

    /// Tagged start whose lifted copies are `zeta` and `zeta` with one
    /// particle moved from `from` to `to`.
    pub fn for_move(zeta: &Configuration, from: usize, to: usize) -> Result<Self> {
        zeta.check_site(to)?;
        let background = zeta.with_removed(from)?;
        Ok(Self {
            background,
            x_pos: from,
            y_pos: to,
        })
    }

    pub fn coalesced(&self) -> bool {
        self.x_pos == self.y_pos
    }

    pub fn sites(&self) -> usize {
        self.background.sites()
    }
}

/// One step of the tagged coupling.
///
/// The background moves by `u`. A tagged particle whose site is empty in the
/// background (it is alone in its bin) jumps to `u0`; otherwise it stays.
/// Both tagged particles use the same `u0`.
pub fn tagged_step(state: &TaggedState, u: &AssignmentVector, u0: usize) -> Result<TaggedState> {
    state.background.check_site(u0)?;
    state.background.check_site(state.x_pos)?;
    state.background.check_site(state.y_pos)?;
    let x_alone = state.background.get(state.x_pos) == 0;
    let y_alone = state.background.get(state.y_pos) == 0;
    let (background, _) = process::step(&state.background, u)?;
    Ok(TaggedState {
        background,
        x_pos: if x_alone { u0 } else { state.x_pos },
        y_pos: if y_alone { u0 } else { state.y_pos },
    })
}

/// The two copies `η^X` and `η^Y` carried by a tagged state.
pub fn lift(state: &TaggedState) -> (Configuration, Configuration) {
    let x = state
        .background
        .with_added(state.x_pos)
        .expect("tagged position in range");
    let y = state
        .background
        .with_added(state.y_pos)
        .expect("tagged position in range");
    (x, y)
}

/// Result of a coalescence run; `tau` is `None` when the run was censored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoalescenceOutcome {
    pub tau: Option<u64>,
    pub horizon: u64,
}

impl CoalescenceOutcome {
    /// `τ > t`, counting a censored run as a survivor.
    pub fn survives(&self, t: u64) -> bool {
        match self.tau {
            Some(tau) => tau > t,
            None => true,
        }
    }
}

/// A tagged chain that draws its own randomness and can be resumed.
///
/// Each step consumes `L` draws for the background assignment vector followed
/// by one draw for `u0`, whether or not a tagged particle moves.
#[derive(Debug, Clone)]
pub struct TaggedChain {
    occ: Vec<u32>,
    x: usize,
    y: usize,
    time: u64,
    stepper: Stepper,
    rng: ChaCha8Rng,
}

impl TaggedChain {
    pub fn new(state: &TaggedState, stream: RngStream) -> Result<Self> {
        state.background.check_site(state.x_pos)?;
        state.background.check_site(state.y_pos)?;
        Ok(Self {
            occ: state.background.occ().to_vec(),
            x: state.x_pos,
            y: state.y_pos,
            time: 0,
            stepper: Stepper::new(state.sites())?,
            rng: stream.rng(),
        })
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn coalesced(&self) -> bool {
        self.x == self.y
    }

    pub fn state(&self) -> TaggedState {
        TaggedState {
            background: Configuration::new(self.occ.clone()).expect("non-empty"),
            x_pos: self.x,
            y_pos: self.y,
        }
    }

    #[inline]
    pub fn step(&mut self) {
        let x_alone = self.occ[self.x] == 0;
        let y_alone = self.occ[self.y] == 0;
        self.stepper.advance(&mut self.occ, &mut self.rng);
        let u0 = self.stepper.sampler().sample(&mut self.rng) as usize;
        if x_alone {
            self.x = u0;
        }
        if y_alone {
            self.y = u0;
        }
        self.time += 1;
    }

    /// Steps until the tagged particles meet or `horizon` is reached.
    /// Returns the coalescing time if it is `<= horizon`.
    pub fn run_until(&mut self, horizon: u64) -> Option<u64> {
        while !self.coalesced() && self.time < horizon {
            self.step();
        }
        self.coalesced().then_some(self.time)
    }
}

/// First time the tagged particles share a site, censored at `t_max`.
pub fn coalescing_time(state0: &TaggedState, stream: RngStream, t_max: u64) -> Result<CoalescenceOutcome> {
    let mut chain = TaggedChain::new(state0, stream)?;
    Ok(CoalescenceOutcome {
        tau: chain.run_until(t_max),
        horizon: t_max,
    })
}

/// Sequence of adjacent configurations `ζ₀ = η, …, ζ_k = ξ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacentPath {
    chain: Vec<Configuration>,
    moves: Vec<(usize, usize)>,
}

impl AdjacentPath {
    pub fn chain(&self) -> &[Configuration] {
        &self.chain
    }

    /// Number of single-particle moves `k`.
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// `(from, to)` of the particle moved between `ζ_{j-1}` and `ζ_j`.
    pub fn moves(&self) -> &[(usize, usize)] {
        &self.moves
    }

    /// Tagged starts whose lifted copies are `(ζ_{j-1}, ζ_j)`, for `j = 1..=k`.
    pub fn tagged_starts(&self) -> impl Iterator<Item = TaggedState> + '_ {
        self.chain
            .iter()
            .zip(&self.moves)
            .map(|(zeta, &(from, to))| TaggedState::for_move(zeta, from, to).expect("valid path move"))
    }

    pub fn max_sup_norm(&self) -> u32 {
        self.chain.iter().map(Configuration::sup_norm).max().unwrap_or(0)
    }
}

/// Path from `eta` to `xi` moving one particle at a time, from the site with
/// the largest remaining excess to the site with the largest remaining
/// deficit (lowest index on ties). Its length is half the L¹ distance.
pub fn adjacent_path(eta: &Configuration, xi: &Configuration) -> Result<AdjacentPath> {
    eta.check_same_shape(xi)?;
    let mut diff: Vec<i64> = eta
        .occ()
        .iter()
        .zip(xi.occ())
        .map(|(&a, &b)| i64::from(a) - i64::from(b))
        .collect();
    let mut current = eta.clone();
    let mut chain = vec![current.clone()];
    let mut moves = Vec::new();
    loop {
        let from = argmax_by(&diff, |d| d);
        let to = argmax_by(&diff, |d| -d);
        if diff[from] <= 0 {
            break;
        }
        debug_assert!(diff[to] < 0);
        diff[from] -= 1;
        diff[to] += 1;
        let occ = current.occ_mut();
        occ[from] -= 1;
        occ[to] += 1;
        chain.push(current.clone());
        moves.push((from, to));
    }
    Ok(AdjacentPath { chain, moves })
}

fn argmax_by(values: &[i64], key: impl Fn(i64) -> i64) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if key(v) > key(values[best]) {
            best = i;
        }
    }
    best
}
