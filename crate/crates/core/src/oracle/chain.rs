//! Exact transition matrix, stationary law and mixing times on small shells.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::dist::{compensated_sum, tv_dense, SparseDistribution};
use super::space::{enumerate_states, next_composition, StateSpace, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::state::Configuration;

/// L¹ tolerance for the stationary power iteration.
pub const STATIONARY_TOL: f64 = 1e-13;
/// Iteration cap for the stationary power iteration and mixing-time scans.
pub const MAX_ITERATIONS: usize = 1_000_000;

/// `ln k!` for `k = 0..=max`.
pub(crate) fn log_factorials(max: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(max + 1);
    let mut acc = 0.0f64;
    table.push(0.0);
    for k in 1..=max {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Row `P(eta, ·)` as sorted `(index, probability)` pairs.
///
/// With `m` occupied sites and `base = eta − 1{eta > 0}`, the next state is
/// `base + B` where `B` is multinomial with `m` trials and `L` equal cells.
fn row_of(space: &StateSpace, occ: &[u32], ln_fact: &[f64]) -> Vec<(usize, f64)> {
    let sites = space.sites();
    let base: Vec<u32> = occ.iter().map(|&n| n.saturating_sub(1)).collect();
    let m = occ.iter().filter(|&&n| n > 0).count() as u32;
    let ln_sites = (sites as f64).ln();
    let head = ln_fact[m as usize] - f64::from(m) * ln_sites;

    let mut arrivals = vec![0u32; sites];
    arrivals[0] = m;
    let mut next = vec![0u32; sites];
    let mut row = Vec::new();
    loop {
        let mut ln_p = head;
        for ((slot, &b), &a) in next.iter_mut().zip(&base).zip(&arrivals) {
            *slot = b + a;
            ln_p -= ln_fact[a as usize];
        }
        row.push((space.rank(&next), ln_p.exp()));
        if !next_composition(&mut arrivals) {
            break;
        }
    }
    row.sort_unstable_by_key(|&(i, _)| i);
    row
}

/// Sparse row-stochastic matrix of the chain on one shell.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn build(space: &StateSpace) -> Self {
        let ln_fact = log_factorials(space.sites().min(space.particles() as usize));
        let rows = (0..space.len())
            .into_par_iter()
            .map(|i| row_of(space, space.occ(i), &ln_fact))
            .collect();
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, index: usize) -> &[(usize, f64)] {
        &self.rows[index]
    }

    /// `v P`, accumulated row by row in index order.
    pub fn left_multiply(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (row, &w) in self.rows.iter().zip(v) {
            if w == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += w * p;
            }
        }
    }
}

/// Where a mixing-time computation starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MixingStart {
    State(Configuration),
    /// Maximum over every state of the shell.
    Worst,
}

/// Enumerated shell together with its transition matrix.
#[derive(Debug, Clone)]
pub struct ExactChain {
    space: StateSpace,
    matrix: TransitionMatrix,
}

impl ExactChain {
    pub fn new(sites: usize, particles: u32) -> Result<Self> {
        Self::with_cap(sites, particles, DEFAULT_STATE_CAP)
    }

    pub fn with_cap(sites: usize, particles: u32, cap: u128) -> Result<Self> {
        let space = enumerate_states(sites, particles, cap)?;
        let matrix = TransitionMatrix::build(&space);
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    fn sparse(&self, dense: &[f64]) -> SparseDistribution {
        SparseDistribution::from_dense(self.space.sites(), self.space.particles(), dense)
    }

    pub fn index_of(&self, eta: &Configuration) -> Result<usize> {
        self.space.index_of(eta.occ())
    }

    pub fn transition_row(&self, eta: &Configuration) -> Result<SparseDistribution> {
        let i = self.index_of(eta)?;
        let entries: BTreeMap<usize, f64> = self.matrix.row(i).iter().copied().collect();
        Ok(SparseDistribution::new(
            self.space.sites(),
            self.space.particles(),
            entries,
        ))
    }

    /// Dense stationary vector by power iteration from the uniform law,
    /// stopping once successive iterates differ by less than `tol` in L¹.
    pub fn stationary_dense(&self, tol: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let mut v = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        let mut change = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            self.matrix.left_multiply(&v, &mut next);
            let total = compensated_sum(next.iter().copied());
            for p in next.iter_mut() {
                *p /= total;
            }
            change = compensated_sum(v.iter().zip(&next).map(|(a, b)| (a - b).abs()));
            std::mem::swap(&mut v, &mut next);
            if change < tol {
                return Ok(v);
            }
        }
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            change,
        })
    }

    pub fn stationary(&self, tol: f64) -> Result<SparseDistribution> {
        Ok(self.sparse(&self.stationary_dense(tol)?))
    }

    /// Dense law of `η(t)` started from `eta`.
    pub fn distribution_at_dense(&self, eta: &Configuration, t: u64) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.len()];
        v[self.index_of(eta)?] = 1.0;
        let mut next = vec![0.0; self.len()];
        for _ in 0..t {
            self.matrix.left_multiply(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        Ok(v)
    }

    pub fn distribution_at(&self, eta: &Configuration, t: u64) -> Result<SparseDistribution> {
        Ok(self.sparse(&self.distribution_at_dense(eta, t)?))
    }

    /// `t ↦ ‖P_η^t − ν‖` for `t = 0..=t_max`.
    pub fn tv_curve(&self, eta: &Configuration, nu: &[f64], t_max: u64) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.len()];
        v[self.index_of(eta)?] = 1.0;
        let mut next = vec![0.0; self.len()];
        let mut curve = Vec::with_capacity(t_max as usize + 1);
        curve.push(tv_dense(&v, nu));
        for _ in 0..t_max {
            self.matrix.left_multiply(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
            curve.push(tv_dense(&v, nu));
        }
        Ok(curve)
    }

    fn mixing_from_index(&self, start: usize, eps: f64, nu: &[f64]) -> Result<u64> {
        let mut v = vec![0.0; self.len()];
        v[start] = 1.0;
        let mut next = vec![0.0; self.len()];
        for t in 0..MAX_ITERATIONS as u64 {
            if tv_dense(&v, nu) < eps {
                return Ok(t);
            }
            self.matrix.left_multiply(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            change: tv_dense(&v, nu),
        })
    }

    /// Smallest `t` with `‖P_η^t − ν‖ < eps`, or its maximum over all
    /// starts for [`MixingStart::Worst`].
    pub fn mixing_time_exact(&self, eps: f64, from: &MixingStart) -> Result<u64> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::invalid("eps", format!("{eps} is outside (0, 1/2)")));
        }
        let nu = self.stationary_dense(STATIONARY_TOL)?;
        match from {
            MixingStart::State(eta) => self.mixing_from_index(self.index_of(eta)?, eps, &nu),
            MixingStart::Worst => {
                let times = (0..self.len())
                    .into_par_iter()
                    .map(|i| self.mixing_from_index(i, eps, &nu))
                    .collect::<Result<Vec<u64>>>()?;
                Ok(times.into_iter().max().unwrap_or(0))
            }
        }
    }
}

/// One row of the transition matrix, enumerating the shell of `eta`.
pub fn transition_row(eta: &Configuration) -> Result<SparseDistribution> {
    let particles = u32::try_from(eta.particles()).map_err(|_| Error::invalid("eta", "too many particles"))?;
    let space = enumerate_states(eta.sites(), particles, DEFAULT_STATE_CAP)?;
    let ln_fact = log_factorials(eta.sites().min(particles as usize));
    let entries = row_of(&space, eta.occ(), &ln_fact).into_iter().collect();
    Ok(SparseDistribution::new(eta.sites(), particles, entries))
}
