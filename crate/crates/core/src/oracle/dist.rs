use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Probability mass over the dense indices of one state space, identified by
/// `(sites, particles)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDistribution {
    sites: usize,
    particles: u32,
    entries: BTreeMap<usize, f64>,
}

impl SparseDistribution {
    pub fn new(sites: usize, particles: u32, entries: BTreeMap<usize, f64>) -> Self {
        Self {
            sites,
            particles,
            entries,
        }
    }

    pub fn point_mass(sites: usize, particles: u32, index: usize) -> Self {
        Self::new(sites, particles, BTreeMap::from([(index, 1.0)]))
    }

    /// Keeps the non-zero entries of a dense vector.
    pub fn from_dense(sites: usize, particles: u32, dense: &[f64]) -> Self {
        let entries = dense
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(i, &p)| (i, p))
            .collect();
        Self::new(sites, particles, entries)
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        for (&i, &p) in &self.entries {
            v[i] = p;
        }
        v
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries.get(&index).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> &BTreeMap<usize, f64> {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&i, &p)| (i, p))
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.entries.values().copied())
    }

    pub(crate) fn same_space(&self, other: &SparseDistribution) -> bool {
        self.sites == other.sites && self.particles == other.particles
    }
}

/// Total variation distance `½ Σ |p − q|`.
pub fn tv_exact(p: &SparseDistribution, q: &SparseDistribution) -> Result<f64> {
    if !p.same_space(q) {
        return Err(Error::SpaceMismatch);
    }
    let mut diffs = Vec::with_capacity(p.entries.len() + q.entries.len());
    for (&i, &pi) in &p.entries {
        diffs.push((pi - q.get(i)).abs());
    }
    for (&i, &qi) in &q.entries {
        if !p.entries.contains_key(&i) {
            diffs.push(qi.abs());
        }
    }
    Ok((0.5 * compensated_sum(diffs)).clamp(0.0, 1.0))
}

/// Total variation between dense vectors over the same space.
pub(crate) fn tv_dense(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    (0.5 * compensated_sum(p.iter().zip(q).map(|(a, b)| (a - b).abs()))).clamp(0.0, 1.0)
}
