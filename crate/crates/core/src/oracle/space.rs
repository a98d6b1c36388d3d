//! Enumeration of the conserved-particle shell.
//!
//! States are the compositions of `N` into `L` non-negative parts, in
//! colexicographic order: the last coordinate is the most significant and
//! smaller values come first. For `L = 2, N = 2` the order is
//! `(2,0), (1,1), (0,2)`.

use crate::error::{Error, Result};
use crate::state::Configuration;

/// Default bound on the number of states the oracle will enumerate.
pub const DEFAULT_STATE_CAP: u128 = 2_000_000;

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Number of compositions of `particles` into `sites` parts, `None` on
/// overflow.
pub fn shell_size(sites: usize, particles: u64) -> Option<u128> {
    if sites == 0 {
        return Some(0);
    }
    binomial(particles + sites as u64 - 1, sites as u64 - 1)
}

pub(crate) fn check_cap(sites: usize, particles: u64, cap: u128) -> Result<u128> {
    if sites == 0 {
        return Err(Error::NoSites);
    }
    match shell_size(sites, particles) {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::CapExceeded { states: n, cap }),
        None => Err(Error::CapExceeded { states: u128::MAX, cap }),
    }
}

/// Advances `occ` to the next composition in colex order. Returns `false`
/// (leaving `occ` untouched) when it is already the last one.
pub fn next_composition(occ: &mut [u32]) -> bool {
    let Some(first) = occ.iter().position(|&n| n > 0) else {
        return false;
    };
    if first + 1 == occ.len() {
        return false;
    }
    let s = occ[first];
    occ[first] = 0;
    occ[first + 1] += 1;
    occ[0] = s - 1;
    true
}

/// All configurations with `particles` particles on `sites` sites, with a
/// dense index.
#[derive(Debug, Clone)]
pub struct StateSpace {
    sites: usize,
    particles: u32,
    flat: Vec<u32>,
    len: usize,
    /// `choose[n][k] = C(n, k)` for `n <= particles + sites`, `k < sites`.
    choose: Vec<Vec<u64>>,
}

impl StateSpace {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn occ(&self, index: usize) -> &[u32] {
        &self.flat[index * self.sites..(index + 1) * self.sites]
    }

    pub fn state(&self, index: usize) -> Configuration {
        Configuration::new(self.occ(index).to_vec()).expect("non-empty")
    }

    pub fn states(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.flat.chunks_exact(self.sites)
    }

    pub fn contains(&self, occ: &[u32]) -> bool {
        occ.len() == self.sites && occ.iter().map(|&n| u64::from(n)).sum::<u64>() == u64::from(self.particles)
    }

    /// Dense index of `occ`, which must lie on this shell.
    pub fn index_of(&self, occ: &[u32]) -> Result<usize> {
        if occ.len() != self.sites {
            return Err(Error::LengthMismatch {
                expected: self.sites,
                actual: occ.len(),
            });
        }
        if !self.contains(occ) {
            return Err(Error::ParticleMismatch {
                left: occ.iter().map(|&n| u64::from(n)).sum(),
                right: u64::from(self.particles),
            });
        }
        Ok(self.rank(occ))
    }

    /// Colex rank: for each prefix `0..=i` with sum `s` and last part `v`,
    /// count the compositions of `s` into `i + 1` parts whose last part is
    /// smaller than `v`, which is `C(s+i, i) - C(s-v+i, i)`.
    pub(crate) fn rank(&self, occ: &[u32]) -> usize {
        let mut rank = 0u64;
        let mut s = u64::from(self.particles);
        for i in (1..self.sites).rev() {
            let v = u64::from(occ[i]);
            if v > 0 {
                rank += self.choose[(s + i as u64) as usize][i] - self.choose[(s - v + i as u64) as usize][i];
            }
            s -= v;
        }
        rank as usize
    }
}

/// Enumerates the shell of `particles` particles on `sites` sites, refusing
/// shells larger than `cap`.
pub fn enumerate_states(sites: usize, particles: u32, cap: u128) -> Result<StateSpace> {
    let len = check_cap(sites, u64::from(particles), cap)? as usize;
    let mut flat = Vec::with_capacity(len * sites);
    let mut occ = vec![0u32; sites];
    occ[0] = particles;
    loop {
        flat.extend_from_slice(&occ);
        if !next_composition(&mut occ) {
            break;
        }
    }
    debug_assert_eq!(flat.len(), len * sites);

    let max_n = particles as usize + sites;
    let mut choose = vec![vec![0u64; sites]; max_n + 1];
    for n in 0..=max_n {
        choose[n][0] = 1;
        for k in 1..sites.min(n + 1) {
            // Entries far from the shell may saturate; rank never reads them.
            choose[n][k] = choose[n - 1][k - 1].saturating_add(choose[n - 1][k]);
        }
    }
    Ok(StateSpace {
        sites,
        particles,
        flat,
        len,
        choose,
    })
}
