//! Chain states and the randomness that drives one update.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SiteSampler;

/// Occupation numbers of `L` sites; the state of the chain.
///
/// The total particle count is fixed at construction and every operation in
/// the crate conserves it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    occ: Vec<u32>,
}

impl Configuration {
    pub fn new(occ: Vec<u32>) -> Result<Self> {
        if occ.is_empty() {
            return Err(Error::NoSites);
        }
        Ok(Self { occ })
    }

    /// All sites empty.
    pub fn empty(sites: usize) -> Result<Self> {
        Self::new(vec![0; sites])
    }

    /// All `particles` stacked on site 0: the configuration with the largest
    /// sup-norm on its shell.
    pub fn worst(sites: usize, particles: u32) -> Result<Self> {
        if sites == 0 {
            return Err(Error::NoSites);
        }
        let mut occ = vec![0; sites];
        occ[0] = particles;
        Ok(Self { occ })
    }

    /// Balanced configuration: every site holds `⌊N/L⌋` or `⌈N/L⌉`, the larger
    /// counts on the lowest indices.
    pub fn flat(sites: usize, particles: u32) -> Result<Self> {
        if sites == 0 {
            return Err(Error::NoSites);
        }
        let base = particles / sites as u32;
        let extra = (particles % sites as u32) as usize;
        let occ = (0..sites).map(|x| base + u32::from(x < extra)).collect();
        Ok(Self { occ })
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.occ.len()
    }

    pub fn particles(&self) -> u64 {
        self.occ.iter().map(|&n| u64::from(n)).sum()
    }

    #[inline]
    pub fn occ(&self) -> &[u32] {
        &self.occ
    }

    #[inline]
    pub(crate) fn occ_mut(&mut self) -> &mut [u32] {
        &mut self.occ
    }

    #[inline]
    pub fn get(&self, site: usize) -> u32 {
        self.occ[site]
    }

    /// Largest occupation number.
    pub fn sup_norm(&self) -> u32 {
        self.occ.iter().copied().max().unwrap_or(0)
    }

    /// Number of occupied sites.
    pub fn nonempty(&self) -> u32 {
        self.occ.iter().filter(|&&n| n > 0).count() as u32
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.occ
    }

    /// `true` when `self[x] <= other[x]` at every site.
    pub fn le_entrywise(&self, other: &Configuration) -> bool {
        self.sites() == other.sites() && self.occ.iter().zip(&other.occ).all(|(a, b)| a <= b)
    }

    /// Copy with one particle added at `site`.
    pub fn with_added(&self, site: usize) -> Result<Configuration> {
        self.check_site(site)?;
        let mut occ = self.occ.clone();
        occ[site] += 1;
        Ok(Configuration { occ })
    }

    /// Copy with one particle removed from `site`, which must be occupied.
    pub fn with_removed(&self, site: usize) -> Result<Configuration> {
        self.check_site(site)?;
        if self.occ[site] == 0 {
            return Err(Error::invalid("site", format!("site {site} is empty")));
        }
        let mut occ = self.occ.clone();
        occ[site] -= 1;
        Ok(Configuration { occ })
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.sites() {
            return Err(Error::SiteOutOfRange {
                index: site,
                sites: self.sites(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_same_shape(&self, other: &Configuration) -> Result<()> {
        if self.sites() != other.sites() {
            return Err(Error::LengthMismatch {
                expected: self.sites(),
                actual: other.sites(),
            });
        }
        if self.particles() != other.particles() {
            return Err(Error::ParticleMismatch {
                left: self.particles(),
                right: other.particles(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.occ.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

/// Destinations `U(t)` for one parallel update: `dest[y]` is the site that
/// receives the ball removed from site `y`, if `y` is occupied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentVector {
    dest: Vec<u32>,
}

impl AssignmentVector {
    pub fn new(dest: Vec<u32>) -> Result<Self> {
        let sites = dest.len();
        if sites == 0 {
            return Err(Error::NoSites);
        }
        if let Some(&bad) = dest.iter().find(|&&d| d as usize >= sites) {
            return Err(Error::SiteOutOfRange {
                index: bad as usize,
                sites,
            });
        }
        Ok(Self { dest })
    }

    /// Draws `sites` i.i.d. uniform destinations.
    pub fn draw<R: Rng + ?Sized>(sampler: &SiteSampler, sites: usize, rng: &mut R) -> Self {
        let dest = (0..sites).map(|_| sampler.sample(rng)).collect();
        Self { dest }
    }

    /// Refills in place with fresh uniform destinations.
    pub fn redraw<R: Rng + ?Sized>(&mut self, sampler: &SiteSampler, rng: &mut R) {
        for d in &mut self.dest {
            *d = sampler.sample(rng);
        }
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.dest.len()
    }

    #[inline]
    pub fn dest(&self) -> &[u32] {
        &self.dest
    }
}

/// Bookkeeping of one update: arrivals `B(t+1)` and the active fraction `w̄(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub arrivals: Vec<u32>,
    /// Number of occupied sites before the update (balls thrown).
    pub removed: u32,
}

impl StepRecord {
    /// Fraction of occupied sites before the update.
    pub fn nonempty_fraction(&self) -> f64 {
        f64::from(self.removed) / self.arrivals.len() as f64
    }
}
