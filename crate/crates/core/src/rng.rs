//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator seeded from a 64-bit master seed and
//! positioned on the ChaCha stream selected by `stream_id`. ChaCha is a
//! counter-based cipher, so streams with distinct ids never overlap and any
//! trial can be regenerated on its own, independently of which worker ran it.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// The generator for this stream, positioned at its first draw.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Stream `index` inside a family derived from this stream.
    ///
    /// Families are keyed by a fresh master seed mixed from `(master_seed,
    /// stream_id)`, so `a.child(i)` and `b.child(j)` coincide only when
    /// `a == b` and `i == j` (up to 64-bit hash collisions).
    pub fn child(&self, index: u64) -> RngStream {
        let family = splitmix64(self.master_seed ^ splitmix64(self.stream_id ^ 0x5bd1_e995_d1b5_4a32));
        RngStream::new(family, index)
    }

    /// A stream family tagged by a small label, for splitting one seed
    /// between the phases of an experiment.
    pub fn fork(&self, tag: u64) -> RngStream {
        RngStream::new(
            splitmix64(self.master_seed.wrapping_add(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))),
            self.stream_id,
        )
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform sampler over the sites `0..sites`.
#[derive(Debug, Clone, Copy)]
pub struct SiteSampler {
    dist: Uniform<u32>,
}

impl SiteSampler {
    pub fn new(sites: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::NoSites);
        }
        let dist = Uniform::new(0, sites as u32).map_err(|e| Error::invalid("sites", e.to_string()))?;
        Ok(Self { dist })
    }

    #[inline]
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.dist.sample(rng)
    }
}
