//! Exact law of the tagged coupling `(background, X, Y)` on small shells.
//!
//! The background moves by its own transition matrix; given the background
//! before the step, each tagged particle that is alone jumps to a shared
//! uniform site `u0`, independent of the background move.

use super::chain::ExactChain;
use crate::coupling::TaggedState;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ExactTaggedChain {
    background: ExactChain,
}

impl ExactTaggedChain {
    /// Joint chain whose background carries `background_particles`.
    pub fn new(sites: usize, background_particles: u32) -> Result<Self> {
        Ok(Self {
            background: ExactChain::new(sites, background_particles)?,
        })
    }

    pub fn background(&self) -> &ExactChain {
        &self.background
    }

    fn sites(&self) -> usize {
        self.background.space().sites()
    }

    fn encode(&self, bg: usize, x: usize, y: usize) -> usize {
        let l = self.sites();
        (bg * l + x) * l + y
    }

    fn initial(&self, start: &TaggedState) -> Result<Vec<f64>> {
        let l = self.sites();
        if start.sites() != l {
            return Err(Error::LengthMismatch {
                expected: l,
                actual: start.sites(),
            });
        }
        start.background.check_site(start.x_pos)?;
        start.background.check_site(start.y_pos)?;
        let bg = self.background.index_of(&start.background)?;
        let mut v = vec![0.0; self.background.len() * l * l];
        v[self.encode(bg, start.x_pos, start.y_pos)] = 1.0;
        Ok(v)
    }

    fn advance(&self, v: &[f64], out: &mut [f64]) {
        let l = self.sites();
        let space = self.background.space();
        let matrix = self.background.matrix();
        let share = 1.0 / l as f64;
        out.fill(0.0);
        for (state, &w) in v.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let y = state % l;
            let x = (state / l) % l;
            let bg = state / (l * l);
            let occ = space.occ(bg);
            let x_alone = occ[x] == 0;
            let y_alone = occ[y] == 0;
            for &(next_bg, p) in matrix.row(bg) {
                if !x_alone && !y_alone {
                    out[self.encode(next_bg, x, y)] += w * p;
                    continue;
                }
                let mass = w * p * share;
                for u0 in 0..l {
                    let nx = if x_alone { u0 } else { x };
                    let ny = if y_alone { u0 } else { y };
                    out[self.encode(next_bg, nx, ny)] += mass;
                }
            }
        }
    }

    fn uncoalesced_mass(&self, v: &[f64]) -> f64 {
        let l = self.sites();
        super::dist::compensated_sum(
            v.iter()
                .enumerate()
                .filter(|(s, _)| (s / l) % l != s % l)
                .map(|(_, &w)| w),
        )
    }

    /// `P(τ > t)` for `t = 0..=t_max`.
    pub fn survival(&self, start: &TaggedState, t_max: u64) -> Result<Vec<f64>> {
        let mut v = self.initial(start)?;
        let mut next = vec![0.0; v.len()];
        let mut curve = Vec::with_capacity(t_max as usize + 1);
        curve.push(self.uncoalesced_mass(&v));
        for _ in 0..t_max {
            self.advance(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
            curve.push(self.uncoalesced_mass(&v));
        }
        Ok(curve)
    }

    /// Dense laws of the lifted copies `η^X(t)` and `η^Y(t)`, indexed in
    /// `lifted`'s state space.
    pub fn lifted_laws(&self, start: &TaggedState, t: u64, lifted: &ExactChain) -> Result<(Vec<f64>, Vec<f64>)> {
        let l = self.sites();
        let mut v = self.initial(start)?;
        let mut next = vec![0.0; v.len()];
        for _ in 0..t {
            self.advance(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        let mut law_x = vec![0.0; lifted.len()];
        let mut law_y = vec![0.0; lifted.len()];
        let mut occ = vec![0u32; l];
        for (state, &w) in v.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let y = state % l;
            let x = (state / l) % l;
            let bg = state / (l * l);
            occ.copy_from_slice(self.background.space().occ(bg));
            occ[x] += 1;
            law_x[lifted.space().index_of(&occ)?] += w;
            occ[x] -= 1;
            occ[y] += 1;
            law_y[lifted.space().index_of(&occ)?] += w;
        }
        Ok((law_x, law_y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dist::tv_dense;
    use crate::state::Configuration;

    fn cfg(v: &[u32]) -> Configuration {
        Configuration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_site_survival_by_hand() {
        // Background (1,0), X on the busy site, Y alone. Y jumps onto X with
        // probability 1/2 at the first step.
        let chain = ExactTaggedChain::new(2, 1).unwrap();
        let start = TaggedState::new(cfg(&[1, 0]), 0, 1).unwrap();
        let s = chain.survival(&start, 3).unwrap();
        assert_eq!(s[0], 1.0);
        assert!((s[1] - 0.5).abs() < 1e-15);
        assert!(s.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn coalesced_start_stays_coalesced() {
        let chain = ExactTaggedChain::new(3, 2).unwrap();
        let start = TaggedState::new(cfg(&[1, 1, 0]), 2, 2).unwrap();
        let s = chain.survival(&start, 5).unwrap();
        assert!(s.iter().all(|&p| p.abs() < 1e-15));
    }

    #[test]
    fn lifted_copies_follow_the_chain() {
        let lifted = ExactChain::new(3, 3).unwrap();
        let chain = ExactTaggedChain::new(3, 2).unwrap();
        let start = TaggedState::new(cfg(&[1, 1, 0]), 0, 2).unwrap();
        for t in 0..5 {
            let (lx, ly) = chain.lifted_laws(&start, t, &lifted).unwrap();
            let px = lifted.distribution_at_dense(&cfg(&[2, 1, 0]), t).unwrap();
            let py = lifted.distribution_at_dense(&cfg(&[1, 1, 1]), t).unwrap();
            assert!(tv_dense(&lx, &px) < 1e-12, "t={t}");
            assert!(tv_dense(&ly, &py) < 1e-12, "t={t}");
        }
    }
}
