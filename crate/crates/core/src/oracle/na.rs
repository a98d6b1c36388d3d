//! Negative association of Maxwell-Boltzmann occupancy indicators.
//!
//! For `m` balls in `L` bins and `K` the number of occupied bins,
//! `E[∏_x e^{λ 1{B_x>0}}] = E[e^{λK}]`, and
//! `P(K = k) = C(L, k) · Surj(m, k) / L^m` where `Surj(m, k)` counts
//! surjections of `m` labelled balls onto `k` bins.

use super::space::binomial;
use crate::error::{Error, Result};

/// Absolute slack in the comparison `lhs <= rhs`.
pub const NA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Exact distribution of the number of occupied bins.
pub fn occupied_count_law(m: u32, sites: u32) -> Result<Vec<f64>> {
    if sites == 0 {
        return Err(Error::NoSites);
    }
    let too_big = || Error::CapExceeded {
        states: u128::MAX,
        cap: u128::MAX,
    };
    let total = u128::from(sites).checked_pow(m).ok_or_else(too_big)?;
    // surj[k] = Σ_j (-1)^j C(k, j) (k − j)^m, evaluated with signed 128-bit
    // arithmetic via the recurrence Surj(n, k) = k (Surj(n−1, k−1) + Surj(n−1, k)).
    let kmax = sites.min(m) as usize;
    let mut surj = vec![0u128; kmax + 1];
    surj[0] = 1;
    for _ in 0..m {
        for k in (1..=kmax).rev() {
            surj[k] = surj[k - 1]
                .checked_add(surj[k])
                .and_then(|s| s.checked_mul(k as u128))
                .ok_or_else(too_big)?;
        }
        surj[0] = 0;
    }
    let mut law = vec![0.0; kmax + 1];
    for (k, slot) in law.iter_mut().enumerate() {
        let ways = binomial(u64::from(sites), k as u64)
            .and_then(|c| c.checked_mul(surj[k]))
            .ok_or_else(too_big)?;
        *slot = ways as f64 / total as f64;
    }
    Ok(law)
}

/// Compares `E[∏ e^{λ1{B_x>0}}]` with `∏ E[e^{λ1{B_x>0}}]` exactly.
pub fn na_check(m: u32, sites: u32, lambda: f64) -> Result<NaCheck> {
    let law = occupied_count_law(m, sites)?;
    let lhs = super::dist::compensated_sum(law.iter().enumerate().map(|(k, p)| p * (lambda * k as f64).exp()));
    let l = f64::from(sites);
    let p = 1.0 - (1.0 - 1.0 / l).powi(m as i32);
    let rhs = (1.0 + p * lambda.exp_m1()).powi(sites as i32);
    Ok(NaCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + NA_TOLERANCE,
    })
}
