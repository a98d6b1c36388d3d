use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected} sites, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("particle count mismatch: {left} vs {right}")]
    ParticleMismatch { left: u64, right: u64 },

    #[error("site index {index} out of range for {sites} sites")]
    SiteOutOfRange { index: usize, sites: usize },

    #[error("a configuration needs at least one site")]
    NoSites,

    #[error("monotone pair is not ordered at site {site}: {lower} > {upper}")]
    Unordered { site: usize, lower: u32, upper: u32 },

    #[error("state space with {states} states exceeds the cap of {cap}")]
    CapExceeded { states: u128, cap: u128 },

    #[error("power iteration did not converge after {iterations} iterations (last change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("distributions live on different state spaces")]
    SpaceMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
