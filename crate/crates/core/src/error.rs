use thiserror::Error;

/// Errors produced by the network, generating-function and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("rank {rank} out of range for depth {depth}")]
    RankOutOfRange { rank: u32, depth: u32 },

    #[error("invalid vertex label: {0}")]
    InvalidLabel(String),

    #[error("enumeration size {size} exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },

    /// The vacancy probability sits exactly on the critical value, where no limit is defined.
    #[error("threshold: limit not defined at q = q_c = {q_c}")]
    Threshold { q_c: f64 },

    /// The requested quantity needs q > 1/b (supercritical branching) or another regime bound.
    #[error("numeric regime violated: {0}")]
    Regime(String),

    #[error("root finding did not converge: {0}")]
    NoConvergence(String),

    #[error("denominator roots out of order: {0}")]
    RootOrdering(String),

    #[error("rank mismatch: {0}")]
    RankMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "probability {q} not in [0, 1]"
        )))
    }
}
