use thiserror::Error;

use crate::dims::DimExpr;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Sampled input data is unusable (non-finite values, wrong length).
    #[error("input error: {0}")]
    Input(String),

    /// The requested dimensionless time is not reachable by the time scale.
    #[error("tau = {tau} is outside the reachable range; supremum of tau(t) is approximately {supremum}")]
    Range { tau: f64, supremum: f64 },

    /// A coefficient of the reduced equation vanishes.
    #[error("singularity: 1 + (1 - alpha) P(tau) vanishes near tau = {tau}")]
    Singularity { tau: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: DimExpr, right: DimExpr },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
