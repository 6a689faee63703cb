use thiserror::Error;

use crate::linalg::LinalgError;
use crate::schedule::ScheduleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("block structure mismatch: {0}")]
    Structure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("correction matrix M is singular ({0})")]
    SingularCorrection(LinalgError),
    #[error("Q M^-1 is not symmetric: asymmetry {asymmetry:e} exceeds {allowed:e}")]
    AsymmetricWeight { asymmetry: f64, allowed: f64 },
    #[error("subproblem for block {block} failed: {reason}")]
    Subproblem { block: String, reason: String },
    #[error("convergence condition not certified (H pivot {h_min_pivot:e}, G pivot {g_min_pivot:e})")]
    Uncertified { h_min_pivot: f64, g_min_pivot: f64 },
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error("rate fit: {0}")]
    RateFit(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
