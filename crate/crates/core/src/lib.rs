//! Prediction-correction splitting methods for convex programs and saddle
//! problems, with an accelerated variant driven by an extrapolation schedule.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block;
pub mod error;
pub mod framework;
pub mod linalg;
pub mod problems;
pub mod prox;
pub mod rates;
pub mod schedule;
pub mod solvers;

pub use block::{BlockLayout, BlockVector};
pub use error::{Error, Result};
pub use framework::{
    certify, run, ConvergenceCertificate, CorrectionSpec, IterationTrace, Mode, Predictor, RunOptions,
};
pub use linalg::{Matrix, Vector};
pub use problems::{Family, InstanceDocument, InstanceSpec, VariationalInstance};
pub use prox::ProxOp;
pub use rates::{fit_rate, RateReport};
pub use schedule::TauSchedule;
pub use solvers::{MultiBlockSolver, MultiBlockSpec, SaddleSolver, SaddleSpec, TwoBlockSolver, TwoBlockSpec};
