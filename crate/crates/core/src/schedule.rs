//! Extrapolation weights for the accelerated iteration.
//!
//! The sequence obeys `1/τᵏ⁻¹ = (1 − τᵏ)/τᵏ`, i.e. `1/τᵏ = 1 + 1/τᵏ⁻¹`,
//! starting from a value `τ⁻¹ ∈ (0, 1)`. Unrolling gives the closed form
//! `τᵏ = 1 / (1/τ⁻¹ + k + 1)`, so `k·τᵏ → 1`.

use thiserror::Error;

/// Default value of `τ⁻¹`.
pub const DEFAULT_TAU_INIT: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("tau must lie in the open interval (0, 1), got {0}")]
    OutOfRange(f64),
}

fn check(tau: f64) -> Result<(), ScheduleError> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(ScheduleError::OutOfRange(tau))
    }
}

/// One step of the recurrence: the unique `τ` with `1/τ = 1 + 1/tau_prev`.
pub fn tau_next(tau_prev: f64) -> Result<f64, ScheduleError> {
    check(tau_prev)?;
    Ok(tau_prev / (1.0 + tau_prev))
}

/// Closed form `τᵏ = 1/(1/tau_init + k + 1)`.
pub fn tau_at(tau_init: f64, k: usize) -> Result<f64, ScheduleError> {
    check(tau_init)?;
    Ok(1.0 / (1.0 / tau_init + k as f64 + 1.0))
}

/// The sequence `τ⁰, τ¹, …` for a fixed `τ⁻¹`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauSchedule {
    tau_init: f64,
}

impl TauSchedule {
    pub fn new(tau_init: f64) -> Result<Self, ScheduleError> {
        check(tau_init)?;
        Ok(TauSchedule { tau_init })
    }

    /// The value indexed `−1`.
    pub fn tau_init(&self) -> f64 {
        self.tau_init
    }

    /// `τᵏ`, by the closed form.
    pub fn tau(&self, k: usize) -> f64 {
        1.0 / (1.0 / self.tau_init + k as f64 + 1.0)
    }

    /// Iterator over `τ⁰, τ¹, …` generated by the recurrence.
    pub fn recurrence(&self) -> impl Iterator<Item = f64> {
        std::iter::successors(Some(self.tau_init), |&t| Some(t / (1.0 + t))).skip(1)
    }
}

impl Default for TauSchedule {
    fn default() -> Self {
        TauSchedule { tau_init: DEFAULT_TAU_INIT }
    }
}
