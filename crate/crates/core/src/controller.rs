//! Discrete PID law run by each control job.
//!
//! The continuous form `Kp + Ki/s + Kd·s` is discretized with a backward-Euler
//! integral and an unfiltered backward-difference derivative, both evaluated
//! with the period in force at the sample, so the law stays consistent when the
//! feedback scheduler stretches or shrinks `h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Self {
        PidGains { kp, ki, kd }
    }

    pub(crate) fn problems(&self) -> Vec<String> {
        [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)]
            .iter()
            .filter(|(_, v)| !v.is_finite())
            .map(|(name, v)| format!("gain {name} must be finite, got {v}"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    /// Accumulated `Ki·∫e dt`.
    pub integral: f64,
    pub prev_error: f64,
    pub prev_h: f64,
}

impl PidState {
    /// Fresh state whose derivative term starts at zero for `first_error`.
    pub fn seeded(first_error: f64) -> Self {
        PidState {
            prev_error: first_error,
            ..PidState::default()
        }
    }
}

/// One PID update: `u = kp·e + I' + kd·(e − e_prev)/h` with `I' = I + ki·h·e`.
pub fn pid_step(gains: &PidGains, state: &PidState, e: f64, h: f64) -> Result<(f64, PidState)> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sampling period must be positive, got {h}"
        )));
    }
    let integral = state.integral + gains.ki * h * e;
    let derivative = gains.kd * (e - state.prev_error) / h;
    let u = gains.kp * e + integral + derivative;
    Ok((
        u,
        PidState {
            integral,
            prev_error: e,
            prev_h: h,
        },
    ))
}

/// Signed control error `r − y`. The feedback scheduler takes its magnitude.
pub fn sample_error(r: f64, y: f64) -> f64 {
    r - y
}

/// A PID instance that seeds itself from its first sample.
#[derive(Debug, Clone)]
pub struct PidController {
    pub gains: PidGains,
    state: Option<PidState>,
}

impl PidController {
    pub fn new(gains: PidGains) -> Self {
        PidController { gains, state: None }
    }

    pub fn reset(&mut self) {
        self.state = None;
    }

    pub fn state(&self) -> Option<&PidState> {
        self.state.as_ref()
    }

    pub fn step(&mut self, e: f64, h: f64) -> Result<f64> {
        let state = self.state.unwrap_or_else(|| PidState::seeded(e));
        let (u, next) = pid_step(&self.gains, &state, e, h)?;
        self.state = Some(next);
        Ok(u)
    }
}
