use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Maps a phase into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// One two-mode homodyne outcome: quadratures `x1`, `x2` measured at local
/// oscillator phases `theta1`, `theta2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRecord {
    pub x1: f64,
    pub theta1: f64,
    pub x2: f64,
    pub theta2: f64,
}

impl QuadratureRecord {
    /// Checks that every field is finite and wraps both phases into `[0, 2π)`.
    pub fn new(x1: f64, theta1: f64, x2: f64, theta2: f64) -> Result<Self> {
        if ![x1, theta1, x2, theta2].iter().all(|v| v.is_finite()) {
            return Err(Error::Argument(format!(
                "record fields must be finite: ({x1}, {theta1}, {x2}, {theta2})"
            )));
        }
        Ok(Self {
            x1,
            theta1: wrap_phase(theta1),
            x2,
            theta2: wrap_phase(theta2),
        })
    }
}

/// How the common phase `θ1 + θ2` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlobalPhaseMode {
    #[default]
    UniformRandom,
}

/// The relative phase `θ2 - θ1` cycles through `relative_steps` equally
/// spaced values on `[0, 2π)`, one step per record; the global phase is
/// drawn independently for each record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub relative_steps: usize,
    #[serde(default)]
    pub global_mode: GlobalPhaseMode,
}

impl PhaseSchedule {
    pub const DEFAULT_RELATIVE_STEPS: usize = 12;

    pub fn new(relative_steps: usize) -> Result<Self> {
        if relative_steps == 0 {
            return Err(Error::Argument("phase schedule needs at least one relative step".into()));
        }
        Ok(Self {
            relative_steps,
            global_mode: GlobalPhaseMode::UniformRandom,
        })
    }

    /// Relative phase used for the record with global index `i`.
    pub fn relative_phase(&self, i: u64) -> f64 {
        TAU * (i % self.relative_steps as u64) as f64 / self.relative_steps as f64
    }

    /// `(θ1, θ2)` from a relative phase and a uniform global angle `φ`:
    /// `θ1 = φ - Δ/2`, `θ2 = φ + Δ/2`.
    pub fn phases(&self, i: u64, global: f64) -> (f64, f64) {
        let delta = self.relative_phase(i);
        (wrap_phase(global - 0.5 * delta), wrap_phase(global + 0.5 * delta))
    }
}

impl Default for PhaseSchedule {
    fn default() -> Self {
        Self::new(Self::DEFAULT_RELATIVE_STEPS).expect("default step count is positive")
    }
}
