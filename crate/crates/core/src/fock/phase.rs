use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Phase-space coordinate `α = x + i y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Real point `α = √J`, as used along the Bell-scan diagonal.
    pub fn on_real_axis(j: f64) -> Self {
        Self { x: j.max(0.0).sqrt(), y: 0.0 }
    }

    pub fn alpha(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// `J = |α|²`.
    pub fn intensity(self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

impl From<Complex64> for PhasePoint {
    fn from(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }
}
