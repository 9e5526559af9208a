//! Single-mode homodyne POVM elements.
//!
//! The ideal element is `Π(x, θ) = |x_θ><x_θ|` with
//! `<m|Π|n> = ψ_m(x) ψ_n(x) e^{i(m-n)θ}`, so that `Tr[Π σ]` is the
//! quadrature density. A detector of efficiency `η` sees `Π_η = B_η^†(Π)`,
//! the adjoint of the loss map, which keeps `∫ Π_η dx = I` exactly in the
//! truncated space.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::loss::loss_coefficients;
use crate::fock::{regular_values, ModeDim};
use crate::{Error, Result};

/// Reusable POVM generator for one `(dim, η)` pair.
#[derive(Clone, Debug)]
pub struct SingleModePovm {
    d: usize,
    eta: f64,
    coeffs: Option<Vec<f64>>,
}

impl SingleModePovm {
    pub fn new(dim: ModeDim, eta: f64) -> Result<Self> {
        if eta == 0.0 {
            return Err(Error::Argument("efficiency 0 gives a degenerate POVM".into()));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Argument(format!("POVM efficiency must lie in (0, 1], got {eta}")));
        }
        let d = dim.get();
        let coeffs = (eta < 1.0).then(|| loss_coefficients(d, eta));
        Ok(Self { d, eta, coeffs })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Fills `out[m·d + n]` with the POVM element; `scratch` holds `d` reals
    /// and `d²` complex values are used from `ideal`.
    pub(crate) fn fill(&self, x: f64, theta: f64, psi: &mut [f64], ideal: &mut [Complex64], out: &mut [Complex64]) {
        let d = self.d;
        regular_values(x, psi);
        let rot = Complex64::from_polar(1.0, theta);
        let mut w = [Complex64::new(0.0, 0.0); 16];
        let mut ph = Complex64::new(1.0, 0.0);
        for m in 0..d {
            w[m] = ph * psi[m];
            ph *= rot;
        }
        let target: &mut [Complex64] = if self.coeffs.is_some() { ideal } else { out };
        for m in 0..d {
            for n in 0..d {
                target[m * d + n] = w[m] * w[n].conj();
            }
        }
        if let Some(c) = &self.coeffs {
            for a in 0..d {
                for b in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..=a.min(b) {
                        acc += c[((a - k) * d + (b - k)) * d + k] * ideal[(a - k) * d + (b - k)];
                    }
                    out[a * d + b] = acc;
                }
            }
        }
    }

    pub fn element(&self, x: f64, theta: f64) -> Result<DMatrix<Complex64>> {
        if !(x.is_finite() && theta.is_finite()) {
            return Err(Error::Argument(format!("POVM arguments must be finite: ({x}, {theta})")));
        }
        if self.d > 16 {
            return Err(Error::Argument("POVM elements support d <= 16".into()));
        }
        let d = self.d;
        let mut psi = vec![0.0; d];
        let mut ideal = vec![Complex64::new(0.0, 0.0); d * d];
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        self.fill(x, theta, &mut psi, &mut ideal, &mut out);
        Ok(DMatrix::from_row_slice(d, d, &out))
    }
}

/// `Π_η(x, θ)` as a `d × d` matrix.
pub fn povm_element(x: f64, theta: f64, eta: f64, dim: ModeDim) -> Result<DMatrix<Complex64>> {
    SingleModePovm::new(dim, eta)?.element(x, theta)
}
