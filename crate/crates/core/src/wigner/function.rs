use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::fock::special::{factorial, laguerre};
use crate::fock::{ModeDim, PhasePoint, TwoModeDensityMatrix, HERMITIAN_TOL};
use crate::{Error, Result};

/// Largest imaginary residue tolerated when assembling a two-mode Wigner value.
pub const WIGNER_IMAG_TOL: f64 = 1e-10;

/// `W_nm(α)` for `n >= m`; the other triangle is its conjugate.
fn lower_projector(n: usize, m: usize, alpha: Complex64) -> Complex64 {
    let r2 = alpha.norm_sqr();
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let norm = (factorial(m) / factorial(n)).sqrt();
    let shift = (2.0 * alpha.conj()).powu((n - m) as u32);
    shift * (FRAC_2_PI * sign * norm * (-2.0 * r2).exp() * laguerre(m, (n - m) as f64, 4.0 * r2))
}

/// Fills `out[i·d + j] = W_ij(α)`.
pub(crate) fn projector_table(d: usize, point: PhasePoint, out: &mut [Complex64]) {
    let alpha = point.alpha();
    for n in 0..d {
        for m in 0..=n {
            let w = lower_projector(n, m, alpha);
            out[n * d + m] = w;
            out[m * d + n] = w.conj();
        }
    }
}

/// Wigner function of the operator `|i><j|` at `α`.
///
/// For `i >= j`:
/// `W_ij(α) = (2/π)(-1)^j √(j!/i!) (2ᾱ)^{i-j} e^{-2|α|²} L_j^{(i-j)}(4|α|²)`,
/// and `W_ji = conj(W_ij)`.
pub fn wigner_projector(dim: ModeDim, i: usize, j: usize, alpha: PhasePoint) -> Result<Complex64> {
    dim.check(i)?;
    dim.check(j)?;
    Ok(if i >= j {
        lower_projector(i, j, alpha.alpha())
    } else {
        lower_projector(j, i, alpha.alpha()).conj()
    })
}

pub(crate) fn wigner_state_unchecked(rho: &TwoModeDensityMatrix, a1: PhasePoint, a2: PhasePoint) -> Complex64 {
    let d = rho.dim().get();
    let mut w1 = vec![Complex64::new(0.0, 0.0); d * d];
    let mut w2 = vec![Complex64::new(0.0, 0.0); d * d];
    projector_table(d, a1, &mut w1);
    projector_table(d, a2, &mut w2);
    let dim = rho.dim();
    let entries = rho.entries();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..d {
        for l in 0..d {
            for m in 0..d {
                let wkm = w1[k * d + m];
                for n in 0..d {
                    acc += entries[dim.flat(k, l, m, n)] * wkm * w2[l * d + n];
                }
            }
        }
    }
    acc
}

/// Two-mode Wigner function `Σ ρ_klmn W_km(α1) W_ln(α2)`.
pub fn wigner_state(rho: &TwoModeDensityMatrix, a1: PhasePoint, a2: PhasePoint) -> Result<f64> {
    rho.validate_hermitian(HERMITIAN_TOL)?;
    let w = wigner_state_unchecked(rho, a1, a2);
    if w.im.abs() > WIGNER_IMAG_TOL {
        return Err(Error::Numerical(format!("Wigner value has imaginary residue {:.3e}", w.im)));
    }
    Ok(w.re)
}

/// Closed-form Wigner function of the lossy delocalized photon:
/// `(4/π²)[1 + 2η(|α1 + α2|² - 1)] exp(-2|α1|² - 2|α2|²)`.
pub fn analytic_lossy_wigner(eta: f64, a1: PhasePoint, a2: PhasePoint) -> f64 {
    let sum = (a1.alpha() + a2.alpha()).norm_sqr();
    4.0 / (PI * PI) * (1.0 + 2.0 * eta * (sum - 1.0)) * (-2.0 * a1.intensity() - 2.0 * a2.intensity()).exp()
}
