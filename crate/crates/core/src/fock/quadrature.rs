//! Joint homodyne quadrature distributions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::wavefunction::regular_values;
use super::{TwoModeDensityMatrix, HERMITIAN_TOL};
use crate::Result;

/// Fills `out[k·d + l] = ψ_k(x1) e^{ikθ1} ψ_l(x2) e^{ilθ2}`.
///
/// With this vector the joint density is `v† ρ v` and the ideal two-mode
/// POVM element is `v v†`.
pub(crate) fn measurement_vector(d: usize, x1: f64, theta1: f64, x2: f64, theta2: f64, out: &mut [Complex64]) {
    let mut psi1 = [0.0; 16];
    let mut psi2 = [0.0; 16];
    let (psi1, psi2) = (&mut psi1[..d], &mut psi2[..d]);
    regular_values(x1, psi1);
    regular_values(x2, psi2);
    let rot1 = Complex64::from_polar(1.0, theta1);
    let rot2 = Complex64::from_polar(1.0, theta2);
    let mut phase1 = Complex64::new(1.0, 0.0);
    for k in 0..d {
        let a = phase1 * psi1[k];
        let mut phase2 = Complex64::new(1.0, 0.0);
        for l in 0..d {
            out[k * d + l] = a * phase2 * psi2[l];
            phase2 *= rot2;
        }
        phase1 *= rot1;
    }
}

/// `v† ρ v` for a precomputed measurement vector.
#[inline]
pub(crate) fn sandwich(entries: &[Complex64], v: &[Complex64]) -> f64 {
    let p = v.len();
    let mut acc = 0.0;
    for r in 0..p {
        let row = &entries[r * p..(r + 1) * p];
        let mut s = Complex64::new(0.0, 0.0);
        for (e, vc) in row.iter().zip(v) {
            s += e * vc;
        }
        acc += (v[r].conj() * s).re;
    }
    acc
}

pub(crate) fn pdf_unchecked(rho: &TwoModeDensityMatrix, x1: f64, theta1: f64, x2: f64, theta2: f64) -> f64 {
    let d = rho.dim().get();
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    measurement_vector(d, x1, theta1, x2, theta2, &mut v);
    sandwich(rho.entries(), &v)
}

/// Joint density `p(x1, θ1; x2, θ2)` of the two homodyne outcomes:
/// `Σ ρ_klmn ψ_k(x1) ψ_m(x1) ψ_l(x2) ψ_n(x2) e^{i(m-k)θ1} e^{i(n-l)θ2}`.
pub fn quadrature_pdf(rho: &TwoModeDensityMatrix, x1: f64, theta1: f64, x2: f64, theta2: f64) -> Result<f64> {
    rho.validate_hermitian(HERMITIAN_TOL)?;
    Ok(pdf_unchecked(rho, x1, theta1, x2, theta2))
}

/// Reduced single-mode state of mode 1 (`mode = 0`) or mode 2 (`mode = 1`).
pub fn reduced_state(rho: &TwoModeDensityMatrix, mode: usize) -> DMatrix<Complex64> {
    let d = rho.dim().get();
    DMatrix::from_fn(d, d, |a, b| {
        (0..d)
            .map(|t| if mode == 0 { rho.get(a, t, b, t) } else { rho.get(t, a, t, b) })
            .sum()
    })
}

/// Single-mode quadrature density `Σ σ_mn ψ_m ψ_n e^{i(n-m)θ}`.
pub fn single_mode_pdf(sigma: &DMatrix<Complex64>, x: f64, theta: f64) -> f64 {
    let d = sigma.nrows();
    let mut psi = vec![0.0; d];
    regular_values(x, &mut psi);
    let mut acc = 0.0;
    for m in 0..d {
        for n in 0..d {
            let phase = Complex64::from_polar(1.0, (n as f64 - m as f64) * theta);
            acc += (sigma[(m, n)] * phase).re * psi[m] * psi[n];
        }
    }
    acc
}
