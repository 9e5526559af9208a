//! Regular and irregular harmonic-oscillator wavefunctions.
//!
//! Both families solve `y'' = (4x² - 4n - 2) y`, the oscillator equation in
//! the quadrature convention with vacuum variance 1/4. They are evaluated in
//! scaled form, `ψ_n = exp(-x²) h_n` and `φ_n = exp(x²) u_n`, so that the
//! products entering pattern functions never overflow: `ψ_k φ_m = h_k u_m`.
//!
//! Higher orders come from the raising operator `a† = x - ½ d/dx`, which maps
//! solutions of order `n` to order `n + 1` (regular or not) and leaves the
//! Wronskian unchanged.

use std::f64::consts::{FRAC_2_PI, SQRT_2};

use super::special::dawson;
use super::ModeDim;
use crate::{Error, Result};

/// Wronskian `ψ_n φ_n' - ψ_n' φ_n` shared by every order.
///
/// This value makes the pattern-function average of each matrix unit
/// reproduce the corresponding density-matrix element; with it, the vacuum
/// expectation of `F_00` is exactly one.
pub const IRREGULAR_WRONSKIAN: f64 = 2.0;

fn ground_amplitude() -> f64 {
    FRAC_2_PI.sqrt().sqrt()
}

/// Fills `h[n]`, `dh[n]` with the polynomial parts of `ψ_n` and their derivatives.
pub(crate) fn scaled_regular(x: f64, h: &mut [f64], dh: &mut [f64]) {
    debug_assert_eq!(h.len(), dh.len());
    if h.is_empty() {
        return;
    }
    h[0] = ground_amplitude();
    dh[0] = 0.0;
    for n in 0..h.len() - 1 {
        let s = ((n + 1) as f64).sqrt();
        h[n + 1] = (2.0 * x * h[n] - 0.5 * dh[n]) / s;
        dh[n + 1] = 2.0 * s * h[n];
    }
}

/// Fills `u[n]`, `du[n]` with the scaled irregular solutions `exp(-x²) φ_n`
/// and their derivatives.
pub(crate) fn scaled_irregular(x: f64, u: &mut [f64], du: &mut [f64]) {
    debug_assert_eq!(u.len(), du.len());
    if u.is_empty() {
        return;
    }
    // exp(-2x²) ∫₀ˣ exp(2t²) dt
    let g = dawson(SQRT_2 * x) / SQRT_2;
    let scale = IRREGULAR_WRONSKIAN / ground_amplitude();
    u[0] = scale * g;
    du[0] = scale * (1.0 - 4.0 * x * g);
    for n in 0..u.len() - 1 {
        let s = ((n + 1) as f64).sqrt();
        u[n + 1] = -0.5 * du[n] / s;
        du[n + 1] = (2.0 * (n + 1) as f64 * u[n] + 2.0 * x * du[n]) / s;
    }
}

/// `ψ_0(x) .. ψ_{len-1}(x)` written into `out`.
pub(crate) fn regular_values(x: f64, out: &mut [f64]) {
    let mut h = [0.0; 16];
    let mut dh = [0.0; 16];
    let weight = (-x * x).exp();
    if out.len() <= h.len() {
        let n = out.len();
        scaled_regular(x, &mut h[..n], &mut dh[..n]);
        for (o, v) in out.iter_mut().zip(&h[..n]) {
            *o = v * weight;
        }
    } else {
        let mut h = vec![0.0; out.len()];
        let mut dh = vec![0.0; out.len()];
        scaled_regular(x, &mut h, &mut dh);
        for (o, v) in out.iter_mut().zip(&h) {
            *o = v * weight;
        }
    }
}

fn check_args(dim: ModeDim, n: usize, x: f64) -> Result<()> {
    dim.check(n)?;
    if !x.is_finite() {
        return Err(Error::Argument(format!("quadrature must be finite, got {x}")));
    }
    Ok(())
}

/// Normalized oscillator eigenfunction
/// `ψ_n(x) = (2/π)^{1/4} (2ⁿ n!)^{-1/2} H_n(√2 x) exp(-x²)`.
pub fn regular_wavefunction(dim: ModeDim, n: usize, x: f64) -> Result<f64> {
    check_args(dim, n, x)?;
    let mut out = vec![0.0; n + 1];
    regular_values(x, &mut out);
    Ok(out[n])
}

/// Second, non-normalizable solution `φ_n` of the oscillator equation, with
/// parity opposite to `ψ_n` and Wronskian [`IRREGULAR_WRONSKIAN`].
///
/// Grows like `exp(x²)`, so it overflows for `|x|` beyond roughly 26.
pub fn irregular_wavefunction(dim: ModeDim, n: usize, x: f64) -> Result<f64> {
    check_args(dim, n, x)?;
    let mut u = vec![0.0; n + 1];
    let mut du = vec![0.0; n + 1];
    scaled_irregular(x, &mut u, &mut du);
    Ok(u[n] * (x * x).exp())
}

/// `ψ_n φ_n' - ψ_n' φ_n` evaluated at `x`.
pub fn wronskian(dim: ModeDim, n: usize, x: f64) -> Result<f64> {
    check_args(dim, n, x)?;
    let len = n + 1;
    let (mut h, mut dh, mut u, mut du) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    scaled_regular(x, &mut h, &mut dh);
    scaled_irregular(x, &mut u, &mut du);
    // ψ' = e^{-x²}(h' - 2xh), φ' = e^{x²}(u' + 2xu); exponentials cancel.
    Ok(h[n] * (du[n] + 2.0 * x * u[n]) - (dh[n] - 2.0 * x * h[n]) * u[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: usize) -> ModeDim {
        ModeDim::new(d).unwrap()
    }

    #[test]
    fn ground_state_at_origin() {
        let v = regular_wavefunction(dim(3), 0, 0.0).unwrap();
        assert!((v - FRAC_2_PI.powf(0.25)).abs() < 1e-15);
        assert!((v - 0.8932438417).abs() < 1e-9);
        assert_eq!(regular_wavefunction(dim(3), 1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_forms_low_orders() {
        let c = FRAC_2_PI.powf(0.25);
        for &x in &[-1.3f64, -0.2, 0.4, 2.1] {
            let e = (-x * x).exp();
            let p1 = regular_wavefunction(dim(3), 1, x).unwrap();
            let p2 = regular_wavefunction(dim(3), 2, x).unwrap();
            // H_1(y) = 2y, H_2(y) = 4y² - 2 with y = √2 x
            assert!((p1 - c * 2.0 * x * e).abs() < 1e-14);
            let y = SQRT_2 * x;
            assert!((p2 - c * (4.0 * y * y - 2.0) / 8f64.sqrt() * e).abs() < 1e-14);
        }
    }

    #[test]
    fn index_and_argument_errors() {
        assert!(matches!(regular_wavefunction(dim(3), 3, 0.0), Err(Error::Index { index: 3, dim: 3 })));
        assert!(matches!(irregular_wavefunction(dim(2), 2, 0.0), Err(Error::Index { .. })));
        assert!(matches!(regular_wavefunction(dim(3), 0, f64::NAN), Err(Error::Argument(_))));
    }

    #[test]
    fn orthonormal_by_quadrature() {
        // Trapezoid on a Gaussian-decaying integrand converges spectrally.
        let d = 5;
        let h = 0.005;
        let n = (12.0 / h) as usize;
        let mut gram = vec![0.0; d * d];
        let mut vals = vec![0.0; d];
        for i in 0..=n {
            let x = -6.0 + i as f64 * h;
            regular_values(x, &mut vals);
            for a in 0..d {
                for b in 0..d {
                    gram[a * d + b] += h * vals[a] * vals[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * d + b] - expect).abs() < 1e-8, "({a},{b}) {}", gram[a * d + b]);
            }
        }
    }

    #[test]
    fn irregular_parity_and_origin() {
        assert_eq!(irregular_wavefunction(dim(3), 0, 0.0).unwrap(), 0.0);
        for n in 0..4 {
            for &x in &[0.3, 1.1, 2.5] {
                let a = irregular_wavefunction(dim(4), n, x).unwrap();
                let b = irregular_wavefunction(dim(4), n, -x).unwrap();
                let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                assert!((a - sign * b).abs() < 1e-12 * a.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn wronskian_is_constant() {
        for n in 0..6 {
            for i in 0..=80 {
                let x = -4.0 + 0.1 * i as f64;
                let w = wronskian(dim(6), n, x).unwrap();
                assert!((w - IRREGULAR_WRONSKIAN).abs() < 1e-8, "n={n} x={x} w={w}");
            }
        }
    }

    #[test]
    fn irregular_solves_oscillator_equation() {
        let step = 1e-3;
        for n in 0..3 {
            for &x in &[-1.7, -0.4, 0.25, 1.3] {
                let f = |t: f64| irregular_wavefunction(dim(3), n, t).unwrap();
                let second = (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
                let rhs = (4.0 * x * x - 4.0 * n as f64 - 2.0) * f(x);
                assert!((second - rhs).abs() < 1e-5 * rhs.abs().max(1.0), "n={n} x={x}");
            }
        }
    }
}
