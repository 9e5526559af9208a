//! Pattern functions `f_km(x, θ) = F_km(x) e^{-i(m-k)θ}` with
//! `F_km = d/dx [ψ_k φ_m]` for `m ≥ k` and `F_mk = F_km`.
//!
//! Averaging `f_km(x1, θ1) f_ln(x2, θ2)` over records with uniformly
//! distributed phases estimates `ρ_klmn` without bias.

use num_complex::Complex64;

use crate::fock::{scaled_irregular, scaled_regular, ModeDim};
use crate::{Error, Result};

const STACK_DIM: usize = 16;

/// Default tabulation range and step.
pub const DEFAULT_TABLE_RANGE: f64 = 6.0;
pub const DEFAULT_TABLE_STEP: f64 = 1e-4;

#[inline]
fn pair_index(d: usize, k: usize, m: usize) -> usize {
    let (a, b) = if k <= m { (k, m) } else { (m, k) };
    a * d - a * (a + 1) / 2 + b
}

/// Writes `F_km(x)` for `k ≤ m` in packed upper-triangular order.
fn packed_profiles(d: usize, x: f64, out: &mut [f64]) {
    let mut buf = [0.0; 4 * STACK_DIM];
    let mut heap;
    let scratch: &mut [f64] = if d <= STACK_DIM {
        &mut buf[..4 * d]
    } else {
        heap = vec![0.0; 4 * d];
        &mut heap
    };
    let (h, rest) = scratch.split_at_mut(d);
    let (dh, rest) = rest.split_at_mut(d);
    let (u, du) = rest.split_at_mut(d);
    scaled_regular(x, h, dh);
    scaled_irregular(x, u, du);
    let mut idx = 0;
    for k in 0..d {
        for m in k..d {
            out[idx] = dh[k] * u[m] + h[k] * du[m];
            idx += 1;
        }
    }
}

fn check_point(dim: ModeDim, k: usize, m: usize, x: f64) -> Result<()> {
    dim.check(k)?;
    dim.check(m)?;
    if !x.is_finite() {
        return Err(Error::Argument(format!("quadrature must be finite, got {x}")));
    }
    Ok(())
}

/// Real profile `F_km(x)` by direct evaluation.
pub fn pattern_profile(dim: ModeDim, k: usize, m: usize, x: f64) -> Result<f64> {
    check_point(dim, k, m, x)?;
    let d = dim.get();
    let mut packed = vec![0.0; d * (d + 1) / 2];
    packed_profiles(d, x, &mut packed);
    Ok(packed[pair_index(d, k, m)])
}

/// `f_km(x, θ)` by direct evaluation.
pub fn pattern_function(dim: ModeDim, k: usize, m: usize, x: f64, theta: f64) -> Result<Complex64> {
    let f = pattern_profile(dim, k, m, x)?;
    if !theta.is_finite() {
        return Err(Error::Argument(format!("phase must be finite, got {theta}")));
    }
    Ok(Complex64::from_polar(f, -(m as f64 - k as f64) * theta))
}

#[derive(Clone, Debug)]
enum Storage {
    Direct,
    Grid { x_min: f64, step: f64, points: usize, values: Vec<f64> },
}

/// Profiles `F_km` for every index pair, either tabulated with four-point
/// Lagrange interpolation or evaluated directly on each call. Queries
/// outside the tabulated range fall back to direct evaluation.
#[derive(Clone, Debug)]
pub struct PatternFunctionTable {
    dim: ModeDim,
    storage: Storage,
}

impl PatternFunctionTable {
    /// Tabulates on `[-range, range]` with the given step.
    pub fn tabulated(dim: ModeDim, range: f64, step: f64) -> Result<Self> {
        if !(range > 0.0 && range.is_finite() && step > 0.0 && step < range) {
            return Err(Error::Argument(format!("invalid table range {range} / step {step}")));
        }
        let d = dim.get();
        let np = d * (d + 1) / 2;
        let points = (2.0 * range / step).round() as usize + 1;
        let step = 2.0 * range / (points - 1) as f64;
        let mut values = vec![0.0; points * np];
        for (i, row) in values.chunks_exact_mut(np).enumerate() {
            packed_profiles(d, -range + i as f64 * step, row);
        }
        Ok(Self {
            dim,
            storage: Storage::Grid { x_min: -range, step, points, values },
        })
    }

    /// Default table: `[-6, 6]` at step `1e-4`.
    pub fn new(dim: ModeDim) -> Result<Self> {
        Self::tabulated(dim, DEFAULT_TABLE_RANGE, DEFAULT_TABLE_STEP)
    }

    /// No table; every query evaluates the recurrences.
    pub fn direct(dim: ModeDim) -> Self {
        Self { dim, storage: Storage::Direct }
    }

    pub fn dim(&self) -> ModeDim {
        self.dim
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.storage, Storage::Grid { .. })
    }

    /// Fills the full symmetric `d × d` profile matrix at `x` (row-major).
    pub(crate) fn profiles_into(&self, x: f64, out: &mut [f64]) {
        let d = self.dim.get();
        let np = d * (d + 1) / 2;
        let mut buf = [0.0; STACK_DIM * (STACK_DIM + 1) / 2];
        let mut heap;
        let packed: &mut [f64] = if np <= buf.len() {
            &mut buf[..np]
        } else {
            heap = vec![0.0; np];
            &mut heap
        };
        match &self.storage {
            Storage::Grid { x_min, step, points, values } if x >= *x_min && x <= x_min + (*points - 1) as f64 * step => {
                let t = (x - x_min) / step;
                let i = (t.floor() as usize).clamp(1, points - 3);
                let s = t - i as f64;
                // Lagrange weights for nodes at offsets -1, 0, 1, 2.
                let w = [
                    -s * (s - 1.0) * (s - 2.0) / 6.0,
                    (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
                    -(s + 1.0) * s * (s - 2.0) / 2.0,
                    (s + 1.0) * s * (s - 1.0) / 6.0,
                ];
                let base = (i - 1) * np;
                for (j, p) in packed.iter_mut().enumerate() {
                    *p = w[0] * values[base + j]
                        + w[1] * values[base + np + j]
                        + w[2] * values[base + 2 * np + j]
                        + w[3] * values[base + 3 * np + j];
                }
            }
            _ => packed_profiles(d, x, packed),
        }
        for k in 0..d {
            for m in k..d {
                let v = packed[pair_index(d, k, m)];
                out[k * d + m] = v;
                out[m * d + k] = v;
            }
        }
    }

    pub fn profile(&self, k: usize, m: usize, x: f64) -> Result<f64> {
        check_point(self.dim, k, m, x)?;
        let d = self.dim.get();
        let mut full = vec![0.0; d * d];
        self.profiles_into(x, &mut full);
        Ok(full[k * d + m])
    }

    pub fn pattern_function(&self, k: usize, m: usize, x: f64, theta: f64) -> Result<Complex64> {
        let f = self.profile(k, m, x)?;
        if !theta.is_finite() {
            return Err(Error::Argument(format!("phase must be finite, got {theta}")));
        }
        Ok(Complex64::from_polar(f, -(m as f64 - k as f64) * theta))
    }

    /// Fills `out[k·d + m] = f_km(x, θ)`.
    pub(crate) fn functions_into(&self, x: f64, theta: f64, profiles: &mut [f64], out: &mut [Complex64]) {
        let d = self.dim.get();
        self.profiles_into(x, profiles);
        let rot = Complex64::from_polar(1.0, -theta);
        // e^{-i(m-k)θ} = rot^m · conj(rot)^k
        let mut pk = Complex64::new(1.0, 0.0);
        for k in 0..d {
            let mut pm = Complex64::new(1.0, 0.0);
            for m in 0..d {
                out[k * d + m] = pm * pk * profiles[k * d + m];
                pm *= rot;
            }
            pk *= rot.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::regular_wavefunction;
    use std::f64::consts::TAU;

    #[test]
    fn diagonal_is_phase_independent() {
        let d = ModeDim::default();
        for k in 0..3 {
            let a = pattern_function(d, k, k, 0.37, 0.0).unwrap();
            let b = pattern_function(d, k, k, 0.37, 2.1).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let d = ModeDim::default();
        for (x, th) in [(0.2, 0.3), (-1.1, 4.0), (2.5, 1.7)] {
            let a = pattern_function(d, 0, 1, x, th).unwrap();
            let b = pattern_function(d, 1, 0, x, th).unwrap();
            assert!((a - b.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn index_errors() {
        let d = ModeDim::default();
        assert!(matches!(pattern_function(d, 3, 0, 0.0, 0.0), Err(Error::Index { .. })));
        assert!(pattern_profile(d, 0, 0, f64::NAN).is_err());
    }

    #[test]
    fn vacuum_average_of_f00_is_one() {
        // θ drops out of f_00; the x-integral alone must give one.
        let d = ModeDim::default();
        let h = 1e-3;
        let mut acc = 0.0;
        for i in -8000..=8000 {
            let x = i as f64 * h;
            let psi = regular_wavefunction(d, 0, x).unwrap();
            acc += pattern_profile(d, 0, 0, x).unwrap() * psi * psi;
        }
        assert!((acc * h - 1.0).abs() < 1e-10, "{}", acc * h);
    }

    #[test]
    fn single_mode_unbiasedness() {
        // (1/2π)∫dθ∫dx p(x,θ) f_km(x,θ) = σ_km for matrix units σ = |a><b|.
        // The phase average leaves a = k, b = m only; the rest is an x-integral.
        let dim = ModeDim::new(4).unwrap();
        let d = dim.get();
        let h = 2e-3;
        let xs: Vec<f64> = (-3500..=3500).map(|i| i as f64 * h).collect();
        let psi: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| (0..d).map(|n| regular_wavefunction(dim, n, x).unwrap()).collect())
            .collect();
        let table = PatternFunctionTable::direct(dim);
        let mut prof = vec![0.0; d * d];
        let profiles: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| {
                table.profiles_into(x, &mut prof);
                prof.clone()
            })
            .collect();
        for a in 0..d {
            for b in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        let radial: f64 = (0..xs.len()).map(|i| psi[i][a] * psi[i][b] * profiles[i][k * d + m]).sum::<f64>() * h;
                        let phases = 16;
                        let mut angular = Complex64::new(0.0, 0.0);
                        for t in 0..phases {
                            let th = TAU * t as f64 / phases as f64;
                            angular += Complex64::from_polar(1.0, (b as f64 - a as f64 - (m as f64 - k as f64)) * th);
                        }
                        let got = angular / phases as f64 * radial;
                        let want = if (k, m) == (a, b) { 1.0 } else { 0.0 };
                        assert!((got - want).norm() < 1e-7, "a={a} b={b} k={k} m={m}: {got}");
                    }
                }
            }
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let dim = ModeDim::new(4).unwrap();
        let table = PatternFunctionTable::new(dim).unwrap();
        assert!(table.is_tabulated());
        let mut worst = 0.0f64;
        let mut x = -6.3;
        while x < 6.3 {
            for k in 0..4 {
                for m in 0..4 {
                    let a = table.profile(k, m, x).unwrap();
                    let b = pattern_profile(dim, k, m, x).unwrap();
                    worst = worst.max((a - b).abs());
                }
            }
            x += 0.000_731_3;
        }
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn functions_into_matches_scalar_form() {
        let dim = ModeDim::default();
        let table = PatternFunctionTable::direct(dim);
        let mut prof = vec![0.0; 9];
        let mut out = vec![Complex64::new(0.0, 0.0); 9];
        table.functions_into(0.8, 1.3, &mut prof, &mut out);
        for k in 0..3 {
            for m in 0..3 {
                let want = pattern_function(dim, k, m, 0.8, 1.3).unwrap();
                assert!((out[k * 3 + m] - want).norm() < 1e-14);
            }
        }
    }
}
