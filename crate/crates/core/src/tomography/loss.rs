//! Photon-loss (Bernoulli) maps and their inverse.
//!
//! A beam splitter of transmissivity `η` acts on one mode as
//! `<m|B_η(σ)|n> = Σ_k √(C(m+k,k) C(n+k,k)) η^{(m+n)/2} (1-η)^k <m+k|σ|n+k>`.
//! The series only moves weight towards lower photon numbers, so in a
//! truncated space the maps form an exact one-parameter family with
//! `B_a ∘ B_b = B_{ab}`; the inverse is `B_{1/η}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::special::binomial;
use crate::fock::{PsdReport, TwoModeDensityMatrix};
use crate::{Error, Result};

/// `c[(m·d + n)·d + k]`, zero where `max(m, n) + k ≥ d`.
pub(crate) fn loss_coefficients(d: usize, t: f64) -> Vec<f64> {
    let mut c = vec![0.0; d * d * d];
    for m in 0..d {
        for n in 0..d {
            let base = t.sqrt().powi((m + n) as i32);
            for k in 0..d - m.max(n) {
                c[(m * d + n) * d + k] =
                    (binomial(m + k, k) * binomial(n + k, k)).sqrt() * base * (1.0 - t).powi(k as i32);
            }
        }
    }
    c
}

fn apply(rho: &TwoModeDensityMatrix, t: f64) -> TwoModeDensityMatrix {
    let dim = rho.dim();
    let d = dim.get();
    let c = loss_coefficients(d, t);
    let mut out = TwoModeDensityMatrix::zeros(dim);
    for k in 0..d {
        for l in 0..d {
            for m in 0..d {
                for n in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..d - k.max(m) {
                        let ca = c[(k * d + m) * d + a];
                        for b in 0..d - l.max(n) {
                            acc += ca * c[(l * d + n) * d + b] * rho.get(k + a, l + b, m + a, n + b);
                        }
                    }
                    out.set(k, l, m, n, acc);
                }
            }
        }
    }
    if rho.has_global_phase_blocks() {
        out = out.with_global_phase_blocks();
    }
    out
}

/// Applies the loss map with transmissivity `eta ∈ [0, 1]` to both modes.
pub fn bernoulli_map(rho: &TwoModeDensityMatrix, eta: f64) -> Result<TwoModeDensityMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Argument(format!("efficiency must lie in [0, 1], got {eta}")));
    }
    Ok(apply(rho, eta))
}

/// Output of [`inverse_bernoulli`]. Noise in the input can push the result
/// out of the PSD cone; `psd` records by how much.
#[derive(Clone, Debug)]
pub struct InverseBernoulli {
    pub rho: TwoModeDensityMatrix,
    pub eta: f64,
    pub psd: PsdReport,
}

impl InverseBernoulli {
    /// The PSD projection of the corrected matrix.
    pub fn clipped(&self) -> Result<TwoModeDensityMatrix> {
        self.rho.psd_projected()
    }
}

/// Undoes [`bernoulli_map`] for `eta ∈ (0, 1]`; the result is hermitized
/// and renormalized to unit trace but not clipped.
pub fn inverse_bernoulli(rho: &TwoModeDensityMatrix, eta: f64) -> Result<InverseBernoulli> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Argument(format!("inverse loss map needs efficiency in (0, 1], got {eta}")));
    }
    let out = apply(rho, 1.0 / eta).hermitized().normalized()?;
    let psd = out.psd_report()?;
    Ok(InverseBernoulli { rho: out, eta, psd })
}

/// Efficiency inferred from the vacuum population, `η = 1 - ρ_0000`.
pub fn auto_efficiency(rho: &TwoModeDensityMatrix) -> Result<f64> {
    let eta = 1.0 - rho.get(0, 0, 0, 0).re;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Numerical(format!(
            "vacuum population {} does not give an efficiency in (0, 1]",
            1.0 - eta
        )));
    }
    Ok(eta)
}

/// Where the efficiency used for a correction came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaSource {
    Auto,
    Explicit,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{model_state, ModeDim};

    fn single_mode_one_photon(d: ModeDim) -> TwoModeDensityMatrix {
        TwoModeDensityMatrix::fock(d, 1, 0).unwrap()
    }

    #[test]
    fn unit_efficiency_is_identity() {
        let d = ModeDim::default();
        let rho = model_state(0.4, d).unwrap();
        assert_eq!(bernoulli_map(&rho, 1.0).unwrap(), rho);
    }

    #[test]
    fn one_photon_decays_to_vacuum() {
        let d = ModeDim::default();
        let out = bernoulli_map(&single_mode_one_photon(d), 0.3).unwrap();
        assert!((out.get(1, 0, 1, 0).re - 0.3).abs() < 1e-15);
        assert!((out.get(0, 0, 0, 0).re - 0.7).abs() < 1e-15);
        assert!((out.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn loss_on_pure_photon_gives_model() {
        let d = ModeDim::default();
        for eta in [0.0, 0.25, 0.61, 0.9] {
            let out = bernoulli_map(&model_state(1.0, d).unwrap(), eta).unwrap();
            assert!(out.max_abs_diff(&model_state(eta, d).unwrap()).unwrap() < 1e-14);
        }
    }

    #[test]
    fn inverse_restores_pure_photon() {
        let d = ModeDim::default();
        let inv = inverse_bernoulli(&model_state(0.61, d).unwrap(), 0.61).unwrap();
        assert!(inv.rho.max_abs_diff(&model_state(1.0, d).unwrap()).unwrap() < 1e-14);
        assert!(inv.psd.is_psd());
    }

    #[test]
    fn two_photon_binomial_weights() {
        let d = ModeDim::default();
        let out = bernoulli_map(&TwoModeDensityMatrix::fock(d, 2, 2).unwrap(), 0.5).unwrap();
        // Each mode: |2> -> 1/4 |2> + 1/2 |1> + 1/4 |0>
        assert!((out.get(2, 2, 2, 2).re - 1.0 / 16.0).abs() < 1e-15);
        assert!((out.get(1, 1, 1, 1).re - 1.0 / 4.0).abs() < 1e-15);
        assert!((out.get(0, 1, 0, 1).re - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn argument_checks() {
        let d = ModeDim::default();
        let rho = model_state(0.5, d).unwrap();
        assert!(bernoulli_map(&rho, 1.5).is_err());
        assert!(inverse_bernoulli(&rho, 0.0).is_err());
        assert!(inverse_bernoulli(&rho, -0.1).is_err());
        assert!((auto_efficiency(&rho).unwrap() - 0.5).abs() < 1e-15);
        assert!(auto_efficiency(&TwoModeDensityMatrix::vacuum(d)).is_err());
    }

    #[test]
    fn noisy_input_reports_negativity() {
        let d = ModeDim::default();
        let mut rho = model_state(0.61, d).unwrap();
        rho.set(0, 0, 0, 0, Complex64::new(0.30, 0.0));
        let inv = inverse_bernoulli(&rho.normalized().unwrap(), 0.61).unwrap();
        assert!(!inv.psd.is_psd());
        let clipped = inv.clipped().unwrap();
        assert!(clipped.min_eigenvalue().unwrap() > -1e-12);
    }
}
