use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Preparation and detection efficiencies that compose the overall `η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyModel {
    /// Single-photon preparation efficiency.
    pub eta_p: f64,
    /// Photodiode quantum efficiency.
    pub eta_pd: f64,
    /// Mode matching with the local oscillator.
    pub eta_mm: f64,
    /// Detection efficiency `η_PD · optical · η_MM`.
    pub eta_d: f64,
    /// Overall efficiency.
    pub eta: f64,
}

fn unit(name: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Argument(format!("{name} must lie in [0, 1], got {v}")))
    }
}

impl EfficiencyModel {
    /// Composes `η = η_p · η_PD · optical · η_MM`.
    pub fn from_components(eta_p: f64, eta_pd: f64, optical: f64, eta_mm: f64) -> Result<Self> {
        let eta_p = unit("eta_p", eta_p)?;
        let eta_pd = unit("eta_pd", eta_pd)?;
        let optical = unit("optical transmission", optical)?;
        let eta_mm = unit("eta_mm", eta_mm)?;
        let eta_d = eta_pd * optical * eta_mm;
        Ok(Self {
            eta_p,
            eta_pd,
            eta_mm,
            eta_d,
            eta: eta_p * eta_d,
        })
    }

    /// From a preparation efficiency and a lumped detection efficiency.
    pub fn from_preparation_detection(eta_p: f64, eta_d: f64) -> Result<Self> {
        let eta_p = unit("eta_p", eta_p)?;
        let eta_d = unit("eta_d", eta_d)?;
        Ok(Self {
            eta_p,
            eta_pd: 1.0,
            eta_mm: 1.0,
            eta_d,
            eta: eta_p * eta_d,
        })
    }

    /// An overall efficiency given directly, with no breakdown.
    pub fn overall(eta: f64) -> Result<Self> {
        let eta = unit("eta", eta)?;
        Ok(Self {
            eta_p: 1.0,
            eta_pd: 1.0,
            eta_mm: 1.0,
            eta_d: eta,
            eta,
        })
    }

    /// Budget of the reported setup: `η_p = 0.85`, `η_d = 0.74`, which
    /// itself contains `η_PD = 0.88` and `η_MM = 0.86`.
    pub fn reported_setup() -> Self {
        Self {
            eta_p: 0.85,
            eta_pd: 0.88,
            eta_mm: 0.86,
            eta_d: 0.74,
            eta: 0.85 * 0.74,
        }
    }

    /// Implied optical transmission `η_d / (η_PD · η_MM)`.
    pub fn optical_transmission(&self) -> f64 {
        self.eta_d / (self.eta_pd * self.eta_mm)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_p", self.eta_p),
            ("eta_pd", self.eta_pd),
            ("eta_mm", self.eta_mm),
            ("eta_d", self.eta_d),
            ("eta", self.eta),
        ] {
            unit(name, v)?;
        }
        let bound = self.eta_p.min(self.eta_d).min(self.eta_pd).min(self.eta_mm);
        if self.eta > bound + 1e-12 {
            return Err(Error::Validation(format!(
                "overall efficiency {} exceeds its smallest factor {bound}",
                self.eta
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reported_budget() {
        let e = EfficiencyModel::reported_setup();
        e.validate().unwrap();
        assert!((e.eta - 0.629).abs() < 1e-12);
        // Roughly 0.98 of the light survives the optics.
        assert!((e.optical_transmission() - 0.74 / (0.88 * 0.86)).abs() < 1e-12);
        assert!(e.optical_transmission() <= 1.0);
    }

    #[test]
    fn components_compose() {
        let e = EfficiencyModel::from_components(0.9, 0.8, 1.0, 0.5).unwrap();
        assert!((e.eta_d - 0.4).abs() < 1e-15);
        assert!((e.eta - 0.36).abs() < 1e-15);
        e.validate().unwrap();
        assert!(EfficiencyModel::from_components(1.1, 0.8, 1.0, 0.5).is_err());
        assert!(EfficiencyModel::overall(-0.1).is_err());
    }

    #[test]
    fn inconsistent_overall_is_rejected() {
        let mut e = EfficiencyModel::from_preparation_detection(0.5, 0.5).unwrap();
        e.eta = 0.6;
        assert!(e.validate().is_err());
    }
}
