//! Resampling error bars for reconstructed quantities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::pf::check_records;
use super::{ml_estimate, pf_estimate_with_table, MLConfig, PatternFunctionTable};
use crate::fock::{log_negativity, ModeDim, PhasePoint, TwoModeDensityMatrix};
use crate::sim::QuadratureRecord;
use crate::wigner::bell_parameter;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Estimator {
    Pf {
        dim: ModeDim,
        /// Zero the elements with `k + l != m + n` after each estimate.
        #[serde(default)]
        global_phase_blocks: bool,
    },
    Ml(MLConfig),
}

impl Estimator {
    pub fn dim(&self) -> ModeDim {
        match self {
            Estimator::Pf { dim, .. } => *dim,
            Estimator::Ml(c) => c.dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub seed: u64,
    /// `J` values at which `B(√J, √J)` is tracked.
    pub bell_js: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellSpread {
    pub j: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub n_resamples: usize,
    pub seed: u64,
    /// Resamples on which the estimator or a derived quantity failed.
    pub skipped: usize,
    pub log_negativity: Spread,
    pub bell: Vec<BellSpread>,
}

fn spread(values: &[f64]) -> Spread {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Spread { mean, std: var.sqrt() }
}

fn scalars(rho: &TwoModeDensityMatrix, js: &[f64]) -> Result<(f64, Vec<f64>)> {
    let en = log_negativity(rho)?;
    let bells = js
        .iter()
        .map(|&j| {
            let a = PhasePoint::on_real_axis(j);
            bell_parameter(rho, a, a)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((en, bells))
}

/// Resamples the records with replacement `n_resamples` times, re-runs the
/// estimator and reports the spread of `E_N` and of `B` at `bell_js`.
/// Resample `r` uses stream `r` of a ChaCha20 generator seeded with `seed`.
pub fn bootstrap_uncertainty(
    records: &[QuadratureRecord],
    estimator: &Estimator,
    config: &BootstrapConfig,
) -> Result<BootstrapReport> {
    check_records(records)?;
    if config.n_resamples < 2 {
        return Err(Error::Argument("bootstrap needs at least 2 resamples".into()));
    }
    if let Some(j) = config.bell_js.iter().find(|j| !(j.is_finite() && **j >= 0.0)) {
        return Err(Error::Argument(format!("bell points need finite J >= 0, got {j}")));
    }
    let table = match estimator {
        Estimator::Pf { dim, .. } => Some(PatternFunctionTable::new(*dim)?),
        Estimator::Ml(c) => {
            c.validate()?;
            None
        }
    };
    let n = records.len();
    let mut sample = Vec::with_capacity(n);
    let mut ens = Vec::with_capacity(config.n_resamples);
    let mut bells: Vec<Vec<f64>> = vec![Vec::with_capacity(config.n_resamples); config.bell_js.len()];
    let mut skipped = 0;
    for r in 0..config.n_resamples {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        rng.set_stream(r as u64);
        sample.clear();
        sample.extend((0..n).map(|_| records[rng.random_range(0..n)]));
        let rho = match (estimator, &table) {
            (Estimator::Pf { global_phase_blocks, .. }, Some(t)) => pf_estimate_with_table(&sample, t).map(|e| {
                if *global_phase_blocks {
                    e.rho.with_global_phase_blocks()
                } else {
                    e.rho
                }
            }),
            (Estimator::Ml(c), _) => ml_estimate(&sample, c).map(|m| m.rho),
            (Estimator::Pf { .. }, None) => unreachable!("table is built for the pattern-function estimator"),
        };
        match rho.and_then(|rho| scalars(&rho, &config.bell_js)) {
            Ok((en, bs)) => {
                ens.push(en);
                bells.iter_mut().zip(bs).for_each(|(col, b)| col.push(b));
            }
            Err(_) => skipped += 1,
        }
    }
    if ens.len() < 2 {
        return Err(Error::Numerical(format!(
            "only {} of {} bootstrap resamples succeeded",
            ens.len(),
            config.n_resamples
        )));
    }
    Ok(BootstrapReport {
        n_resamples: config.n_resamples,
        seed: config.seed,
        skipped,
        log_negativity: spread(&ens),
        bell: config
            .bell_js
            .iter()
            .zip(&bells)
            .map(|(&j, col)| {
                let s = spread(col);
                BellSpread { j, mean: s.mean, std: s.std }
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{sample_records, PhaseSchedule, SimConfig, SimState};

    fn records(n: usize, seed: u64) -> Vec<QuadratureRecord> {
        sample_records(&SimConfig {
            state: SimState::Model { eta: 0.61, dim: ModeDim::default() },
            n_records: n,
            schedule: PhaseSchedule::default(),
            seed,
        })
        .unwrap()
    }

    fn pf() -> Estimator {
        Estimator::Pf {
            dim: ModeDim::default(),
            global_phase_blocks: false,
        }
    }

    fn config(n_resamples: usize) -> BootstrapConfig {
        BootstrapConfig {
            n_resamples,
            seed: 17,
            bell_js: vec![0.09],
        }
    }

    #[test]
    fn seeded_output_is_deterministic() {
        let recs = records(5_000, 1);
        let est = pf();
        let a = bootstrap_uncertainty(&recs, &est, &config(2)).unwrap();
        let b = bootstrap_uncertainty(&recs, &est, &config(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.skipped, 0);
        assert_eq!(a.bell.len(), 1);
    }

    #[test]
    fn error_shrinks_with_sample_size() {
        let est = pf();
        let small = bootstrap_uncertainty(&records(20_000, 2), &est, &config(40)).unwrap();
        let large = bootstrap_uncertainty(&records(80_000, 3), &est, &config(40)).unwrap();
        let ratio = small.log_negativity.std / large.log_negativity.std;
        // Quadrupling N halves the error; 40 resamples leave ~±25% scatter.
        assert!(ratio > 1.4 && ratio < 2.8, "{ratio}");
    }

    #[test]
    fn argument_checks() {
        let recs = records(100, 4);
        let est = pf();
        assert!(bootstrap_uncertainty(&recs, &est, &config(1)).is_err());
        assert!(bootstrap_uncertainty(&[], &est, &config(2)).is_err());
    }

    #[test]
    fn estimator_serialization() {
        let s = serde_json::to_string(&pf()).unwrap();
        assert_eq!(s, r#"{"method":"pf","dim":3,"global_phase_blocks":false}"#);
    }
}
