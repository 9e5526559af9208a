//! Maximum-likelihood reconstruction by the expectation-maximization
//! iteration `ρ ← N[R(ρ) ρ R(ρ)]`, `R(ρ) = Σ_j w_j Π_j / (W Tr[Π_j ρ])`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pf::check_records;
use super::SingleModePovm;
use crate::fock::{ModeDim, TwoModeDensityMatrix};
use crate::sim::{wrap_phase, QuadratureRecord};
use crate::{Error, Result};

const CHUNK: usize = 8192;
/// Records whose probability falls below this are skipped and counted.
pub const UNDERFLOW_PROBABILITY: f64 = 1e-300;
/// Allowed log-likelihood decrease per accepted step.
pub const MONOTONE_SLACK: f64 = 1e-9;
const MIN_DILUTION: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MLConfig {
    pub dim: ModeDim,
    /// Detector efficiency folded into the POVM; `None` means ideal detection.
    pub eta: Option<f64>,
    pub max_iters: usize,
    /// Stop once successive iterates are this close in trace distance.
    pub convergence_tol: f64,
    /// Keep only elements with `k + l = m + n`.
    pub enforce_global_phase_blocks: bool,
}

impl MLConfig {
    pub const DEFAULT_MAX_ITERS: usize = 2000;
    pub const DEFAULT_TOL: f64 = 1e-8;

    pub fn new(dim: ModeDim) -> Self {
        Self {
            dim,
            eta: None,
            max_iters: Self::DEFAULT_MAX_ITERS,
            convergence_tol: Self::DEFAULT_TOL,
            enforce_global_phase_blocks: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Argument(format!("convergence tolerance must be positive, got {}", self.convergence_tol)));
        }
        if self.dim.get() > 16 {
            return Err(Error::Argument("maximum-likelihood reconstruction supports d <= 16".into()));
        }
        if let Some(eta) = self.eta {
            SingleModePovm::new(self.dim, eta)?;
        }
        Ok(())
    }
}

impl Default for MLConfig {
    fn default() -> Self {
        Self::new(ModeDim::default())
    }
}

/// Histogram resolution for [`ml_estimate_binned`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub x_width: f64,
    /// Quadratures are clamped to `[-x_range, x_range]`.
    pub x_range: f64,
    /// Bins on `[0, 2π)`, centred on multiples of `2π / phase_bins`.
    pub phase_bins: usize,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self {
            x_width: 0.05,
            x_range: 6.0,
            phase_bins: 24,
        }
    }
}

impl BinSpec {
    fn validate(&self) -> Result<()> {
        if !(self.x_width > 0.0 && self.x_range > self.x_width && self.phase_bins > 0) {
            return Err(Error::Argument(format!("invalid bin specification {self:?}")));
        }
        Ok(())
    }

    fn x_bin(&self, x: f64) -> i64 {
        let lim = (self.x_range / self.x_width).floor() as i64;
        ((x / self.x_width).round() as i64).clamp(-lim, lim)
    }

    fn phase_bin(&self, theta: f64) -> i64 {
        ((wrap_phase(theta) / (TAU / self.phase_bins as f64)).round() as i64).rem_euclid(self.phase_bins as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MlStatus {
    Converged,
    /// The iteration budget ran out; the last iterate is returned.
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct MlResult {
    pub rho: TwoModeDensityMatrix,
    pub status: MlStatus,
    pub iterations: usize,
    /// Mean log-likelihood per record, starting with the initial state.
    pub log_likelihood: Vec<f64>,
    pub underflow_records: u64,
    pub observations: usize,
    pub binning: Option<BinSpec>,
}

#[derive(Clone, Copy, Debug)]
struct Observation {
    weight: f64,
    x1: f64,
    theta1: f64,
    x2: f64,
    theta2: f64,
}

/// One record per observation.
pub fn ml_estimate(records: &[QuadratureRecord], config: &MLConfig) -> Result<MlResult> {
    check_records(records)?;
    config.validate()?;
    let obs: Vec<Observation> = records
        .iter()
        .map(|r| Observation {
            weight: 1.0,
            x1: r.x1,
            theta1: r.theta1,
            x2: r.x2,
            theta2: r.theta2,
        })
        .collect();
    run(&obs, config, None)
}

/// Records grouped into histogram cells, each represented by its centre.
///
/// With global-phase blocks enforced only `θ2 - θ1` is binned, since the
/// likelihood of a block-diagonal state does not depend on `θ1 + θ2`.
pub fn ml_estimate_binned(records: &[QuadratureRecord], config: &MLConfig, bins: BinSpec) -> Result<MlResult> {
    check_records(records)?;
    config.validate()?;
    bins.validate()?;
    let mut counts: BTreeMap<(i64, i64, i64, i64), f64> = BTreeMap::new();
    for r in records {
        let key = if config.enforce_global_phase_blocks {
            (bins.x_bin(r.x1), 0, bins.x_bin(r.x2), bins.phase_bin(r.theta2 - r.theta1))
        } else {
            (bins.x_bin(r.x1), bins.phase_bin(r.theta1), bins.x_bin(r.x2), bins.phase_bin(r.theta2))
        };
        *counts.entry(key).or_insert(0.0) += 1.0;
    }
    let step = TAU / bins.phase_bins as f64;
    let obs: Vec<Observation> = counts
        .into_iter()
        .map(|((i1, t1, i2, t2), w)| Observation {
            weight: w,
            x1: i1 as f64 * bins.x_width,
            theta1: t1 as f64 * step,
            x2: i2 as f64 * bins.x_width,
            theta2: t2 as f64 * step,
        })
        .collect();
    run(&obs, config, Some(bins))
}

/// Flat `(row, col)` indices the iteration touches.
fn active_elements(dim: ModeDim, blocks: bool) -> Vec<(usize, usize, usize, usize)> {
    let d = dim.get();
    let mut out = Vec::new();
    for k in 0..d {
        for l in 0..d {
            for m in 0..d {
                for n in 0..d {
                    if !blocks || k + l == m + n {
                        out.push((k, l, m, n));
                    }
                }
            }
        }
    }
    out
}

struct Pass {
    log_likelihood: f64,
    r: Vec<Complex64>,
    underflow: u64,
}

struct Engine<'a> {
    obs: &'a [Observation],
    povm: SingleModePovm,
    d: usize,
    active: Vec<(usize, usize, usize, usize)>,
    total_weight: f64,
}

impl Engine<'_> {
    fn chunk(&self, obs: &[Observation], rho: &[Complex64]) -> Pass {
        let d = self.d;
        let p2 = d * d;
        let mut r = vec![Complex64::new(0.0, 0.0); p2 * p2];
        let mut psi = [0.0; 16];
        let mut ideal = [Complex64::new(0.0, 0.0); 256];
        let mut a = [Complex64::new(0.0, 0.0); 256];
        let mut b = [Complex64::new(0.0, 0.0); 256];
        let mut terms = vec![Complex64::new(0.0, 0.0); self.active.len()];
        let idx: Vec<(usize, usize, usize)> = self
            .active
            .iter()
            .map(|&(k, l, m, n)| ((k * d + l) * p2 + m * d + n, m * d + k, n * d + l))
            .collect();
        let mut ll = 0.0;
        let mut underflow = 0;
        for o in obs {
            self.povm.fill(o.x1, o.theta1, &mut psi[..d], &mut ideal[..p2], &mut a[..p2]);
            self.povm.fill(o.x2, o.theta2, &mut psi[..d], &mut ideal[..p2], &mut b[..p2]);
            let mut p = 0.0;
            for (t, &(flat, ia, ib)) in terms.iter_mut().zip(&idx) {
                // A_mk B_nl = conj(<kl|Π|mn>)
                *t = a[ia] * b[ib];
                p += (*t * rho[flat]).re;
            }
            if !(p > UNDERFLOW_PROBABILITY) {
                underflow += 1;
                continue;
            }
            ll += o.weight * p.ln();
            let s = o.weight / p;
            for (t, &(flat, _, _)) in terms.iter().zip(&idx) {
                r[flat] += t.conj() * s;
            }
        }
        Pass {
            log_likelihood: ll,
            r,
            underflow,
        }
    }

    fn pass(&self, rho: &TwoModeDensityMatrix) -> Pass {
        let entries = rho.entries();
        let parts: Vec<Pass> = self.obs.par_chunks(CHUNK).map(|c| self.chunk(c, entries)).collect();
        let p2 = self.d * self.d;
        let mut total = Pass {
            log_likelihood: 0.0,
            r: vec![Complex64::new(0.0, 0.0); p2 * p2],
            underflow: 0,
        };
        for part in parts {
            total.log_likelihood += part.log_likelihood;
            total.underflow += part.underflow;
            total.r.iter_mut().zip(&part.r).for_each(|(x, y)| *x += y);
        }
        total.log_likelihood /= self.total_weight;
        total.r.iter_mut().for_each(|x| *x /= self.total_weight);
        total
    }
}

fn finish_step(m: DMatrix<Complex64>, dim: ModeDim, blocks: bool) -> Result<TwoModeDensityMatrix> {
    let mut next = TwoModeDensityMatrix::from_matrix(dim, &m)?.hermitized();
    if blocks {
        next = next.with_global_phase_blocks();
    }
    next.psd_projected()
}

/// `R ρ R` when `dilution` is `None`, otherwise `(I + εR) ρ (I + εR)`.
fn step(rho: &TwoModeDensityMatrix, r: &[Complex64], dilution: Option<f64>, blocks: bool) -> Result<TwoModeDensityMatrix> {
    let dim = rho.dim();
    let p2 = dim.pairs();
    let mut rm = DMatrix::from_row_slice(p2, p2, r);
    if let Some(eps) = dilution {
        rm *= Complex64::new(eps, 0.0);
        for i in 0..p2 {
            rm[(i, i)] += 1.0;
        }
    }
    let m = &rm * rho.to_matrix() * &rm;
    finish_step(m, dim, blocks)
}

fn run(obs: &[Observation], config: &MLConfig, binning: Option<BinSpec>) -> Result<MlResult> {
    let dim = config.dim;
    let blocks = config.enforce_global_phase_blocks;
    let engine = Engine {
        obs,
        povm: SingleModePovm::new(dim, config.eta.unwrap_or(1.0))?,
        d: dim.get(),
        active: active_elements(dim, blocks),
        total_weight: obs.iter().map(|o| o.weight).sum(),
    };
    let p2 = dim.pairs();
    let mut init = vec![Complex64::new(0.0, 0.0); p2 * p2];
    for i in 0..p2 {
        init[i * p2 + i] = Complex64::new(1.0 / p2 as f64, 0.0);
    }
    let mut rho = TwoModeDensityMatrix::from_entries(dim, init)?;
    if blocks {
        rho = rho.with_global_phase_blocks();
    }
    let mut current = engine.pass(&rho);
    let mut trace = vec![current.log_likelihood];
    let mut status = MlStatus::MaxIterations;
    let mut iterations = 0;

    while iterations < config.max_iters {
        iterations += 1;
        let mut dilution = None;
        let accepted = loop {
            let candidate = step(&rho, &current.r, dilution, blocks)?;
            let next = engine.pass(&candidate);
            if !next.log_likelihood.is_finite() {
                return Err(Error::Numerical("log-likelihood is not finite".into()));
            }
            if next.log_likelihood >= current.log_likelihood - MONOTONE_SLACK {
                break Some((candidate, next));
            }
            let eps = dilution.map_or(1.0, |e: f64| 0.5 * e);
            if eps < MIN_DILUTION {
                break None;
            }
            dilution = Some(eps);
        };
        let Some((candidate, next)) = accepted else {
            // No ascent direction left: the current iterate is stationary.
            status = MlStatus::Converged;
            break;
        };
        let distance = candidate.trace_distance(&rho)?;
        rho = candidate;
        current = next;
        trace.push(current.log_likelihood);
        if distance < config.convergence_tol {
            status = MlStatus::Converged;
            break;
        }
    }

    Ok(MlResult {
        rho,
        status,
        iterations,
        log_likelihood: trace,
        underflow_records: current.underflow,
        observations: obs.len(),
        binning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{delocalized_photon, model_state};
    use crate::sim::{sample_records, PhaseSchedule, SimConfig, SimState};

    fn records(eta: f64, n: usize, seed: u64) -> Vec<QuadratureRecord> {
        sample_records(&SimConfig {
            state: SimState::Model { eta, dim: ModeDim::default() },
            n_records: n,
            schedule: PhaseSchedule::default(),
            seed,
        })
        .unwrap()
    }

    #[test]
    fn config_validation() {
        let mut c = MLConfig::default();
        assert!(c.validate().is_ok());
        c.max_iters = 0;
        assert!(c.validate().is_err());
        let mut c = MLConfig::default();
        c.convergence_tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = MLConfig::default();
        c.eta = Some(0.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn vacuum_data_gives_vacuum() {
        let recs = records(0.0, 20_000, 1);
        let mut c = MLConfig::default();
        c.max_iters = 300;
        let res = ml_estimate(&recs, &c).unwrap();
        assert!(res.rho.get(0, 0, 0, 0).re > 0.98, "{}", res.rho.get(0, 0, 0, 0));
    }

    #[test]
    fn likelihood_is_monotone_and_state_physical() {
        let recs = records(0.61, 20_000, 2);
        let mut c = MLConfig::default();
        c.max_iters = 200;
        let res = ml_estimate(&recs, &c).unwrap();
        for w in res.log_likelihood.windows(2) {
            assert!(w[1] >= w[0] - MONOTONE_SLACK, "{} -> {}", w[0], w[1]);
        }
        assert!(res.rho.min_eigenvalue().unwrap() > -1e-12);
        assert!((res.rho.trace().re - 1.0).abs() < 1e-12);
        assert!((res.rho.get(0, 0, 0, 0).re - 0.39).abs() < 0.03);
        assert!((res.rho.get(0, 1, 1, 0).re - 0.305).abs() < 0.03);
    }

    #[test]
    fn blocks_are_exactly_zero() {
        let recs = records(0.61, 10_000, 3);
        let mut c = MLConfig::default();
        c.max_iters = 50;
        c.enforce_global_phase_blocks = true;
        let res = ml_estimate(&recs, &c).unwrap();
        assert_eq!(res.rho.off_block_magnitude(), 0.0);
        for w in res.log_likelihood.windows(2) {
            assert!(w[1] >= w[0] - MONOTONE_SLACK);
        }
    }

    #[test]
    fn efficiency_correction_recovers_photon() {
        let recs = records(0.61, 50_000, 4);
        let mut c = MLConfig::default();
        c.eta = Some(0.61);
        c.enforce_global_phase_blocks = true;
        c.max_iters = 500;
        let res = ml_estimate_binned(&recs, &c, BinSpec::default()).unwrap();
        let fid = res.rho.fidelity_with_pure(&delocalized_photon(c.dim)).unwrap();
        assert!(fid > 0.9, "{fid}");
        assert!(res.observations < recs.len());
    }

    #[test]
    fn binned_agrees_with_unbinned() {
        let recs = records(0.61, 20_000, 5);
        let mut c = MLConfig::default();
        c.max_iters = 100;
        c.enforce_global_phase_blocks = true;
        let a = ml_estimate(&recs, &c).unwrap();
        let b = ml_estimate_binned(&recs, &c, BinSpec { x_width: 0.01, ..BinSpec::default() }).unwrap();
        assert!(a.rho.max_abs_diff(&b.rho).unwrap() < 0.01);
        let truth = model_state(0.61, c.dim).unwrap();
        assert!(a.rho.max_abs_diff(&truth).unwrap() < 0.05);
    }

    #[test]
    fn max_iterations_status() {
        let recs = records(0.61, 2_000, 6);
        let mut c = MLConfig::default();
        c.max_iters = 2;
        let res = ml_estimate(&recs, &c).unwrap();
        assert_eq!(res.status, MlStatus::MaxIterations);
        assert_eq!(res.iterations, 2);
        assert_eq!(res.log_likelihood.len(), 3);
    }
}
