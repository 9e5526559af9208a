//! Seeded record generation.
//!
//! Records are produced in shards of [`SHARD_SIZE`]. Shard `s` draws from a
//! ChaCha20 stream seeded with the configuration seed and stream id `s`, and
//! the output is concatenated shard-major, so the record stream depends only
//! on the configuration, not on how many worker threads ran.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PhaseSchedule, QuadratureRecord};
use crate::fock::{measurement_vector, model_state, regular_values, sandwich, ModeDim, TwoModeDensityMatrix, HERMITIAN_TOL};
use crate::{Error, Result};

/// Records per shard.
pub const SHARD_SIZE: usize = 1 << 16;

/// Recorded in metadata side-files.
pub const GENERATOR_NAME: &str = "rand_chacha::ChaCha20Rng (seed_from_u64, stream = shard index, 65536 records per shard)";

const MAX_SAMPLING_DIM: usize = 16;
const STATE_TOL: f64 = 1e-9;
const ENVELOPE_MARGIN: f64 = 1.2;

/// State to sample from.
#[derive(Clone, Debug, PartialEq)]
pub enum SimState {
    /// The lossy delocalized photon at efficiency `eta`, sampled exactly.
    Model { eta: f64, dim: ModeDim },
    /// An arbitrary physical density matrix, sampled by rejection.
    Matrix(TwoModeDensityMatrix),
}

impl SimState {
    pub fn description(&self) -> String {
        match self {
            SimState::Model { eta, dim } => format!("model(eta={eta}, d={})", dim.get()),
            SimState::Matrix(rho) => format!("matrix(d={})", rho.dim().get()),
        }
    }

    pub fn to_matrix(&self) -> Result<TwoModeDensityMatrix> {
        match self {
            SimState::Model { eta, dim } => model_state(*eta, *dim),
            SimState::Matrix(rho) => Ok(rho.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub state: SimState,
    pub n_records: usize,
    pub schedule: PhaseSchedule,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_records == 0 {
            return Err(Error::Argument("n_records must be at least 1".into()));
        }
        if self.schedule.relative_steps == 0 {
            return Err(Error::Argument("phase schedule needs at least one relative step".into()));
        }
        match &self.state {
            SimState::Model { eta, .. } if !(0.0..=1.0).contains(eta) => {
                Err(Error::Argument(format!("efficiency must lie in [0, 1], got {eta}")))
            }
            SimState::Matrix(rho) => validate_samplable(rho),
            _ => Ok(()),
        }
    }
}

fn validate_samplable(rho: &TwoModeDensityMatrix) -> Result<()> {
    if rho.dim().get() > MAX_SAMPLING_DIM {
        return Err(Error::Argument(format!("sampling supports d <= {MAX_SAMPLING_DIM}")));
    }
    rho.validate_hermitian(HERMITIAN_TOL)?;
    let t = rho.trace();
    if (t.re - 1.0).abs() > STATE_TOL || t.im.abs() > STATE_TOL {
        return Err(Error::Validation(format!("state must have unit trace, got {t}")));
    }
    let min = rho.min_eigenvalue()?;
    if min < -STATE_TOL {
        return Err(Error::Validation(format!(
            "state is not positive semidefinite (min eigenvalue {min:.3e}); cannot sample a quasi-distribution"
        )));
    }
    Ok(())
}

/// Counters from a sampling run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplingStats {
    pub proposals: u64,
    pub accepted: u64,
    /// Proposals whose density ratio exceeded the envelope bound.
    pub envelope_exceedances: u64,
    /// Envelope constant (0 on the exact model path).
    pub envelope_bound: f64,
    /// Variance of the Gaussian proposal (0 on the exact model path).
    pub proposal_variance: f64,
}

impl SamplingStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.proposals += other.proposals;
        self.accepted += other.accepted;
        self.envelope_exceedances += other.envelope_exceedances;
        self
    }
}

/// Draws `n_records` i.i.d. records from the joint quadrature density.
pub fn sample_records(config: &SimConfig) -> Result<Vec<QuadratureRecord>> {
    Ok(sample_records_with_stats(config)?.0)
}

pub fn sample_records_with_stats(config: &SimConfig) -> Result<(Vec<QuadratureRecord>, SamplingStats)> {
    config.validate()?;
    let envelope = match &config.state {
        SimState::Model { .. } => None,
        SimState::Matrix(rho) => Some(Envelope::build(rho)),
    };
    let n = config.n_records;
    let shards = n.div_ceil(SHARD_SIZE);
    let results: Vec<(Vec<QuadratureRecord>, SamplingStats)> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let start = s * SHARD_SIZE;
            let len = SHARD_SIZE.min(n - start);
            let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
            rng.set_stream(s as u64);
            match (&config.state, &envelope) {
                (SimState::Model { eta, .. }, _) => model_shard(&mut rng, *eta, &config.schedule, start as u64, len),
                (SimState::Matrix(rho), Some(env)) => rejection_shard(&mut rng, rho, env, &config.schedule, start as u64, len),
                (SimState::Matrix(_), None) => unreachable!("matrix states always build an envelope"),
            }
        })
        .collect();

    let mut records = Vec::with_capacity(n);
    let mut stats = SamplingStats::default();
    for (chunk, st) in results {
        records.extend(chunk);
        stats = stats.merge(st);
    }
    if let Some(env) = envelope {
        stats.envelope_bound = env.bound;
        stats.proposal_variance = env.variance;
    }
    Ok((records, stats))
}

#[inline]
fn gaussian(rng: &mut ChaCha20Rng, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

/// Draw from `u² exp(-2u²)` (the single-photon quadrature density).
#[inline]
fn photon_quadrature(rng: &mut ChaCha20Rng) -> f64 {
    let (a, b, c) = (gaussian(rng, 1.0), gaussian(rng, 1.0), gaussian(rng, 1.0));
    let r = 0.5 * (a * a + b * b + c * c).sqrt();
    if rng.random::<bool>() {
        r
    } else {
        -r
    }
}

/// Exact sampling of the lossy delocalized photon.
///
/// With probability `1 - η` both modes are vacuum. Otherwise, in the rotated
/// coordinates `u = (x1 + x2)/√2`, `v = (x1 - x2)/√2` the density is
/// `(4/π) e^{-2u²-2v²} [(1 + c) u² + (1 - c) v²]` with `c = cos(θ1 - θ2)`: a
/// two-component mixture of a one-photon and a vacuum quadrature.
fn model_shard(
    rng: &mut ChaCha20Rng,
    eta: f64,
    schedule: &PhaseSchedule,
    start: u64,
    len: usize,
) -> (Vec<QuadratureRecord>, SamplingStats) {
    let mut out = Vec::with_capacity(len);
    for i in 0..len as u64 {
        let global = rng.random::<f64>() * TAU;
        let (theta1, theta2) = schedule.phases(start + i, global);
        let (x1, x2) = if rng.random::<f64>() >= eta {
            (gaussian(rng, 0.5), gaussian(rng, 0.5))
        } else {
            let c = (theta1 - theta2).cos();
            let photon = photon_quadrature(rng);
            let vacuum = gaussian(rng, 0.5);
            let (u, v) = if rng.random::<f64>() < 0.5 * (1.0 + c) {
                (photon, vacuum)
            } else {
                (vacuum, photon)
            };
            ((u + v) * FRAC_1_SQRT_2, (u - v) * FRAC_1_SQRT_2)
        };
        out.push(QuadratureRecord { x1, theta1, x2, theta2 });
    }
    let stats = SamplingStats {
        proposals: len as u64,
        accepted: len as u64,
        ..Default::default()
    };
    (out, stats)
}

/// Isotropic Gaussian proposal with a bound on `p / q`.
#[derive(Clone, Copy, Debug)]
struct Envelope {
    variance: f64,
    bound: f64,
}

impl Envelope {
    /// Grid search of `sup p/q` over quadratures and phases for a handful of
    /// proposal widths; keeps the tightest and adds a 20% margin.
    fn build(rho: &TwoModeDensityMatrix) -> Self {
        const X_MAX: f64 = 4.5;
        const X_POINTS: usize = 91;
        const PHASES: usize = 16;
        let d = rho.dim().get();
        let xs: Vec<f64> = (0..X_POINTS)
            .map(|i| -X_MAX + 2.0 * X_MAX * i as f64 / (X_POINTS - 1) as f64)
            .collect();
        let psi: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| {
                let mut v = vec![0.0; d];
                regular_values(x, &mut v);
                v
            })
            .collect();
        let entries = rho.entries();
        let p2 = d * d;
        let mut peak = vec![0.0f64; X_POINTS * X_POINTS];
        let mut reduced = vec![Complex64::new(0.0, 0.0); p2];
        for t1 in 0..PHASES {
            let rot1: Vec<Complex64> = (0..d)
                .map(|k| Complex64::from_polar(1.0, TAU * (t1 * k) as f64 / PHASES as f64))
                .collect();
            for t2 in 0..PHASES {
                let rot2: Vec<Complex64> = (0..d)
                    .map(|l| Complex64::from_polar(1.0, TAU * (t2 * l) as f64 / PHASES as f64))
                    .collect();
                for (i, p1) in psi.iter().enumerate() {
                    // Contract mode 1: reduced_{l n} = Σ conj(a_k) ρ_{kl,mn} a_m
                    let a: Vec<Complex64> = (0..d).map(|k| rot1[k] * p1[k]).collect();
                    reduced.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                    for k in 0..d {
                        for l in 0..d {
                            for m in 0..d {
                                let akm = a[k].conj() * a[m];
                                for n in 0..d {
                                    reduced[l * d + n] += akm * entries[(k * d + l) * p2 + m * d + n];
                                }
                            }
                        }
                    }
                    for (j, q2) in psi.iter().enumerate() {
                        let mut acc = 0.0;
                        for l in 0..d {
                            let bl = (rot2[l] * q2[l]).conj();
                            for n in 0..d {
                                acc += (bl * reduced[l * d + n] * rot2[n] * q2[n]).re;
                            }
                        }
                        let slot = &mut peak[i * X_POINTS + j];
                        *slot = slot.max(acc);
                    }
                }
            }
        }

        let mut best = Envelope {
            variance: 0.5,
            bound: f64::INFINITY,
        };
        for variance in [0.27, 0.3, 0.33, 0.36, 0.4, 0.45, 0.5, 0.6, 0.75, 1.0] {
            let mut ratio = 0.0f64;
            for (i, &x1) in xs.iter().enumerate() {
                for (j, &x2) in xs.iter().enumerate() {
                    let q = proposal_density(variance, x1, x2);
                    ratio = ratio.max(peak[i * X_POINTS + j] / q);
                }
            }
            if ratio < best.bound {
                best = Envelope { variance, bound: ratio };
            }
        }
        best.bound *= ENVELOPE_MARGIN;
        best
    }
}

#[inline]
fn proposal_density(variance: f64, x1: f64, x2: f64) -> f64 {
    (-(x1 * x1 + x2 * x2) / (2.0 * variance)).exp() / (2.0 * PI * variance)
}

fn rejection_shard(
    rng: &mut ChaCha20Rng,
    rho: &TwoModeDensityMatrix,
    env: &Envelope,
    schedule: &PhaseSchedule,
    start: u64,
    len: usize,
) -> (Vec<QuadratureRecord>, SamplingStats) {
    let d = rho.dim().get();
    let sigma = env.variance.sqrt();
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    let mut stats = SamplingStats::default();
    let mut out = Vec::with_capacity(len);
    for i in 0..len as u64 {
        let global = rng.random::<f64>() * TAU;
        let (theta1, theta2) = schedule.phases(start + i, global);
        loop {
            let x1 = gaussian(rng, sigma);
            let x2 = gaussian(rng, sigma);
            stats.proposals += 1;
            measurement_vector(d, x1, theta1, x2, theta2, &mut v);
            let p = sandwich(rho.entries(), &v);
            let q = proposal_density(env.variance, x1, x2);
            if p > env.bound * q {
                stats.envelope_exceedances += 1;
            }
            if rng.random::<f64>() * env.bound * q < p {
                stats.accepted += 1;
                out.push(QuadratureRecord { x1, theta1, x2, theta2 });
                break;
            }
        }
    }
    (out, stats)
}
