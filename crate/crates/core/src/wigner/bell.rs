//! Banaszek-Bell parameter, scans over `J = |α|²`, and the efficiency
//! threshold for a violation.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::function::{wigner_state, wigner_state_unchecked};
use crate::fock::{PhasePoint, TwoModeDensityMatrix, HERMITIAN_TOL};
use crate::{Error, Result};

/// Local hidden-variable bound on `|B|`.
pub const BELL_BOUND: f64 = 2.0;

/// `B = (π²/4)[W(0,0) + W(α1,0) + W(0,α2) - W(α1,α2)]`, signed.
pub fn bell_parameter(rho: &TwoModeDensityMatrix, a1: PhasePoint, a2: PhasePoint) -> Result<f64> {
    let o = PhasePoint::ORIGIN;
    let combo = wigner_state(rho, o, o)? + wigner_state(rho, a1, o)? + wigner_state(rho, o, a2)?
        - wigner_state(rho, a1, a2)?;
    Ok(PI * PI / 4.0 * combo)
}

/// Closed-form `B_η(J)` along `α1 = α2 = √J` for the lossy delocalized photon.
pub fn analytic_bell_curve(eta: f64, j: f64) -> f64 {
    1.0 - 2.0 * eta + (-2.0 * j).exp() * (4.0 * eta * (j - 1.0) + 2.0)
        - (-4.0 * j).exp() * (8.0 * j * eta - 2.0 * eta + 1.0)
}

/// What a Bell scan evaluates.
#[derive(Clone, Copy, Debug)]
pub enum BellSource<'a> {
    /// Closed-form curve at efficiency `η`.
    Analytic(f64),
    /// Wigner assembly of a (reconstructed) density matrix.
    State(&'a TwoModeDensityMatrix),
}

impl BellSource<'_> {
    fn label(&self) -> EtaLabel {
        match *self {
            BellSource::Analytic(eta) => EtaLabel::Analytic(eta),
            BellSource::State(_) => EtaLabel::Reconstructed,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            BellSource::Analytic(eta) if !(0.0..=1.0).contains(&eta) => {
                Err(Error::Argument(format!("efficiency must lie in [0, 1], got {eta}")))
            }
            BellSource::State(rho) => rho.validate_hermitian(HERMITIAN_TOL),
            _ => Ok(()),
        }
    }

    /// `B` at `α1 = α2 = √J`; assumes [`Self::validate`] passed.
    fn eval(&self, j: f64) -> Result<f64> {
        match *self {
            BellSource::Analytic(eta) => Ok(analytic_bell_curve(eta, j)),
            BellSource::State(rho) => {
                let a = PhasePoint::on_real_axis(j);
                let o = PhasePoint::ORIGIN;
                let w = |p, q| wigner_state_unchecked(rho, p, q);
                let combo = w(o, o) + w(a, o) + w(o, a) - w(a, a);
                if combo.im.abs() > 4.0 * super::WIGNER_IMAG_TOL {
                    return Err(Error::Numerical(format!("Bell combination has imaginary residue {:.3e}", combo.im)));
                }
                Ok(PI * PI / 4.0 * combo.re)
            }
        }
    }
}

/// Efficiency tag of a scan: a number for closed-form curves, or
/// `"reconstructed"` for scans over a density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaLabel {
    Analytic(f64),
    #[serde(with = "reconstructed_tag")]
    Reconstructed,
}

mod reconstructed_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("reconstructed")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "reconstructed" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("unknown eta label {s:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellPoint {
    pub j: f64,
    pub b: f64,
}

/// A curve of `B` over `J`, with its minimum over the sampled points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellScanResult {
    pub eta_label: EtaLabel,
    pub points: Vec<BellPoint>,
    pub min_b: f64,
    pub argmin_j: f64,
}

impl BellScanResult {
    /// Whether any point leaves `[-2, 2]`.
    pub fn violates(&self) -> bool {
        self.points.iter().any(|p| p.b.abs() > BELL_BOUND)
    }

    /// Plot-ready CSV with header `J,B`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "J,B")?;
        for p in &self.points {
            writeln!(w, "{:.16e},{:.16e}", p.j, p.b)?;
        }
        Ok(())
    }
}

/// `J ∈ [0, 0.5]` in steps of 0.005.
pub fn default_j_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 * 0.005).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Argument("J grid is empty".into()));
    }
    if grid.iter().any(|j| !j.is_finite() || *j < 0.0) {
        return Err(Error::Argument("J grid values must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("J grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Evaluates `B` at `α1 = α2 = √J` for each grid value.
pub fn bell_scan(source: BellSource<'_>, grid: &[f64]) -> Result<BellScanResult> {
    check_grid(grid)?;
    source.validate()?;
    let points = grid
        .iter()
        .map(|&j| Ok(BellPoint { j, b: source.eval(j)? }))
        .collect::<Result<Vec<_>>>()?;
    let best = points
        .iter()
        .min_by(|a, b| a.b.total_cmp(&b.b))
        .copied()
        .expect("grid is non-empty");
    Ok(BellScanResult {
        eta_label: source.label(),
        points,
        min_b: best.b,
        argmin_j: best.j,
    })
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping once
/// the bracket is narrower than `tol`. Returns `(x, f(x))`.
pub fn golden_section_min<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)?))
}

/// Grid scan followed by golden-section refinement (to 1e-8 in `J`) around
/// the best grid point. Returns `(J*, B(J*))`.
pub fn refine_minimum(source: BellSource<'_>, grid: &[f64]) -> Result<(f64, f64)> {
    let scan = bell_scan(source, grid)?;
    let i = scan.points.iter().position(|p| p.j == scan.argmin_j).expect("argmin is a grid point");
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    if hi <= lo {
        return Ok((scan.argmin_j, scan.min_b));
    }
    let (j, b) = golden_section_min(|j| source.eval(j), lo, hi, 1e-8)?;
    Ok(if b <= scan.min_b { (j, b) } else { (scan.argmin_j, scan.min_b) })
}

/// Smallest overall efficiency at which the closed-form curve reaches `-2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub eta_star: f64,
    pub min_b_at_star: f64,
    /// Width of the final efficiency bracket.
    pub tolerance: f64,
}

/// `η* = inf{η : min_J B_η(J) < -2}` by bisection on `η ∈ [0.5, 1]`, with the
/// inner minimum from [`refine_minimum`] over [`default_j_grid`].
pub fn violation_threshold() -> Result<ThresholdReport> {
    const TOLERANCE: f64 = 1e-12;
    let grid = default_j_grid();
    let gap = |eta: f64| -> Result<f64> { Ok(refine_minimum(BellSource::Analytic(eta), &grid)?.1 + BELL_BOUND) };
    let (mut lo, mut hi) = (0.5, 1.0);
    if !(gap(lo)? > 0.0 && gap(hi)? < 0.0) {
        return Err(Error::Numerical("violation threshold is not bracketed by [0.5, 1]".into()));
    }
    while hi - lo > TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let eta_star = 0.5 * (lo + hi);
    Ok(ThresholdReport {
        eta_star,
        min_b_at_star: refine_minimum(BellSource::Analytic(eta_star), &grid)?.1,
        tolerance: hi - lo,
    })
}
