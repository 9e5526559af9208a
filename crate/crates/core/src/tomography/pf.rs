//! Pattern-function estimator.

use num_complex::Complex64;
use rayon::prelude::*;

use super::PatternFunctionTable;
use crate::fock::{ModeDim, TwoModeDensityMatrix};
use crate::sim::QuadratureRecord;
use crate::{Error, Result};

const CHUNK: usize = 8192;

/// Density-matrix estimate with per-element standard errors.
#[derive(Clone, Debug)]
pub struct PfEstimate {
    /// Hermitized sample mean.
    pub rho: TwoModeDensityMatrix,
    /// Standard error of the real (`re`) and imaginary (`im`) parts of each
    /// raw element, in the flat storage order.
    pub std_err: Vec<Complex64>,
    /// Trace before hermitization; not forced to one.
    pub trace: Complex64,
    pub n_records: usize,
}

impl PfEstimate {
    pub fn std_err_at(&self, k: usize, l: usize, m: usize, n: usize) -> Complex64 {
        self.std_err[self.rho.dim().flat(k, l, m, n)]
    }
}

/// Averages `f_km(x1, θ1) f_ln(x2, θ2)` over the records.
pub fn pf_estimate(records: &[QuadratureRecord], dim: ModeDim) -> Result<PfEstimate> {
    check_records(records)?;
    let table = PatternFunctionTable::new(dim)?;
    pf_estimate_with_table(records, &table)
}

pub(crate) fn check_records(records: &[QuadratureRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Argument("no records to reconstruct from".into()));
    }
    if let Some(i) = records
        .iter()
        .position(|r| ![r.x1, r.theta1, r.x2, r.theta2].iter().all(|v| v.is_finite()))
    {
        return Err(Error::Validation(format!("record {i} contains a non-finite value")));
    }
    Ok(())
}

struct Sums {
    mean: Vec<Complex64>,
    sq: Vec<Complex64>,
}

fn chunk_sums(records: &[QuadratureRecord], table: &PatternFunctionTable) -> Sums {
    let d = table.dim().get();
    let p2 = d * d;
    let e = p2 * p2;
    let mut mean = vec![Complex64::new(0.0, 0.0); e];
    let mut sq = vec![Complex64::new(0.0, 0.0); e];
    let mut prof = vec![0.0; p2];
    let mut f1 = vec![Complex64::new(0.0, 0.0); p2];
    let mut f2 = vec![Complex64::new(0.0, 0.0); p2];
    for r in records {
        table.functions_into(r.x1, r.theta1, &mut prof, &mut f1);
        table.functions_into(r.x2, r.theta2, &mut prof, &mut f2);
        for k in 0..d {
            for l in 0..d {
                let row = (k * d + l) * p2;
                for m in 0..d {
                    let a = f1[k * d + m];
                    let f2l = &f2[l * d..(l + 1) * d];
                    let base = row + m * d;
                    for (n, b) in f2l.iter().enumerate() {
                        let v = a * b;
                        mean[base + n] += v;
                        sq[base + n] += Complex64::new(v.re * v.re, v.im * v.im);
                    }
                }
            }
        }
    }
    Sums { mean, sq }
}

/// As [`pf_estimate`], reusing a prebuilt table.
pub fn pf_estimate_with_table(records: &[QuadratureRecord], table: &PatternFunctionTable) -> Result<PfEstimate> {
    check_records(records)?;
    let dim = table.dim();
    let partial: Vec<Sums> = records.par_chunks(CHUNK).map(|c| chunk_sums(c, table)).collect();
    let e = dim.elements();
    let mut sum = vec![Complex64::new(0.0, 0.0); e];
    let mut sq = vec![Complex64::new(0.0, 0.0); e];
    for s in partial {
        sum.iter_mut().zip(&s.mean).for_each(|(a, b)| *a += b);
        sq.iter_mut().zip(&s.sq).for_each(|(a, b)| *a += b);
    }
    let n = records.len() as f64;
    let mean: Vec<Complex64> = sum.iter().map(|s| s / n).collect();
    let std_err = mean
        .iter()
        .zip(&sq)
        .map(|(m, s)| {
            if records.len() < 2 {
                return Complex64::new(f64::NAN, f64::NAN);
            }
            let var_re = ((s.re - n * m.re * m.re) / (n - 1.0)).max(0.0);
            let var_im = ((s.im - n * m.im * m.im) / (n - 1.0)).max(0.0);
            Complex64::new((var_re / n).sqrt(), (var_im / n).sqrt())
        })
        .collect();
    let raw = TwoModeDensityMatrix::from_entries(dim, mean)?;
    let trace = raw.trace();
    Ok(PfEstimate {
        rho: raw.hermitized(),
        std_err,
        trace,
        n_records: records.len(),
    })
}
