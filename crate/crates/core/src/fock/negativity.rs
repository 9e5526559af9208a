//! Partial transpose and logarithmic negativity.

use super::{TwoModeDensityMatrix, EIGEN_ZERO_TOL, HERMITIAN_TOL};
use crate::{Error, Result};

/// Transpose on the first mode: `(ρ^{T_A})_klmn = ρ_mlkn`.
pub fn partial_transpose(rho: &TwoModeDensityMatrix) -> Result<TwoModeDensityMatrix> {
    rho.validate_hermitian(HERMITIAN_TOL)?;
    let dim = rho.dim();
    let d = dim.get();
    let mut out = TwoModeDensityMatrix::zeros(dim);
    let entries = out.entries_mut();
    for k in 0..d {
        for l in 0..d {
            for m in 0..d {
                for n in 0..d {
                    entries[dim.flat(k, l, m, n)] = rho.get(m, l, k, n);
                }
            }
        }
    }
    Ok(out)
}

/// `E_N = log₂ ‖ρ^{T_A}‖₁` for the trace-normalized state.
///
/// Eigenvalues of the partial transpose within [`EIGEN_ZERO_TOL`] of zero
/// are dropped before summing, so separable inputs return exactly zero.
pub fn log_negativity(rho: &TwoModeDensityMatrix) -> Result<f64> {
    let trace = rho.trace().re;
    if !(trace > 0.0) {
        return Err(Error::Validation(format!("trace must be positive, got {trace}")));
    }
    let pt = partial_transpose(rho)?;
    let negative: f64 = pt
        .eigenvalues()?
        .into_iter()
        .filter(|&v| v < -EIGEN_ZERO_TOL)
        .sum();
    Ok((1.0 - 2.0 * negative / trace).log2())
}
