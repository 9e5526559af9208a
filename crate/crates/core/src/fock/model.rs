use num_complex::Complex64;

use super::{ModeDim, TwoModeDensityMatrix};
use crate::{Error, Result};

/// Amplitudes of `(|1,0> + |0,1>)/√2`, indexed by `k·d + l`.
pub fn delocalized_photon(dim: ModeDim) -> Vec<Complex64> {
    let d = dim.get();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim.pairs()];
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[d] = a; // |1,0>
    amps[1] = a; // |0,1>
    amps
}

/// Lossy delocalized photon `(1 - η)|0,0><0,0| + η|Ψ><Ψ|`.
pub fn model_state(eta: f64, dim: ModeDim) -> Result<TwoModeDensityMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Argument(format!("efficiency must lie in [0, 1], got {eta}")));
    }
    let mut rho = TwoModeDensityMatrix::zeros(dim);
    let half = Complex64::new(eta / 2.0, 0.0);
    rho.set(0, 0, 0, 0, Complex64::new(1.0 - eta, 0.0));
    rho.set(0, 1, 0, 1, half);
    rho.set(1, 0, 1, 0, half);
    rho.set(0, 1, 1, 0, half);
    rho.set(1, 0, 0, 1, half);
    Ok(rho)
}
