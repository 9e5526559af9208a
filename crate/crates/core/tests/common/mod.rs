#![allow(dead_code)]

use num_complex::Complex64;
use qhd_core::fock::{ModeDim, TwoModeDensityMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G† / Tr` for a complex Ginibre matrix `G`: full-rank, unit trace.
pub fn random_state<R: Rng>(rng: &mut R, dim: ModeDim) -> TwoModeDensityMatrix {
    let p = dim.pairs();
    let g: Vec<Complex64> = (0..p * p).map(|_| gaussian_complex(rng)).collect();
    let mut e = vec![Complex64::new(0.0, 0.0); p * p];
    for r in 0..p {
        for c in 0..p {
            e[r * p + c] = (0..p).map(|k| g[r * p + k] * g[c * p + k].conj()).sum();
        }
    }
    TwoModeDensityMatrix::from_entries(dim, e).unwrap().hermitized().normalized().unwrap()
}

/// Hermitian with unit trace but no positivity requirement.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: ModeDim) -> TwoModeDensityMatrix {
    let p = dim.pairs();
    let e: Vec<Complex64> = (0..p * p).map(|_| gaussian_complex(rng)).collect();
    let h = TwoModeDensityMatrix::from_entries(dim, e).unwrap().hermitized();
    let t = h.trace().re;
    if t.abs() > 0.1 {
        h.normalized().unwrap()
    } else {
        h
    }
}
