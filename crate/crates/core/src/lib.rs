//! Two-mode balanced homodyne tomography of a time-delocalized single photon.
//!
//! The crate is split along the pipeline:
//!
//! - [`fock`]: oscillator wavefunctions, truncated two-mode density matrices,
//!   quadrature distributions, partial transpose and logarithmic negativity.
//! - [`wigner`]: Fock-projector Wigner functions, two-mode Wigner assembly and
//!   the Banaszek-Bell parameter, plus the closed-form loss-model references.
//! - [`sim`]: seeded Monte Carlo generation of quadrature records and their
//!   file formats.
//! - [`tomography`]: pattern-function and maximum-likelihood reconstruction,
//!   Bernoulli loss maps and bootstrap error bars.
//!
//! Quadratures use the convention `x = (a + a†)/2`, so the vacuum has
//! `<x²> = 1/4` and the single-mode vacuum Wigner function is
//! `(2/π) exp(-2|α|²)`.

#![forbid(unsafe_code)]

pub mod error;
pub mod fock;
pub mod sim;
pub mod tomography;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
