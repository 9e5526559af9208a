//! Fock-space fundamentals.

mod density;
mod efficiency;
mod model;
mod negativity;
mod phase;
mod quadrature;
pub mod special;
mod wavefunction;

pub use density::{DensityMatrixDocument, ModeDim, PsdReport, TwoModeDensityMatrix, EIGEN_ZERO_TOL, HERMITIAN_TOL};
pub use efficiency::EfficiencyModel;
pub use model::{delocalized_photon, model_state};
pub use negativity::{log_negativity, partial_transpose};
pub use phase::PhasePoint;
pub use quadrature::{quadrature_pdf, reduced_state, single_mode_pdf};
pub use wavefunction::{irregular_wavefunction, regular_wavefunction, wronskian, IRREGULAR_WRONSKIAN};

pub(crate) use quadrature::{measurement_vector, sandwich};
#[cfg(test)]
pub(crate) use quadrature::pdf_unchecked;
pub(crate) use wavefunction::{regular_values, scaled_irregular, scaled_regular};
