//! Wigner functions in the Fock basis and the Banaszek-Bell combination.

mod bell;
mod function;

pub use bell::{
    analytic_bell_curve, bell_parameter, bell_scan, default_j_grid, golden_section_min, refine_minimum,
    violation_threshold, BellPoint, BellScanResult, BellSource, EtaLabel, ThresholdReport, BELL_BOUND,
};
pub use function::{analytic_lossy_wigner, wigner_projector, wigner_state, WIGNER_IMAG_TOL};
