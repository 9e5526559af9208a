//! Reconstruction report written next to a reconstructed matrix.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BinSpec, BootstrapReport, EtaSource, MlStatus};
use crate::fock::PsdReport;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pf,
    Ml,
}

/// Loss correction applied after estimation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionReport {
    pub eta: f64,
    pub eta_source: EtaSource,
    /// Spectrum of the corrected matrix before any clipping.
    pub psd: PsdReport,
    pub clipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub method: Method,
    pub dim: usize,
    pub n_records: usize,
    /// POVM efficiency used by the likelihood, if any.
    pub povm_eta: Option<f64>,
    pub global_phase_blocks: bool,
    pub iterations: Option<usize>,
    pub status: Option<MlStatus>,
    pub likelihood_trace: Vec<f64>,
    pub underflow_records: u64,
    pub binning: Option<BinSpec>,
    /// Trace of the estimate before any renormalization, as `[re, im]`.
    pub trace: [f64; 2],
    pub psd: PsdReport,
    pub correction: Option<CorrectionReport>,
    pub bootstrap: Option<BootstrapReport>,
}

impl ReconstructionReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), self)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let r = ReconstructionReport {
            method: Method::Ml,
            dim: 3,
            n_records: 10,
            povm_eta: Some(0.61),
            global_phase_blocks: true,
            iterations: Some(4),
            status: Some(MlStatus::Converged),
            likelihood_trace: vec![-1.0, -0.5],
            underflow_records: 0,
            binning: None,
            trace: [1.0, 0.0],
            psd: PsdReport {
                min_eigenvalue: 0.0,
                negative_count: 0,
                negative_sum: 0.0,
            },
            correction: None,
            bootstrap: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("report.json");
        r.write_json(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"method\": \"ml\""));
        assert!(text.contains("\"status\": \"converged\""));
        assert_eq!(ReconstructionReport::read_json(&p).unwrap(), r);
    }
}
