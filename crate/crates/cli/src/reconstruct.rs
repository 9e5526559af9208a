use qhd_core::fock::{ModeDim, TwoModeDensityMatrix};
use qhd_core::sim::{read_records, QuadratureRecord};
use qhd_core::tomography::{
    auto_efficiency, bootstrap_uncertainty, inverse_bernoulli, ml_estimate, ml_estimate_binned, pf_estimate, BinSpec,
    BootstrapConfig, BootstrapReport, CorrectionReport, Estimator, EtaSource, MLConfig, Method, MlStatus,
    ReconstructionReport,
};
use serde_json::{json, Map, Value};

use crate::args::{BlocksArg, Correction, MethodArg, ReconstructArgs};
use crate::failure::{CliResult, Failure};
use crate::manifest::{sidecar, ManifestBuilder};

pub fn load_records(path: &std::path::Path) -> CliResult<Vec<QuadratureRecord>> {
    read_records(path).map_err(|e| {
        let f = Failure::from(e);
        Failure::io(f.message).context(path.display())
    })
}

/// Estimate plus the report fields the estimator fills in.
pub struct Estimate {
    pub rho: TwoModeDensityMatrix,
    pub report: ReconstructionReport,
}

pub fn estimate(records: &[QuadratureRecord], args: &ReconstructArgs) -> CliResult<Estimate> {
    let dim = ModeDim::new(args.dim as usize)?;
    let blocks = args.blocks == Some(BlocksArg::GlobalPhase);
    let (rho, mut report) = match args.method {
        MethodArg::Pf => {
            if args.eta.is_some() {
                return Err(Failure::usage("--eta applies to --method ml; use --correct ibt:<eta> with pf"));
            }
            let est = pf_estimate(records, dim).map_err(|e| Failure::from(e).context("pattern-function estimate"))?;
            let mut rho = est.rho;
            if blocks {
                rho = rho.with_global_phase_blocks();
            }
            let report = ReconstructionReport {
                method: Method::Pf,
                dim: dim.get(),
                n_records: records.len(),
                povm_eta: None,
                global_phase_blocks: blocks,
                iterations: None,
                status: None,
                likelihood_trace: Vec::new(),
                underflow_records: 0,
                binning: None,
                trace: [est.trace.re, est.trace.im],
                psd: rho.psd_report()?,
                correction: None,
                bootstrap: None,
            };
            (rho, report)
        }
        MethodArg::Ml => {
            let config = ml_config(args, dim);
            let res = match args.bin_width {
                Some(w) => ml_estimate_binned(
                    records,
                    &config,
                    BinSpec {
                        x_width: w,
                        phase_bins: args.phase_bins as usize,
                        ..BinSpec::default()
                    },
                ),
                None => ml_estimate(records, &config),
            }
            .map_err(|e| Failure::from(e).context("maximum-likelihood estimate"))?;
            let trace = res.rho.trace();
            let report = ReconstructionReport {
                method: Method::Ml,
                dim: dim.get(),
                n_records: records.len(),
                povm_eta: args.eta,
                global_phase_blocks: blocks,
                iterations: Some(res.iterations),
                status: Some(res.status),
                likelihood_trace: res.log_likelihood,
                underflow_records: res.underflow_records,
                binning: res.binning,
                trace: [trace.re, trace.im],
                psd: res.rho.psd_report()?,
                correction: None,
                bootstrap: None,
            };
            (res.rho, report)
        }
    };
    let rho = match args.correct {
        None => rho,
        Some(c) => {
            let (eta, source) = match c {
                Correction::IbtAuto => (
                    auto_efficiency(&rho).map_err(|e| Failure::from(e).context("ibt:auto"))?,
                    EtaSource::Auto,
                ),
                Correction::Ibt(eta) => (eta, EtaSource::Explicit),
            };
            let inv = inverse_bernoulli(&rho, eta).map_err(|e| Failure::from(e).context("inverse loss map"))?;
            report.correction = Some(CorrectionReport {
                eta,
                eta_source: source,
                psd: inv.psd,
                clipped: args.clip,
            });
            let out = if args.clip { inv.clipped()? } else { inv.rho };
            report.psd = out.psd_report()?;
            out
        }
    };
    Ok(Estimate { rho, report })
}

fn ml_config(args: &ReconstructArgs, dim: ModeDim) -> MLConfig {
    MLConfig {
        dim,
        eta: args.eta,
        max_iters: args.max_iters as usize,
        convergence_tol: args.tol,
        enforce_global_phase_blocks: args.blocks == Some(BlocksArg::GlobalPhase),
    }
}

pub fn bootstrap(records: &[QuadratureRecord], args: &ReconstructArgs, js: Vec<f64>) -> CliResult<BootstrapReport> {
    let dim = ModeDim::new(args.dim as usize)?;
    let estimator = match args.method {
        MethodArg::Pf => Estimator::Pf {
            dim,
            global_phase_blocks: args.blocks == Some(BlocksArg::GlobalPhase),
        },
        MethodArg::Ml => Estimator::Ml(ml_config(args, dim)),
    };
    let config = BootstrapConfig {
        n_resamples: args.bootstrap as usize,
        seed: args.bootstrap_seed,
        bell_js: js,
    };
    bootstrap_uncertainty(records, &estimator, &config).map_err(|e| Failure::from(e).context("bootstrap"))
}

pub fn run(args: &ReconstructArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("reconstruct", args, (args.bootstrap > 0).then_some(args.bootstrap_seed));
    manifest.input(&args.input);
    let records = load_records(&args.input)?;
    let Estimate { rho, mut report } = estimate(&records, args)?;
    if args.bootstrap == 1 {
        return Err(Failure::usage("--bootstrap needs at least 2 resamples"));
    }
    if args.bootstrap >= 2 {
        report.bootstrap = Some(bootstrap(&records, args, vec![0.09])?);
    }
    let mut meta = Map::new();
    meta.insert("method".into(), json!(report.method));
    meta.insert("source".into(), Value::String(args.input.display().to_string()));
    if let Some(c) = &report.correction {
        meta.insert("correction_eta".into(), json!(c.eta));
    }
    rho.write_json(&args.out, meta).map_err(|e| Failure::from(e).context(args.out.display()))?;
    manifest.output(&args.out);
    let report_path = sidecar(&args.out, "report");
    report.write_json(&report_path)?;
    manifest.output(&report_path);
    manifest.write(&args.out)?;
    eprintln!("wrote {} and {}", args.out.display(), report_path.display());
    if report.status == Some(MlStatus::MaxIterations) {
        return Err(Failure::numerical(format!(
            "maximum likelihood did not converge within {} iterations; last iterate written",
            args.max_iters
        )));
    }
    Ok(())
}
