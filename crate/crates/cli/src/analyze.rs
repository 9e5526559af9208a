use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use qhd_core::fock::{log_negativity, TwoModeDensityMatrix};
use qhd_core::tomography::{bootstrap_uncertainty, BootstrapConfig, Estimator};
use qhd_core::wigner::{bell_scan, refine_minimum, violation_threshold, BellScanResult, BellSource, BELL_BOUND};
use serde::Serialize;
use serde_json::json;

use crate::args::{AnalyzeCommand, BellArgs, BellTheoryArgs, NegativityArgs, ScanArgs, ThresholdArgs};
use crate::failure::{CliResult, Failure};
use crate::manifest::{sidecar, ManifestBuilder};
use crate::reconstruct::load_records;

pub fn run(cmd: &AnalyzeCommand) -> CliResult<()> {
    match cmd {
        AnalyzeCommand::Negativity(a) => negativity(a),
        AnalyzeCommand::Bell(a) => bell(a),
        AnalyzeCommand::BellTheory(a) => bell_theory(a),
        AnalyzeCommand::Threshold(a) => threshold(a),
    }
}

/// Prints a line, ignoring a closed pipe on the reading end.
fn print_stdout(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

pub fn load_matrix(path: &Path) -> CliResult<TwoModeDensityMatrix> {
    match TwoModeDensityMatrix::read_json(path) {
        Ok((rho, _)) => Ok(rho),
        // Any problem with the file itself is an input error.
        Err(e) => Err(Failure::io(e.to_string()).context(path.display())),
    }
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    print_stdout(&text);
    if let Some(p) = out {
        std::fs::write(p, text)?;
    }
    Ok(())
}

fn negativity(args: &NegativityArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("analyze negativity", args, args.records.as_ref().map(|_| args.seed));
    manifest.input(&args.rho);
    let rho = load_matrix(&args.rho)?;
    let en = log_negativity(&rho)?;
    let mut result = json!({ "log_negativity": en });
    if let Some(path) = &args.records {
        manifest.input(path);
        let records = load_records(path)?;
        let report = bootstrap_uncertainty(
            &records,
            &Estimator::Pf {
                dim: rho.dim(),
                global_phase_blocks: rho.off_block_magnitude() == 0.0,
            },
            &BootstrapConfig {
                n_resamples: args.bootstrap as usize,
                seed: args.seed,
                bell_js: Vec::new(),
            },
        )?;
        result["bootstrap_error"] = json!(report.log_negativity.std);
        result["bootstrap"] = serde_json::to_value(&report)?;
    }
    emit(&result, args.out.as_deref())?;
    if let Some(out) = &args.out {
        manifest.output(out);
        manifest.write(out)?;
    }
    Ok(())
}

pub fn scan_grid(scan: &ScanArgs) -> Vec<f64> {
    (0..=scan.steps).map(|i| scan.j_max * i as f64 / scan.steps as f64).collect()
}

#[derive(Serialize)]
struct ScanSummary {
    eta_label: serde_json::Value,
    min_b: f64,
    argmin_j: f64,
    refined_min_b: f64,
    refined_argmin_j: f64,
    violates: bool,
    bound: f64,
}

/// Writes the CSV plus a `<csv>.summary.json` sidecar; returns the sidecar path.
pub fn write_scan(result: &BellScanResult, refined: (f64, f64), out: &Path) -> CliResult<std::path::PathBuf> {
    result.write_csv(BufWriter::new(File::create(out)?))?;
    let summary = ScanSummary {
        eta_label: serde_json::to_value(result.eta_label)?,
        min_b: result.min_b,
        argmin_j: result.argmin_j,
        refined_min_b: refined.1,
        refined_argmin_j: refined.0,
        violates: result.violates(),
        bound: BELL_BOUND,
    };
    let path = sidecar(out, "summary");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
    print_stdout(&serde_json::to_string_pretty(&summary)?);
    Ok(path)
}

fn scan_and_write(source: BellSource<'_>, scan: &ScanArgs, manifest: &mut ManifestBuilder) -> CliResult<()> {
    let grid = scan_grid(scan);
    let result = bell_scan(source, &grid)?;
    let refined = refine_minimum(source, &grid)?;
    let summary = write_scan(&result, refined, &scan.out)?;
    manifest.output(&scan.out);
    manifest.output(summary);
    Ok(())
}

fn bell(args: &BellArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("analyze bell", args, None);
    manifest.input(&args.rho);
    let rho = load_matrix(&args.rho)?;
    scan_and_write(BellSource::State(&rho), &args.scan, &mut manifest)?;
    manifest.write(&args.scan.out)?;
    Ok(())
}

fn bell_theory(args: &BellTheoryArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("analyze bell-theory", args, None);
    scan_and_write(BellSource::Analytic(args.eta), &args.scan, &mut manifest)?;
    manifest.write(&args.scan.out)?;
    Ok(())
}

fn threshold(args: &ThresholdArgs) -> CliResult<()> {
    let report = violation_threshold()?;
    emit(&report, args.out.as_deref())?;
    if let Some(out) = &args.out {
        let mut manifest = ManifestBuilder::new("analyze threshold", args, None);
        manifest.output(out);
        manifest.write(out)?;
    }
    Ok(())
}
