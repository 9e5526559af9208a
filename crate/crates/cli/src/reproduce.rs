//! End-to-end pipeline on simulated data with fixed seeds.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use qhd_core::fock::{delocalized_photon, log_negativity, model_state, ModeDim, TwoModeDensityMatrix};
use qhd_core::sim::{
    sample_records, write_metadata, write_records, PhaseSchedule, QuadratureRecord, RecordFormat, SimConfig,
    SimMetadata, SimState, GENERATOR_NAME, SHARD_SIZE,
};
use qhd_core::tomography::{
    auto_efficiency, bootstrap_uncertainty, inverse_bernoulli, ml_estimate, ml_estimate_binned, pf_estimate, BinSpec,
    BootstrapConfig, Estimator, MLConfig,
};
use qhd_core::wigner::{
    analytic_bell_curve, bell_scan, default_j_grid, refine_minimum, violation_threshold, BellSource, BELL_BOUND,
};
use serde_json::{json, Map};

use crate::args::ReproduceArgs;
use crate::failure::CliResult;
use crate::manifest::ManifestBuilder;

const ETA: f64 = 0.61;

fn stage<T>(name: &str, f: impl FnOnce() -> CliResult<T>) -> CliResult<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.context(format!("stage '{name}'")))?;
    eprintln!("[{name}] {:.1} s", start.elapsed().as_secs_f64());
    Ok(out)
}

struct Check {
    label: &'static str,
    pass: bool,
    detail: String,
}

fn write_matrix(rho: &TwoModeDensityMatrix, path: &Path, label: &str, manifest: &mut ManifestBuilder) -> CliResult<()> {
    let mut meta = Map::new();
    meta.insert("label".into(), json!(label));
    rho.write_json(path, meta)?;
    manifest.output(path);
    Ok(())
}

fn psi_summary(rho: &TwoModeDensityMatrix) -> (f64, f64, f64) {
    let psi = [rho.get(0, 1, 0, 1), rho.get(1, 0, 1, 0), rho.get(0, 1, 1, 0), rho.get(1, 0, 0, 1)];
    let lo = psi.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let hi = psi.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    (rho.get(0, 0, 0, 0).re, lo, hi)
}

pub fn run(args: &ReproduceArgs) -> CliResult<()> {
    std::fs::create_dir_all(&args.out_dir)?;
    let dir = &args.out_dir;
    let mut manifest = ManifestBuilder::new("reproduce", args, Some(args.seed));
    let dim = ModeDim::default();
    let mut checks: Vec<Check> = Vec::new();

    let records: Vec<QuadratureRecord> = stage("simulate", || {
        let config = SimConfig {
            state: SimState::Model { eta: ETA, dim },
            n_records: args.n as usize,
            schedule: PhaseSchedule::default(),
            seed: args.seed,
        };
        let recs = sample_records(&config)?;
        let path = dir.join("records.qhd");
        write_records(&path, &recs, RecordFormat::Bin)?;
        manifest.output(&path);
        let meta = SimMetadata {
            seed: args.seed,
            n_records: recs.len(),
            schedule: config.schedule,
            state: config.state.description(),
            generator: GENERATOR_NAME.to_string(),
            shard_size: SHARD_SIZE,
        };
        manifest.output(write_metadata(&path, &meta)?);
        Ok(recs)
    })?;

    let pf = stage("pattern-function estimate", || {
        let est = pf_estimate(&records, dim)?;
        write_matrix(&est.rho, &dir.join("rho_pf.json"), "pf", &mut manifest)?;
        Ok(est.rho)
    })?;

    let (en_pf, en_err) = stage("negativity bootstrap", || {
        let boot = bootstrap_uncertainty(
            &records,
            &Estimator::Pf { dim, global_phase_blocks: false },
            &BootstrapConfig {
                n_resamples: args.bootstrap as usize,
                seed: args.seed ^ 0x5eed,
                bell_js: Vec::new(),
            },
        )?;
        Ok((log_negativity(&pf)?, boot.log_negativity.std))
    })?;
    let (vac, lo, hi) = psi_summary(&pf);
    checks.push(Check {
        label: "PF elements and negativity",
        pass: (vac - 0.39).abs() <= 0.01
            && (lo - 0.305).abs() <= 0.01
            && (hi - 0.305).abs() <= 0.01
            && (en_pf - 0.416).abs() <= 0.02
            && en_err <= 0.005,
        detail: format!("rho_0000 = {vac:.4}, Psi in [{lo:.4}, {hi:.4}], E_N = {en_pf:.4} ± {en_err:.4}"),
    });

    let (ibt, ibt_eta) = stage("inverse loss map", || {
        let eta = auto_efficiency(&pf)?;
        let inv = inverse_bernoulli(&pf, eta)?;
        write_matrix(&inv.rho, &dir.join("rho_pf_ibt.json"), "pf+ibt", &mut manifest)?;
        Ok((inv.rho, eta))
    })?;

    let ml_raw = stage("maximum likelihood (ideal POVM)", || {
        let mut config = MLConfig::new(dim);
        config.max_iters = args.max_iters as usize;
        config.enforce_global_phase_blocks = true;
        let res = if args.bin_width > 0.0 {
            ml_estimate_binned(&records, &config, BinSpec { x_width: args.bin_width, ..BinSpec::default() })?
        } else {
            ml_estimate(&records, &config)?
        };
        write_matrix(&res.rho, &dir.join("rho_ml.json"), "ml", &mut manifest)?;
        Ok(res.rho)
    })?;

    let ml = stage("maximum likelihood (eta = 0.61)", || {
        let mut config = MLConfig::new(dim);
        config.eta = Some(ETA);
        config.max_iters = args.max_iters as usize;
        config.enforce_global_phase_blocks = true;
        let res = if args.bin_width > 0.0 {
            ml_estimate_binned(&records, &config, BinSpec { x_width: args.bin_width, ..BinSpec::default() })?
        } else {
            ml_estimate(&records, &config)?
        };
        write_matrix(&res.rho, &dir.join("rho_ml_eta.json"), "ml eta=0.61", &mut manifest)?;
        Ok(res.rho)
    })?;

    let grid = default_j_grid();
    let table = stage("bell scans", || {
        let columns: Vec<(&str, BellSource<'_>)> = vec![
            ("analytic_eta_0.61", BellSource::Analytic(ETA)),
            ("analytic_eta_1", BellSource::Analytic(1.0)),
            ("pf", BellSource::State(&pf)),
            ("pf_ibt", BellSource::State(&ibt)),
            ("ml", BellSource::State(&ml_raw)),
            ("ml_eta", BellSource::State(&ml)),
        ];
        let scans = columns
            .iter()
            .map(|(_, s)| bell_scan(*s, &grid))
            .collect::<qhd_core::Result<Vec<_>>>()?;
        let mut csv = String::from("J");
        for (name, _) in &columns {
            write!(csv, ",{name}").unwrap();
        }
        csv.push('\n');
        for (i, j) in grid.iter().enumerate() {
            write!(csv, "{j:.16e}").unwrap();
            for s in &scans {
                write!(csv, ",{:.16e}", s.points[i].b).unwrap();
            }
            csv.push('\n');
        }
        let path = dir.join("bell_curves.csv");
        std::fs::write(&path, csv)?;
        manifest.output(&path);
        Ok(scans)
    })?;

    let raw = &table[2];
    let raw_dev = raw.points.iter().map(|p| (p.b - analytic_bell_curve(ETA, p.j)).abs()).fold(0.0, f64::max);
    checks.push(Check {
        label: "raw Bell scan within local bound",
        pass: raw.points.iter().all(|p| p.b > -BELL_BOUND) && raw_dev <= 0.05,
        detail: format!("min B = {:.4}, max deviation from eta = 0.61 curve = {raw_dev:.4}", raw.min_b),
    });
    for (label, rho, fid_required) in [("IBT-cleaned", &ibt, false), ("ML with eta = 0.61", &ml, true)] {
        let (vac, lo, hi) = psi_summary(rho);
        let (j, b) = refine_minimum(BellSource::State(rho), &grid)?;
        let fid = rho.fidelity_with_pure(&delocalized_photon(dim))?;
        checks.push(Check {
            label: if fid_required { "ML-corrected state violates" } else { "IBT-cleaned state violates" },
            pass: (lo - 0.5).abs() <= 0.02
                && (hi - 0.5).abs() <= 0.02
                && vac < 0.02
                && (b + 2.17).abs() <= 0.05
                && (j - 0.09).abs() <= 0.02
                && (!fid_required || fid > 0.95),
            detail: format!(
                "{label}: vacuum = {vac:.4}, Psi in [{lo:.4}, {hi:.4}], min B = {b:.4} at J = {j:.4}, fidelity = {fid:.4}"
            ),
        });
    }
    let (j1, b1) = refine_minimum(BellSource::Analytic(1.0), &grid)?;
    checks.push(Check {
        label: "ideal maximal violation",
        pass: (b1 + 2.1745).abs() <= 0.001 && (j1 - 0.090).abs() <= 0.002,
        detail: format!("min B_1 = {b1:.6} at J = {j1:.6}"),
    });
    let thr = violation_threshold()?;
    checks.push(Check {
        label: "violation threshold",
        pass: thr.eta_star > 0.95 && thr.eta_star < 0.97,
        detail: format!("eta* = {:.6}", thr.eta_star),
    });
    let en_model = log_negativity(&model_state(ETA, dim)?)?;

    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "J", "B(0.61)", "B(1)", "PF", "PF+IBT", "ML", "ML(0.61)");
    for (i, j) in grid.iter().enumerate().step_by(5) {
        print!("{j:>6.3}");
        for s in &table {
            print!(" {:>10.4}", s.points[i].b);
        }
        println!();
    }
    println!();
    println!("E_N model (eta = 0.61) = {en_model:.4}");
    println!("E_N PF reconstruction  = {en_pf:.4} ± {en_err:.4}");
    println!("IBT efficiency (auto)  = {ibt_eta:.4}");
    println!();
    for c in &checks {
        println!("{}: {} | {}", if c.pass { "PASS" } else { "FAIL" }, c.label, c.detail);
    }

    let summary = json!({
        "n_records": records.len(),
        "seed": args.seed,
        "log_negativity_model": en_model,
        "log_negativity_pf": en_pf,
        "log_negativity_pf_bootstrap_std": en_err,
        "ibt_eta": ibt_eta,
        "threshold": thr,
        "checks": checks.iter().map(|c| json!({"label": c.label, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
    });
    let summary_path = dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    manifest.output(&summary_path);
    manifest.write(&summary_path)?;
    Ok(())
}
