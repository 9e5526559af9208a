use qhd_core::fock::{ModeDim, TwoModeDensityMatrix};
use qhd_core::sim::{
    sample_records_with_stats, write_metadata, write_records, PhaseSchedule, RecordFormat, SimConfig, SimMetadata,
    SimState, GENERATOR_NAME, SHARD_SIZE,
};

use crate::args::{FormatArg, SimulateArgs};
use crate::failure::{CliResult, Failure};
use crate::manifest::ManifestBuilder;

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("simulate", args, Some(args.seed));
    let state = match (args.eta, &args.state) {
        (Some(eta), None) => SimState::Model {
            eta,
            dim: ModeDim::new(args.dim as usize)?,
        },
        (None, Some(path)) => {
            manifest.input(path);
            let (rho, _) = TwoModeDensityMatrix::read_json(path).map_err(|e| Failure::from(e).context(path.display()))?;
            SimState::Matrix(rho)
        }
        _ => return Err(Failure::usage("exactly one of --eta or --state is required")),
    };
    let config = SimConfig {
        state,
        n_records: args.n as usize,
        schedule: PhaseSchedule::new(args.phase_steps as usize)?,
        seed: args.seed,
    };
    let (records, stats) = sample_records_with_stats(&config).map_err(|e| Failure::from(e).context("sampling"))?;
    let format = match args.format {
        FormatArg::Csv => RecordFormat::Csv,
        FormatArg::Bin => RecordFormat::Bin,
    };
    write_records(&args.out, &records, format).map_err(|e| Failure::from(e).context(args.out.display()))?;
    manifest.output(&args.out);
    let meta = SimMetadata {
        seed: args.seed,
        n_records: records.len(),
        schedule: config.schedule,
        state: config.state.description(),
        generator: GENERATOR_NAME.to_string(),
        shard_size: SHARD_SIZE,
    };
    manifest.output(write_metadata(&args.out, &meta)?);
    let manifest_path = manifest.write(&args.out)?;
    eprintln!(
        "wrote {} records to {} (acceptance rate {:.3}); manifest {}",
        records.len(),
        args.out.display(),
        stats.acceptance_rate(),
        manifest_path.display()
    );
    Ok(())
}
