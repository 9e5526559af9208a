//! Monte Carlo generation of two-mode homodyne records.

mod io;
mod record;
mod sampler;

pub use io::{metadata_path, read_records, write_metadata, write_records, RecordFormat, SimMetadata, BINARY_MAGIC};
pub use record::{wrap_phase, GlobalPhaseMode, PhaseSchedule, QuadratureRecord};
pub use sampler::{sample_records, sample_records_with_stats, SamplingStats, SimConfig, SimState, GENERATOR_NAME, SHARD_SIZE};
