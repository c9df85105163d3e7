//! Field files, run configuration, seeded data generation and the batch runner.

mod fbf;
mod generate;
mod run;

pub use fbf::{decode_field, encode_field, read_field, write_field};
pub use generate::{curl_velocity, generate_data, random_profile, DataFamily, DataSpec};
pub use run::{run, run_from_path, Command, KernelRun, RunConfig, RunOutcome};
