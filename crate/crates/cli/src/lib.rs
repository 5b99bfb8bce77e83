//! Scenario runner for the sub-linear expectation toolkit.
//!
//! A scenario file is a JSON array of records; each record names a `kind`
//! and its parameters. [`run`] executes them in parallel and [`emit`] writes
//! the reports as CSV or JSON.

pub mod emit;
pub mod error;
pub mod runner;
pub mod scenario;

pub use emit::{emit, write_csv, write_json, Format, CSV_HEADER};
pub use error::ConfigError;
pub use runner::{run, run_one, Provenance, ReportRow, RunReport, Status};
pub use scenario::{parse_scenarios, parse_scenarios_str, FunctionSpec, FunctionalSpec, Scenario, ScenarioKind, KINDS};

/// Environment variable holding the default degree of parallelism.
pub const PARALLEL_ENV: &str = "SUBLAB_PARALLEL";

/// Applies a command-line seed to every randomized scenario.
pub fn override_seed(scenarios: &mut [Scenario], seed: u64) {
    for s in scenarios {
        s.kind.set_seed(seed);
    }
}
