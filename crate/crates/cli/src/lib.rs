//! Command-line front end: scenario files, sweeps, oracle checks and table output.

pub mod config;
pub mod emit;
pub mod error;
pub mod oracles;
pub mod scenario;
pub mod sweep;

pub use config::{parse_config, ScenarioConfig};
pub use emit::{Cell, Format, Record, Table};
pub use error::RunError;
pub use scenario::{run_scenario, Scenario};
pub use sweep::{run_sweep, SweepSpec};

/// Reads and parses a scenario file.
pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Read { path: path.to_path_buf(), source: e })?;
    Ok(parse_config(&text)?)
}
