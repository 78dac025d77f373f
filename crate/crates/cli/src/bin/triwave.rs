use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use triwave::emit::emit;
use triwave::oracles::verify;
use triwave::{load_config, run_scenario, run_sweep, Format, RunError, ScenarioConfig, SweepSpec, Table};

#[derive(Parser)]
#[command(name = "triwave", version, about = "Steady-state difference-frequency generation in three-level media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evaluate a scenario over a range of one numeric key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted configuration key, e.g. `drives.e1`.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Logarithmic spacing.
        #[arg(long)]
        log: bool,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the oracle checks and print a pass/fail table.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &std::path::Path) -> Result<ScenarioConfig, RunError> {
    let cfg = load_config(path)?;
    for line in cfg.provenance() {
        eprintln!("{line}");
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<ExitCode, RunError> {
    match cli.command {
        Command::Run { config, output, format } => {
            let cfg = load(&config)?;
            let table = Table::from_records(vec![run_scenario(&cfg)?]);
            emit(&table, format, output.as_deref())?;
        }
        Command::Sweep { config, param, from, to, steps, log, output, format } => {
            let cfg = load(&config)?;
            let table = run_sweep(&cfg, &SweepSpec { param, from, to, steps, log })?;
            emit(&table, format, Some(&output))?;
        }
        Command::Verify { config } => {
            let cfg = load(&config)?;
            let checks = verify(&cfg)?;
            let width = checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
            for c in &checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                println!("{verdict}  {:<width$}  {:.3e}  ({})", c.name, c.value, c.bound);
            }
            if checks.iter().any(|c| !c.pass) {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
