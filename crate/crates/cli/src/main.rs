use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ubmlab_cli::config::SuiteConfig;
use ubmlab_cli::{report, table, CliError};

#[derive(Parser)]
#[command(name = "ubmlab", version, about = "Simulation and verification of moment identities for unitary matrix processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Suite configuration file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the Monte Carlo path count
    #[arg(long)]
    paths: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the configured moments and write a CSV table
    Simulate(Common),
    /// Run the configured identity checks and write a JSON report
    Verify {
        #[command(flatten)]
        common: Common,
        /// Negative-control test hook: corrupt the parity constant of the
        /// moment ODE so the corresponding check must fail
        #[arg(long, hide = true)]
        corrupt_parity_constant: bool,
    },
    /// Merge moment CSVs into one plot-ready table with analytic curves
    Table {
        #[command(flatten)]
        common: Common,
        /// Moment CSV files produced by the simulate subcommand
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Number of dense samples per analytic curve
        #[arg(long, default_value_t = 101)]
        curve_points: usize,
    },
}

fn load(common: &Common) -> Result<SuiteConfig, CliError> {
    let mut cfg = SuiteConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(paths) = common.paths {
        cfg.paths = paths;
    }
    Ok(cfg)
}

fn write_out(cfg: &SuiteConfig, file: &str, contents: &str) -> Result<PathBuf, CliError> {
    let dir = cfg.resolved_out_dir();
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(file);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Simulate(common) => {
            let cfg = load(&common)?;
            let csv = report::simulate_csv(&cfg)?;
            let path = write_out(&cfg, "moments.csv", &csv)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Verify {
            common,
            corrupt_parity_constant,
        } => {
            let cfg = load(&common)?;
            let (run_report, verdicts) = report::run_verification(&cfg, corrupt_parity_constant)?;
            let json = serde_json::to_string_pretty(&run_report)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let path = write_out(&cfg, "report.json", &json)?;
            print!("{}", report::human_summary(&verdicts));
            println!("wrote {}", path.display());
            if run_report.pass {
                Ok(())
            } else {
                Err(CliError::VerificationFailed(
                    verdicts.iter().filter(|v| !v.pass).count(),
                ))
            }
        }
        Command::Table {
            common,
            inputs,
            curve_points,
        } => {
            let cfg = load(&common)?;
            let parsed = inputs
                .iter()
                .map(|p| table::read_moment_csv(p))
                .collect::<Result<Vec<_>, _>>()?;
            let csv = table::build_table(&cfg, &parsed, curve_points)?;
            let path = write_out(&cfg, "table.csv", &csv)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
