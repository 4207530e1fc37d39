use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vexnorm::verify::acceptance;
use vexnorm_cli::{run_config, run_sweep, CliError, ExperimentConfig, SweepParam};

/// Numerical experiments on variable-exponent Herz-Morrey spaces.
#[derive(Parser)]
#[command(name = "vexnorm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in a config file.
    Run { config: PathBuf },
    /// Repeat the ratio experiment over values of one parameter.
    Sweep {
        config: PathBuf,
        /// One of alpha, lambda, beta, m, L, k_max.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        values: String,
    },
    /// Run the built-in acceptance suite.
    Selftest,
}

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "VEXNORM_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        CliError::Argument(format!(
            "{THREADS_VAR} must be a positive integer, got {v:?}"
        ))
    })?;
    if n == 0 {
        return Err(CliError::Argument(format!(
            "{THREADS_VAR} must be positive"
        )));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Argument(format!("cannot start thread pool: {e}")))
}

fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::Argument(format!("cannot parse sweep value {v:?}")))
        })
        .collect()
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    init_threads()?;
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = run_config(&cfg)?;
            for c in &summary.checks {
                println!(
                    "{} {}: {} rows in {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.rows,
                    c.csv
                );
            }
            if let Some(note) = &summary.note {
                println!("{note}");
            }
            println!(
                "summary written to {}",
                cfg.output.dir.join("summary.json").display()
            );
            if summary.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                for name in &summary.failures {
                    let c = summary
                        .checks
                        .iter()
                        .find(|c| &c.name == name)
                        .expect("failed check is listed");
                    let metrics = serde_json::to_string(&c.metrics)
                        .map_err(|e| CliError::Json(e.to_string()))?;
                    eprintln!("check {name} failed: {metrics}");
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Sweep {
            config,
            param,
            values,
        } => {
            let param: SweepParam = param.parse()?;
            let values = parse_values(&values)?;
            let cfg = ExperimentConfig::load(&config)?;
            let (path, rows) = run_sweep(&cfg, param, &values)?;
            println!("{} rows written to {}", rows.len(), path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let results = acceptance::run_all();
            for c in &results {
                println!("{c}");
            }
            let failed: Vec<_> = results.iter().filter(|c| !c.passed).collect();
            for c in &failed {
                eprintln!("criterion {} failed: {}", c.id, c.detail);
            }
            Ok(if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
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
