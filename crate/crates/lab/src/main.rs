use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finsler_lab::{config_schema, convergence_csv, converge, load_scenario, report_schema, run_scenario, with_pool, ConfigError, RunOptions};

#[derive(Parser)]
#[command(name = "finsler-lab", version, about = "Numerical checks for Finsler metrics on chart domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a scenario and run only its metric validation.
    ValidateMetric { config: PathBuf },
    /// Run every check of a scenario and write a JSON report.
    Run {
        config: PathBuf,
        /// Directory for `<scenario>.json`; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include per-check wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Refine one check and print a CSV convergence table.
    Converge {
        config: PathBuf,
        #[arg(long)]
        check: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        factors: Vec<usize>,
    },
    /// Print the JSON schema of reports, or of scenario files with `--config`.
    ReportSchema {
        #[arg(long)]
        config: bool,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn config_error(path: &Path, e: ConfigError) -> ExitCode {
    eprintln!("error: {}: {e}", path.display());
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ValidateMetric { config } => {
            let mut scn = match load_scenario(&config) {
                Ok(s) => s,
                Err(e) => return config_error(&config, e),
            };
            scn.checks.retain(|c| c.config.kind == finsler_lab::CheckKind::Validate);
            if scn.checks.is_empty() {
                scn.checks.push(finsler_lab::config::NamedCheck::validate_default());
            }
            let report = with_pool(None, || run_scenario(&scn, &RunOptions::default()));
            print!("{}", report.to_json());
            if report.passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAIL) }
        }
        Command::Run { config, out, timing } => {
            let scn = match load_scenario(&config) {
                Ok(s) => s,
                Err(e) => return config_error(&config, e),
            };
            let report = with_pool(None, || run_scenario(&scn, &RunOptions { timing }));
            let json = report.to_json();
            match out {
                Some(dir) => {
                    let path = dir.join(format!("{}.json", scn.name));
                    if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&path, &json)) {
                        eprintln!("error: writing {}: {e}", path.display());
                        return ExitCode::from(EXIT_FAIL);
                    }
                    for c in &report.checks {
                        eprintln!("{:<28} {}", c.name, if c.passed { "pass" } else { "FAIL" });
                    }
                }
                None => print!("{json}"),
            }
            if report.passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAIL) }
        }
        Command::Converge { config, check, factors } => {
            let scn = match load_scenario(&config) {
                Ok(s) => s,
                Err(e) => return config_error(&config, e),
            };
            match with_pool(None, || converge(&scn, &check, &factors)) {
                Ok(rows) => {
                    print!("{}", convergence_csv(&rows));
                    ExitCode::SUCCESS
                }
                Err(e) => config_error(&config, e),
            }
        }
        Command::ReportSchema { config } => {
            let schema = if config { config_schema() } else { report_schema() };
            println!("{}", serde_json::to_string_pretty(&schema).expect("schema serializes"));
            ExitCode::SUCCESS
        }
    }
}
