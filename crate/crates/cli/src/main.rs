use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phdiss_cli::report::probe_csv;
use phdiss_cli::{run_config, verify_paper};

#[derive(Parser)]
#[command(name = "phdiss", version, about = "Dissipation diagnostics for discretized port-Hamiltonian systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a `key = value` config file; $PHDISS_OUT overrides out_dir.
    Run { config: PathBuf },
    /// Check closed-form reference values and print a CSV table.
    VerifyPaper {
        #[arg(long, default_value_t = 201)]
        n_grid: usize,
    },
    /// Print the closability probe table for one model and sequence.
    Probe {
        /// transport, heat or skew_damped
        model: String,
        /// power, scaled_sine, zero or scaled:<state preset>
        sequence: String,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 401)]
        n_grid: usize,
        /// Used by skew_damped only.
        #[arg(long, default_value_t = 0.0)]
        damping: f64,
    },
}

const CHECK_FAILED: u8 = 1;
const USAGE_ERROR: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match run_config(&config) {
            Ok(out) => {
                for t in &out.tasks {
                    println!("{}: {}", t.task, t.status.as_str());
                }
                println!("reports written to {}", out.out_dir.display());
                if out.all_passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(CHECK_FAILED)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(USAGE_ERROR)
            }
        },
        Command::VerifyPaper { n_grid } => match verify_paper(n_grid) {
            Ok(b) => {
                print!("{}", b.to_csv());
                eprintln!("{}/{} checks passed", b.passed_count(), b.rows.len());
                if b.all_passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(CHECK_FAILED)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(USAGE_ERROR)
            }
        },
        Command::Probe {
            model,
            sequence,
            n_max,
            n_grid,
            damping,
        } => match phdiss_cli::probe(&model, &sequence, n_grid, n_max, damping) {
            Ok(r) => {
                print!("{}", probe_csv(&r));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(USAGE_ERROR)
            }
        },
    }
}
