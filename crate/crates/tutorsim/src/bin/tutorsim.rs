//! Command-line front end for the tutoring-dialogue pipeline.
//!
//! Exit codes: 0 success, 1 configuration error, 2 validation failure
//! rate above threshold, 3 runtime/I-O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use tutorsim::config::RunConfig;
use tutorsim::corpus::RunPaths;
use tutorsim::run::{self, RunError};

#[derive(Parser)]
#[command(
    name = "tutorsim",
    version,
    about = "Simulate persona-conditioned tutoring dialogues, validate them with \
             model judges, and report agreement, reliability, and scaffolding statistics."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dialogue corpus from a run configuration.
    Generate {
        /// Run configuration (JSON).
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the judge instruments over every unvalidated dialogue.
    Validate {
        /// Run configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Run directory holding dialogues.jsonl.
        #[arg(long)]
        run: PathBuf,
    },
    /// Score inventories and write the report CSVs plus summary.txt.
    Report {
        /// Run directory (its config.json snapshot supplies settings).
        #[arg(long)]
        run: PathBuf,
    },
    /// Export student utterances grouped by profile for external tools.
    ExportResponses {
        /// Run directory holding dialogues.jsonl.
        #[arg(long)]
        run: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error)
            if matches!(error.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) =>
        {
            print!("{error}");
            return ExitCode::SUCCESS;
        }
        // Usage mistakes are configuration errors in this tool's contract.
        Err(error) => {
            eprint!("{error}");
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(match error {
                RunError::Config(_) => 1,
                _ => 3,
            })
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, RunError> {
    match command {
        Command::Generate { config } => {
            let config = RunConfig::load(config)?;
            let summary = run::cmd_generate(&config)?;
            let paths = RunPaths::new(&config.output_dir, &config.run_id);
            println!(
                "wrote {} dialogues to {} ({} skipped as existing, {} abandoned, {} profiles)",
                summary.written,
                paths.dialogues.display(),
                summary.skipped_existing,
                summary.abandoned,
                summary.per_profile.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config, run } => {
            let config = RunConfig::load(config)?;
            let paths = RunPaths::from_run_dir(run);
            let summary = run::cmd_validate(&config, &paths)?;
            println!(
                "validated {} dialogues ({} already had records, {} failed)",
                summary.validated,
                summary.skipped_existing,
                summary.failures.len()
            );
            for (id, error) in &summary.failures {
                eprintln!("failed {id}: {error}");
            }
            if summary.failure_rate_exceeded() {
                eprintln!(
                    "error: more than {:.0}% of dialogues failed validation",
                    run::ValidateSummary::FAILURE_THRESHOLD * 100.0
                );
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { run } => {
            let paths = RunPaths::from_run_dir(run);
            let config = RunConfig::load_snapshot(&paths.config_snapshot)?;
            let report = run::cmd_report(&config, &paths)?;
            println!(
                "reported on {} dialogues / {} validations",
                report.dialogue_count, report.validation_count
            );
            for note in &report.notes {
                println!("note: {note}");
            }
            for file in &report.files {
                println!("wrote {}", file.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportResponses { run } => {
            let paths = RunPaths::from_run_dir(run);
            let (out, exported) = run::cmd_export_responses(&paths)?;
            println!("exported {exported} student utterances to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
