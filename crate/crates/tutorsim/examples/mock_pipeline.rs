//! The whole pipeline, offline: generate dialogues from scripted backends,
//! validate them with a scripted judge, then write the report tables and
//! the student-response export. Everything lands in a throwaway directory
//! under the system temp dir.
//!
//! Run with: `cargo run --example mock_pipeline`

use std::fs;

use tutorsim::config::RunConfig;
use tutorsim::corpus::RunPaths;
use tutorsim::run::{cmd_export_responses, cmd_generate, cmd_report, cmd_validate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let workdir = std::env::temp_dir().join(format!("tutorsim-mock-{}", std::process::id()));
    fs::create_dir_all(&workdir)?;

    // Two picture-description tasks; plain text, one per line.
    let seeds_path = workdir.join("seeds.txt");
    fs::write(
        &seeds_path,
        "Two girls sit at a table drawing pictures of fish and rainbows.\n\
         A boy waters a row of sunflowers while a cat watches from the fence.\n",
    )?;

    let config = RunConfig::scripted_demo("mock-demo", &seeds_path, workdir.join("runs"), 4);
    let paths = RunPaths::new(&config.output_dir, &config.run_id);

    let generated = cmd_generate(&config)?;
    println!(
        "generate: {} dialogues written ({} abandoned, {} already present)",
        generated.written, generated.abandoned, generated.skipped_existing
    );
    for (profile, count) in &generated.per_profile {
        println!("  {profile}: {count}");
    }

    let validated = cmd_validate(&config, &paths)?;
    println!(
        "validate: {} judged, {} skipped, {} failed",
        validated.validated,
        validated.skipped_existing,
        validated.failures.len()
    );

    let report = cmd_report(&config, &paths)?;
    println!(
        "report: {} dialogues x {} validations -> {} files",
        report.dialogue_count,
        report.validation_count,
        report.files.len()
    );
    for file in &report.files {
        println!("  {}", file.display());
    }
    for note in &report.notes {
        println!("  note: {note}");
    }

    let (export_path, utterances) = cmd_export_responses(&paths)?;
    println!("export: {utterances} student utterances -> {}", export_path.display());

    // Peek at one table so the run leaves something concrete on screen.
    let agreement = fs::read_to_string(paths.report_dir.join("trait_agreement.csv"))?;
    println!("\ntrait_agreement.csv:\n{agreement}");

    println!("artifacts kept under {}", workdir.display());
    Ok(())
}
