//! The command-line contract, exercised against the real binary: exit
//! codes (0 success, 1 config/usage, 2 validation mostly failed,
//! 3 runtime), resumable re-runs, and the shape of every artifact a full
//! generate → validate → report → export pass leaves behind.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tutorsim::config::{BackendSpec, RunConfig};

fn tutorsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tutorsim"))
}

fn run(args: &[&str]) -> Output {
    tutorsim().args(args).output().expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Write a fully scripted two-seed configuration into `dir` and return
/// (config path, run directory).
fn scripted_config(dir: &Path, run_id: &str) -> (PathBuf, PathBuf) {
    let seeds = dir.join("seeds.txt");
    std::fs::write(
        &seeds,
        "Two girls sit at a table drawing pictures of fish and rainbows.\n\
         A boy waters a row of sunflowers while a cat watches from the fence.\n",
    )
    .unwrap();
    let config = RunConfig::scripted_demo(run_id, &seeds, dir.join("runs"), 4);
    let config_path = dir.join("config.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    (config_path, dir.join("runs").join(run_id))
}

#[test]
fn full_run_via_binary_succeeds_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let (config, run_dir) = scripted_config(dir.path(), "cli-full");
    let config = config.to_str().unwrap();
    let run_dir_str = run_dir.to_str().unwrap();

    let generate = run(&["generate", "--config", config]);
    assert_eq!(exit_code(&generate), 0, "stderr: {}", stderr(&generate));
    assert!(stdout(&generate).contains("wrote 8 dialogues"), "stdout: {}", stdout(&generate));
    assert!(run_dir.join("dialogues.jsonl").exists());
    assert!(run_dir.join("config.json").exists(), "snapshot written next to the corpus");

    // Re-running generation must not duplicate anything.
    let again = run(&["generate", "--config", config]);
    assert_eq!(exit_code(&again), 0);
    assert!(stdout(&again).contains("wrote 0 dialogues"), "stdout: {}", stdout(&again));
    assert!(stdout(&again).contains("8 skipped as existing"));

    let validate = run(&["validate", "--config", config, "--run", run_dir_str]);
    assert_eq!(exit_code(&validate), 0, "stderr: {}", stderr(&validate));
    assert!(stdout(&validate).contains("validated 8 dialogues"));
    let validations = std::fs::read(run_dir.join("validations.jsonl")).unwrap();

    // A second pass skips every dialogue and leaves the records untouched.
    let revalidate = run(&["validate", "--config", config, "--run", run_dir_str]);
    assert_eq!(exit_code(&revalidate), 0);
    assert!(stdout(&revalidate).contains("8 already had records"));
    assert_eq!(std::fs::read(run_dir.join("validations.jsonl")).unwrap(), validations);

    let report = run(&["report", "--run", run_dir_str]);
    assert_eq!(exit_code(&report), 0, "stderr: {}", stderr(&report));
    assert!(stdout(&report).contains("reported on 8 dialogues / 8 validations"));
    for table in [
        "trait_agreement.csv",
        "ability_agreement.csv",
        "bfi_summary.csv",
        "bfi_correlations.csv",
        "trait_judge_vs_inventory.csv",
        "trait_scaffolding_high.csv",
        "trait_scaffolding_low.csv",
        "ability_scaffolding.csv",
        "summary.txt",
    ] {
        assert!(run_dir.join("report").join(table).exists(), "missing {table}");
    }
    assert!(run_dir.join("bfi_scores.jsonl").exists());

    let export = run(&["export-responses", "--run", run_dir_str]);
    assert_eq!(exit_code(&export), 0, "stderr: {}", stderr(&export));
    assert!(stdout(&export).contains("exported 24 student utterances"));
    let exported = std::fs::read_to_string(run_dir.join("student_responses.txt")).unwrap();
    assert!(exported.contains("[profile abH-oHcHeHaHnH]"));
    assert!(exported.contains("## dialogue cli-full-seed-0001-abH-oHcHeHaHnH-0000"));
    assert!(exported.contains("Um… I see two girls drawing pictures."));
}

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_eq!(exit_code(&help), 0);
    assert!(stdout(&help).contains("generate"));
    assert!(stdout(&help).contains("export-responses"));

    let version = run(&["--version"]);
    assert_eq!(exit_code(&version), 0);
    assert!(stdout(&version).contains("tutorsim"));
}

#[test]
fn usage_and_config_errors_exit_one() {
    // No subcommand at all.
    let bare = run(&[]);
    assert_eq!(exit_code(&bare), 1);

    // Unknown flag.
    let unknown = run(&["generate", "--confg", "x.json"]);
    assert_eq!(exit_code(&unknown), 1);

    // Config file that does not exist.
    let missing = run(&["generate", "--config", "/nonexistent/config.json"]);
    assert_eq!(exit_code(&missing), 1);
    assert!(stderr(&missing).contains("error"));

    // Config that parses but fails validation: the few-shot hook is
    // reserved and must stay at zero.
    let dir = tempfile::tempdir().unwrap();
    let (config_path, _) = scripted_config(dir.path(), "cli-invalid");
    let mut parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&config_path).unwrap()).unwrap();
    parsed["few_shot_examples"] = serde_json::json!(3);
    std::fs::write(&config_path, serde_json::to_string_pretty(&parsed).unwrap()).unwrap();
    let invalid = run(&["generate", "--config", config_path.to_str().unwrap()]);
    assert_eq!(exit_code(&invalid), 1);
    assert!(stderr(&invalid).contains("few_shot_examples"), "stderr: {}", stderr(&invalid));
}

#[test]
fn unparseable_judge_replies_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (config_path, run_dir) = scripted_config(dir.path(), "cli-judge-broken");
    let generate = run(&["generate", "--config", config_path.to_str().unwrap()]);
    assert_eq!(exit_code(&generate), 0);

    // Swap in a judge that only ever answers noise: every parse attempt
    // (initial ask plus two corrective retries) burns one reply.
    let mut config: RunConfig =
        serde_json::from_str(&std::fs::read_to_string(&config_path).unwrap()).unwrap();
    config.judge.backend = BackendSpec::Scripted {
        script: vec!["no idea".to_string(), "still nothing".to_string(), "shrug".to_string()],
    };
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    let validate = run(&[
        "validate",
        "--config",
        config_path.to_str().unwrap(),
        "--run",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&validate), 2, "stderr: {}", stderr(&validate));
    assert!(stderr(&validate).contains("failed validation"), "stderr: {}", stderr(&validate));
    assert!(stdout(&validate).contains("8 failed"), "stdout: {}", stdout(&validate));
}

#[test]
fn missing_run_inputs_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let (config_path, run_dir) = scripted_config(dir.path(), "cli-no-corpus");
    std::fs::create_dir_all(&run_dir).unwrap();

    // Validating before anything was generated is a runtime error, not a
    // configuration mistake.
    let validate = run(&[
        "validate",
        "--config",
        config_path.to_str().unwrap(),
        "--run",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&validate), 3, "stderr: {}", stderr(&validate));
    assert!(stderr(&validate).contains("dialogues.jsonl"), "stderr: {}", stderr(&validate));

    let export = run(&["export-responses", "--run", run_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&export), 3);
}
