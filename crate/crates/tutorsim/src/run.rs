//! Batch drivers behind the CLI subcommands: generate a dialogue corpus,
//! validate it with the judge instruments, emit reports, and export
//! student responses.
//!
//! Generation and validation fan work out to a bounded thread pool; every
//! corpus write funnels through one writer, and results are committed in
//! job order so identical configs produce identical files. Both stages
//! skip records that already exist, making re-runs resumable and
//! idempotent.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Mutex;

use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::corpus::{self, CorpusError, CorpusWriter, ImageSeed, RunPaths};
use crate::engine::{Dialogue, EngineError, PersonaAssignment, Session};
use crate::gateway::{AuditLog, Gate, GatewayError};
use crate::persona::{sample_profiles, StudentProfile};
use crate::prompt::TaskSpec;
use crate::report::{self, ReportError, RunReport};
use crate::validate::{Judge, ValidateError, ValidationRecord};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Outcome of a generation pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateSummary {
    pub written: usize,
    pub skipped_existing: usize,
    pub abandoned: usize,
    /// Dialogues written per profile code.
    pub per_profile: BTreeMap<String, usize>,
}

/// Outcome of a validation pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidateSummary {
    pub validated: usize,
    pub skipped_existing: usize,
    /// (dialogue id, error rendering) per failed dialogue.
    pub failures: Vec<(String, String)>,
}

impl ValidateSummary {
    /// A validation pass "mostly failed" when more than this share of the
    /// attempted dialogues errored; the CLI maps it to its own exit code.
    pub const FAILURE_THRESHOLD: f64 = 0.10;

    pub fn failure_rate_exceeded(&self) -> bool {
        let attempted = self.validated + self.failures.len();
        if attempted == 0 {
            return false;
        }
        self.failures.len() as f64 / attempted as f64 > Self::FAILURE_THRESHOLD
    }
}

/// Run `f` over `jobs` on up to `workers` threads, returning results in
/// job order regardless of completion order.
fn parallel_map<J, R, F>(jobs: Vec<J>, workers: usize, f: F) -> Vec<R>
where
    J: Send,
    R: Send,
    F: Fn(J) -> R + Sync,
{
    let count = jobs.len();
    let queue: Mutex<VecDeque<(usize, J)>> = Mutex::new(jobs.into_iter().enumerate().collect());
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(count.max(1)) {
            scope.spawn(|| loop {
                let Some((index, job)) = queue.lock().expect("queue poisoned").pop_front() else {
                    break;
                };
                let result = f(job);
                results.lock().expect("results poisoned")[index] = Some(result);
            });
        }
    });
    results
        .into_inner()
        .expect("results poisoned")
        .into_iter()
        .map(|slot| slot.expect("every job ran"))
        .collect()
}

struct GenerationJob {
    id: String,
    seed: ImageSeed,
    profile: StudentProfile,
    session_seed: u64,
}

/// Generate one dialogue per (task seed × sampled profile) pair and
/// append them to the run's corpus. Existing dialogue ids are skipped, so
/// an interrupted run can resume. Abandoned sessions reach the audit log
/// only, never the corpus.
pub fn cmd_generate(config: &RunConfig) -> Result<GenerateSummary, RunError> {
    config.validate()?;
    let seeds = corpus::load_seeds(&config.seeds_path)?;
    let profiles = sample_profiles(
        config.profiles.count,
        config.profiles.rng_seed,
        config.profiles.strategy,
    );

    let paths = RunPaths::new(&config.output_dir, &config.run_id);
    paths.create_dirs()?;
    config.write_snapshot(&paths.config_snapshot)?;
    let audit = AuditLog::to_file(&paths.audit)?;
    let mut writer: CorpusWriter<Dialogue> = CorpusWriter::open(&paths.dialogues)?;
    let existing: BTreeSet<String> = if paths.dialogues.exists() {
        corpus::read_all::<Dialogue>(&paths.dialogues)?.into_iter().map(|d| d.id).collect()
    } else {
        BTreeSet::new()
    };

    let mut jobs = Vec::new();
    let mut skipped_existing = 0usize;
    for (ordinal, (seed, profile)) in seeds
        .iter()
        .flat_map(|seed| profiles.iter().map(move |profile| (seed, profile)))
        .enumerate()
    {
        let id = format!("{}-{}-{}-{:04}", config.run_id, seed.id, profile.code(), ordinal);
        if existing.contains(&id) {
            skipped_existing += 1;
            continue;
        }
        jobs.push(GenerationJob {
            id,
            seed: seed.clone(),
            profile: *profile,
            session_seed: config.profiles.rng_seed.wrapping_add(ordinal as u64),
        });
    }

    let outcomes = parallel_map(jobs, config.parallelism, |job| {
        // Fresh backends per session: scripted queues must not leak turns
        // across dialogues, and HTTP clients are cheap next to the calls.
        let run_one = || -> Result<Dialogue, RunError> {
            let teacher = config.teacher.backend.build()?;
            let student = config.student.backend.build()?;
            let session = Session {
                id: job.id.clone(),
                task: TaskSpec::new(&job.seed.description),
                student: PersonaAssignment::Full(job.profile),
                config: config.session,
                teacher_params: config.teacher.params.clone(),
                student_params: config.student.params.clone(),
                seed: job.session_seed,
            };
            session.run(&teacher, &student, Some(&audit)).map_err(engine_to_run_error)
        };
        (job.id.clone(), job.profile.code(), run_one())
    });

    let mut summary = GenerateSummary {
        written: 0,
        skipped_existing,
        abandoned: 0,
        per_profile: BTreeMap::new(),
    };
    for (id, profile_code, outcome) in outcomes {
        match outcome {
            Ok(dialogue) => {
                writer.append(&dialogue)?;
                summary.written += 1;
                *summary.per_profile.entry(profile_code).or_insert(0) += 1;
            }
            Err(error) => {
                summary.abandoned += 1;
                let _ = audit.record(
                    "generation_failed",
                    serde_json::json!({ "dialogue_id": id, "error": error.to_string() }),
                );
            }
        }
    }
    Ok(summary)
}

fn engine_to_run_error(error: EngineError) -> RunError {
    match error {
        EngineError::Gateway(gateway) => RunError::Gateway(gateway),
        other => RunError::Io(std::io::Error::other(other.to_string())),
    }
}

/// Validate every dialogue in the corpus that has no validation record
/// yet. Per-dialogue judge failures are logged and skipped; the summary
/// says whether the failure rate crossed the CLI's error threshold.
pub fn cmd_validate(config: &RunConfig, paths: &RunPaths) -> Result<ValidateSummary, RunError> {
    if !paths.dialogues.exists() {
        return Err(ReportError::MissingInputs {
            detail: format!("dialogue corpus not found at {}", paths.dialogues.display()),
        }
        .into());
    }
    let dialogues: Vec<Dialogue> = corpus::read_all(&paths.dialogues)?;
    let existing: BTreeSet<String> = if paths.validations.exists() {
        corpus::read_all::<ValidationRecord>(&paths.validations)?
            .into_iter()
            .map(|v| v.dialogue_id)
            .collect()
    } else {
        BTreeSet::new()
    };
    let audit = AuditLog::to_file(&paths.audit)?;
    let gate = Gate::new(config.judge_concurrency);
    let mut writer: CorpusWriter<ValidationRecord> = CorpusWriter::open(&paths.validations)?;

    let mut summary =
        ValidateSummary { validated: 0, skipped_existing: 0, failures: Vec::new() };
    let mut jobs = Vec::new();
    for dialogue in dialogues {
        if existing.contains(&dialogue.id) {
            summary.skipped_existing += 1;
        } else {
            jobs.push(dialogue);
        }
    }

    let outcomes = parallel_map(jobs, config.parallelism, |dialogue| {
        let validate_one = || -> Result<ValidationRecord, ValidateError> {
            // Fresh backend per dialogue keeps scripted judge queues
            // aligned to one dialogue's worth of questions.
            let backend = config.judge.backend.build().map_err(|error| {
                ValidateError::ParseFailure { detail: error.to_string() }
            })?;
            let judge = Judge {
                backend: &backend,
                params: config.judge.params.clone(),
                parse_retries: crate::validate::DEFAULT_PARSE_RETRIES,
                audit: Some(&audit),
                gate: Some(&gate),
            };
            judge.validate_dialogue(&dialogue, config.with_inventory)
        };
        (dialogue.id.clone(), validate_one())
    });

    for (id, outcome) in outcomes {
        match outcome {
            Ok(record) => {
                writer.append(&record)?;
                summary.validated += 1;
            }
            Err(error) => {
                let _ = audit.record(
                    "validation_failed",
                    serde_json::json!({ "dialogue_id": id, "error": error.to_string() }),
                );
                summary.failures.push((id, error.to_string()));
            }
        }
    }
    Ok(summary)
}

/// Emit every report artifact for a run directory.
pub fn cmd_report(config: &RunConfig, paths: &RunPaths) -> Result<RunReport, RunError> {
    Ok(report::generate_reports(paths, config.threshold_mode)?)
}

/// Write the grouped student-response export next to the corpora.
pub fn cmd_export_responses(paths: &RunPaths) -> Result<(std::path::PathBuf, usize), RunError> {
    let out = paths.root.join("student_responses.txt");
    let exported = report::export_student_responses(paths, &out)?;
    Ok((out, exported))
}
