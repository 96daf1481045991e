//! Run configuration: one JSON file describing backends, sampling,
//! session shape, and output layout. Secrets stay in the environment
//! (`TUTORSIM_API_KEY`); the config file is safe to commit next to the
//! corpus it produced.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SessionConfig;
use crate::gateway::{Backend, GatewayError, GenerationParams, HttpBackend, RetryPolicy};
use crate::persona::SamplingStrategy;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("could not read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path} is not valid JSON: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config: {reason}")]
    Invalid { reason: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// Where a role's completions come from.
///
/// `Scripted` holds canned replies for offline runs: every session (and
/// every validated dialogue) gets a fresh copy of the queue, so one
/// config drives any number of deterministic sessions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    Http {
        /// Overrides `TUTORSIM_ENDPOINT` when set.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        endpoint: Option<String>,
    },
    Scripted { script: Vec<String> },
}

impl BackendSpec {
    /// Instantiate a backend. Scripted specs yield an independent queue
    /// per call; HTTP specs read the API key (and, unless overridden,
    /// the endpoint) from the environment.
    pub fn build(&self) -> Result<Backend, ConfigError> {
        match self {
            BackendSpec::Http { endpoint: Some(endpoint) } => {
                let api_key = std::env::var(crate::gateway::API_KEY_ENV).ok();
                Ok(Backend::Http(HttpBackend::new(endpoint.clone(), api_key, RetryPolicy::default())))
            }
            BackendSpec::Http { endpoint: None } => Ok(Backend::Http(HttpBackend::from_env()?)),
            BackendSpec::Scripted { script } => Ok(Backend::scripted(script.clone())),
        }
    }

    pub fn is_scripted(&self) -> bool {
        matches!(self, BackendSpec::Scripted { .. })
    }
}

/// Backend plus decoding settings for one role (teacher, student, judge).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleConfig {
    pub backend: BackendSpec,
    pub params: GenerationParams,
}

/// How many profiles to draw and how.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub strategy: SamplingStrategy,
    pub count: usize,
    pub rng_seed: u64,
}

/// Which High/Low cut the inventory scorer uses: the scale midpoint, or
/// the run-level per-trait means computed at report time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdChoice {
    Midpoint,
    CorpusMean,
}

fn default_parallelism() -> usize {
    1
}

fn default_judge_concurrency() -> usize {
    4
}

fn default_with_inventory() -> bool {
    true
}

/// Everything one run needs, minus secrets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub run_id: String,
    /// Task descriptions: plain text (one per line) or JSONL seeds.
    pub seeds_path: PathBuf,
    /// Parent directory for `runs/<run_id>/`-style layouts.
    pub output_dir: PathBuf,
    pub profiles: ProfileConfig,
    pub teacher: RoleConfig,
    pub student: RoleConfig,
    pub judge: RoleConfig,
    #[serde(default)]
    pub session: SessionConfig,
    pub threshold_mode: ThresholdChoice,
    /// Worker threads for generation and validation.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Cap on simultaneous judge calls (API-rate courtesy).
    #[serde(default = "default_judge_concurrency")]
    pub judge_concurrency: usize,
    /// Run the 44-statement inventory during validation.
    #[serde(default = "default_with_inventory")]
    pub with_inventory: bool,
    /// Reserved: in-context exemplars for generation. No exemplar corpus
    /// ships with this crate, so any nonzero value is rejected.
    #[serde(default)]
    pub few_shot_examples: u32,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let config = Self::load_snapshot(path)?;
        config.validate()?;
        Ok(config)
    }

    /// Parse without checking referenced paths — for reading the snapshot
    /// inside a run directory that may have moved away from its inputs.
    pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text)
            .map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |reason: String| Err(ConfigError::Invalid { reason });
        if self.run_id.trim().is_empty() {
            return invalid("run_id must be non-empty".into());
        }
        if self
            .run_id
            .chars()
            .any(|c| !(c.is_ascii_alphanumeric() || c == '-' || c == '_'))
        {
            return invalid(format!(
                "run_id {:?} may only contain ASCII letters, digits, '-', '_'",
                self.run_id
            ));
        }
        if !self.seeds_path.exists() {
            return invalid(format!("seeds file {} does not exist", self.seeds_path.display()));
        }
        if self.parallelism < 1 {
            return invalid("parallelism must be at least 1".into());
        }
        if self.judge_concurrency < 1 {
            return invalid("judge_concurrency must be at least 1".into());
        }
        if self.few_shot_examples > 0 {
            return invalid(
                "few_shot_examples is reserved and must be 0: \
                 no exemplar corpus or selection rule is implemented"
                    .into(),
            );
        }
        self.session
            .validate()
            .map_err(|error| ConfigError::Invalid { reason: error.to_string() })?;
        Ok(())
    }

    /// Snapshot the effective config into the run directory so reports
    /// stay reproducible after the original file changes.
    pub fn write_snapshot(&self, path: impl AsRef<Path>) -> Result<(), ConfigError> {
        let path = path.as_ref();
        let pretty = serde_json::to_string_pretty(self)
            .map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })?;
        std::fs::write(path, pretty + "\n")
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Ok(())
    }

    /// A fully offline configuration: scripted teacher, student, and judge
    /// whose canned replies drive a complete generate → validate → report
    /// cycle without network access. Used by the mock-pipeline example and
    /// the integration tests; handy as a smoke test before spending API calls.
    pub fn scripted_demo(
        run_id: &str,
        seeds_path: impl Into<PathBuf>,
        output_dir: impl Into<PathBuf>,
        profile_count: usize,
    ) -> Self {
        let teacher_script = vec![
            "What do you see in the picture?".to_string(),
            "What colors did the girls use?".to_string(),
            "Why do you think she drew a fish?".to_string(),
            "Wonderful observations. You described the whole scene.".to_string(),
        ];
        let student_script = vec![
            "Um… I see two girls drawing pictures.".to_string(),
            "One used rainbow colors and… the other used blue.".to_string(),
            "Maybe she likes the sea!".to_string(),
        ];
        let ratings: String =
            (1..=44).map(|i| format!("{i}) {}", i % 5 + 1)).collect::<Vec<_>>().join("\n");
        let judge_script = vec![
            "Openness: High\nConscientiousness: High\nExtraversion: Low\nAgreeableness: High\nNeuroticism: Low"
                .to_string(),
            "High".to_string(),
            ratings,
            "Questioning".to_string(),
            "Questioning, Hints".to_string(),
            "Questioning".to_string(),
            "Feeding back, Social-emotional Support".to_string(),
        ];
        RunConfig {
            run_id: run_id.to_string(),
            seeds_path: seeds_path.into(),
            output_dir: output_dir.into(),
            profiles: ProfileConfig {
                strategy: SamplingStrategy::Grid,
                count: profile_count,
                rng_seed: 7,
            },
            teacher: RoleConfig {
                backend: BackendSpec::Scripted { script: teacher_script },
                params: GenerationParams::role_play("scripted-teacher"),
            },
            student: RoleConfig {
                backend: BackendSpec::Scripted { script: student_script },
                params: GenerationParams::role_play("scripted-student"),
            },
            judge: RoleConfig {
                backend: BackendSpec::Scripted { script: judge_script },
                params: GenerationParams::judge("scripted-judge"),
            },
            session: SessionConfig {
                max_utterances: 8,
                min_utterances: 4,
                termination_mode: crate::engine::TerminationMode::Heuristic,
            },
            threshold_mode: ThresholdChoice::Midpoint,
            parallelism: 2,
            judge_concurrency: 4,
            with_inventory: true,
            few_shot_examples: 0,
        }
    }
}
