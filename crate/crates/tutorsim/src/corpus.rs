//! Append-only JSON Lines persistence for dialogues, validation records,
//! and inventory scores, plus the on-disk layout of a run directory.
//!
//! Corpora are research artifacts: one self-describing JSON object per
//! line, always parsable by generic tooling, with a `schema_version` field
//! stamped on every record. Writes are flushed and synced before returning
//! so a crashed run leaves at most a clean prefix.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bfi::BfiScore;
use crate::engine::Dialogue;
use crate::validate::ValidationRecord;

/// Stamped on every persisted record; bump on breaking layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("record does not fit the file: {detail}")]
    SchemaMismatch { detail: String },
    #[error("line {line} is not a valid record: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("seed file {path} contains no descriptions")]
    EmptySeedFile { path: PathBuf },
    #[error("could not encode record: {0}")]
    Encode(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The version envelope wrapped around every persisted record. `flatten`
/// keeps the domain fields at the top level of each JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub record: T,
}

/// A record type that can live in a corpus file. `record_id` is the
/// uniqueness key within one file, for kinds that have one.
pub trait CorpusRecord: Serialize + DeserializeOwned {
    fn record_id(&self) -> Option<&str>;
}

impl CorpusRecord for Dialogue {
    fn record_id(&self) -> Option<&str> {
        Some(&self.id)
    }
}

impl CorpusRecord for ValidationRecord {
    fn record_id(&self) -> Option<&str> {
        Some(&self.dialogue_id)
    }
}

/// One scored inventory, keyed by the dialogue it was administered over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfiRecord {
    pub dialogue_id: String,
    pub score: BfiScore,
}

impl CorpusRecord for BfiRecord {
    fn record_id(&self) -> Option<&str> {
        Some(&self.dialogue_id)
    }
}

/// Sequential writer for one corpus file. Opening an existing file reads
/// it back first, so id uniqueness holds across process restarts.
pub struct CorpusWriter<T> {
    path: PathBuf,
    file: File,
    seen_ids: BTreeSet<String>,
    _kind: PhantomData<T>,
}

impl<T: CorpusRecord> CorpusWriter<T> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref().to_path_buf();
        let seen_ids = if path.exists() {
            read_all::<T>(&path)?
                .iter()
                .filter_map(|record| record.record_id().map(str::to_owned))
                .collect()
        } else {
            BTreeSet::new()
        };
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(CorpusWriter { path, file, seen_ids, _kind: PhantomData })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Append one record as a single line, durable before returning.
    pub fn append(&mut self, record: &T) -> Result<(), CorpusError> {
        if let Some(id) = record.record_id() {
            if !self.seen_ids.insert(id.to_owned()) {
                return Err(CorpusError::SchemaMismatch {
                    detail: format!("duplicate record id {id:?} in {}", self.path.display()),
                });
            }
        }
        let envelope = Versioned { schema_version: SCHEMA_VERSION, record };
        let mut line = serde_json::to_string(&envelope)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        self.file.sync_data()?;
        Ok(())
    }
}

/// Read a whole corpus file strictly: every line must be a versioned
/// record of the expected kind, ids must be unique, order is preserved.
pub fn read_all<T: CorpusRecord>(path: impl AsRef<Path>) -> Result<Vec<T>, CorpusError> {
    let reader = BufReader::new(File::open(path.as_ref())?);
    let mut records = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let number = index + 1;
        if line.trim().is_empty() {
            return Err(CorpusError::MalformedLine {
                line: number,
                detail: "blank line".into(),
            });
        }
        let envelope: Versioned<T> =
            serde_json::from_str(&line).map_err(|error| CorpusError::MalformedLine {
                line: number,
                detail: error.to_string(),
            })?;
        if envelope.schema_version != SCHEMA_VERSION {
            return Err(CorpusError::MalformedLine {
                line: number,
                detail: format!(
                    "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                    envelope.schema_version
                ),
            });
        }
        if let Some(id) = envelope.record.record_id() {
            if !seen_ids.insert(id.to_owned()) {
                return Err(CorpusError::SchemaMismatch {
                    detail: format!("duplicate record id {id:?} at line {number}"),
                });
            }
        }
        records.push(envelope.record);
    }
    Ok(records)
}

/// One task image for dialogue generation: an id and its description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSeed {
    pub id: String,
    pub description: String,
}

/// Load task seeds from either plain text (one description per non-blank
/// line, ids generated as `seed-0001`, ...) or JSONL (`{"id", "description"}`
/// per line, ids preserved). The format is sniffed from the first
/// non-blank line.
pub fn load_seeds(path: impl AsRef<Path>) -> Result<Vec<ImageSeed>, CorpusError> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push((index + 1, line));
        }
    }
    let Some((_, first)) = lines.first() else {
        return Err(CorpusError::EmptySeedFile { path: path.to_path_buf() });
    };

    let seeds = if first.trim_start().starts_with('{') {
        lines
            .iter()
            .map(|(number, line)| {
                let seed: ImageSeed =
                    serde_json::from_str(line).map_err(|error| CorpusError::MalformedLine {
                        line: *number,
                        detail: error.to_string(),
                    })?;
                if seed.description.trim().is_empty() {
                    return Err(CorpusError::MalformedLine {
                        line: *number,
                        detail: "empty description".into(),
                    });
                }
                Ok(seed)
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        lines
            .iter()
            .enumerate()
            .map(|(ordinal, (_, line))| ImageSeed {
                id: format!("seed-{:04}", ordinal + 1),
                description: line.trim().to_owned(),
            })
            .collect()
    };
    Ok(seeds)
}

/// Where one run's artifacts live: `<runs_root>/<run_id>/` holds the three
/// corpora, the audit log, a config snapshot, and a `report/` directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPaths {
    pub root: PathBuf,
    pub dialogues: PathBuf,
    pub validations: PathBuf,
    pub bfi_scores: PathBuf,
    pub audit: PathBuf,
    pub config_snapshot: PathBuf,
    pub report_dir: PathBuf,
}

impl RunPaths {
    pub fn new(runs_root: impl AsRef<Path>, run_id: &str) -> Self {
        Self::from_run_dir(runs_root.as_ref().join(run_id))
    }

    /// Address an existing run directory directly (e.g. a CLI `--run` flag).
    pub fn from_run_dir(root: impl Into<PathBuf>) -> Self {
        let root = root.into();
        RunPaths {
            dialogues: root.join("dialogues.jsonl"),
            validations: root.join("validations.jsonl"),
            bfi_scores: root.join("bfi_scores.jsonl"),
            audit: root.join("audit.jsonl"),
            config_snapshot: root.join("config.json"),
            report_dir: root.join("report"),
            root,
        }
    }

    /// Create the run directory tree (idempotent).
    pub fn create_dirs(&self) -> Result<(), CorpusError> {
        std::fs::create_dir_all(&self.root)?;
        std::fs::create_dir_all(&self.report_dir)?;
        Ok(())
    }
}
