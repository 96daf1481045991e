//! The four model-based validation instruments and their output parsers.
//!
//! Each instrument builds a prompt from [`crate::prompt`], sends it through
//! a [`Backend`], and parses the reply into typed labels. Parsers are
//! deliberately tolerant of case, whitespace, and light markdown, but any
//! text that does not resolve to exactly one well-formed answer is a parse
//! failure — the judge is then re-asked with a corrective reminder, up to a
//! configured number of retries.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Dialogue, Speaker, Utterance};
use crate::gateway::{AuditLog, Backend, ChatMessage, Gate, GatewayError, GenerationParams};
use crate::persona::{Level, TraitDimension, TraitLevels};
use crate::prompt;

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("could not parse judge output: {detail}")]
    ParseFailure { detail: String },
    #[error("judge output unparseable after {attempts} attempts: {detail}")]
    JudgeParseFailure { attempts: u32, detail: String },
    #[error("scaffolding labels requested for a non-teacher utterance (index {index})")]
    NotTeacherUtterance { index: usize },
    #[error("scaffolding labels do not cover the teacher utterances: {detail}")]
    CoverageMismatch { detail: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// The seven tutoring moves a teacher utterance can be labelled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScaffoldingType {
    #[serde(rename = "Feeding back")]
    FeedingBack,
    Hints,
    Instructing,
    Explaining,
    Modeling,
    Questioning,
    #[serde(rename = "Social-emotional Support")]
    SocialEmotionalSupport,
}

impl ScaffoldingType {
    pub const ALL: [ScaffoldingType; 7] = [
        ScaffoldingType::FeedingBack,
        ScaffoldingType::Hints,
        ScaffoldingType::Instructing,
        ScaffoldingType::Explaining,
        ScaffoldingType::Modeling,
        ScaffoldingType::Questioning,
        ScaffoldingType::SocialEmotionalSupport,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScaffoldingType::FeedingBack => "Feeding back",
            ScaffoldingType::Hints => "Hints",
            ScaffoldingType::Instructing => "Instructing",
            ScaffoldingType::Explaining => "Explaining",
            ScaffoldingType::Modeling => "Modeling",
            ScaffoldingType::Questioning => "Questioning",
            ScaffoldingType::SocialEmotionalSupport => "Social-emotional Support",
        }
    }

    pub fn index(&self) -> usize {
        ScaffoldingType::ALL.iter().position(|t| t == self).expect("member of ALL")
    }
}

impl std::fmt::Display for ScaffoldingType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The label set for one teacher utterance. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaffoldingLabelSet {
    pub utterance_index: usize,
    pub labels: BTreeSet<ScaffoldingType>,
}

/// Everything the four instruments say about one dialogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub dialogue_id: String,
    pub predicted_traits: TraitLevels,
    pub predicted_ability: Level,
    /// All 44 statement ratings, each in [1,5]; absent when the inventory
    /// instrument was not run.
    pub bfi_ratings: Option<Vec<u8>>,
    /// One entry per teacher utterance, in utterance order.
    pub scaffolding: Vec<ScaffoldingLabelSet>,
    pub judge_model: String,
}

impl ValidationRecord {
    /// The record must label every teacher utterance exactly once.
    pub fn check_coverage(&self, dialogue: &Dialogue) -> Result<(), ValidateError> {
        let expected = dialogue.teacher_indices();
        let got: Vec<usize> = self.scaffolding.iter().map(|s| s.utterance_index).collect();
        if got != expected {
            return Err(ValidateError::CoverageMismatch {
                detail: format!("expected indices {expected:?}, got {got:?}"),
            });
        }
        if let Some(empty) = self.scaffolding.iter().find(|s| s.labels.is_empty()) {
            return Err(ValidateError::CoverageMismatch {
                detail: format!("empty label set at index {}", empty.utterance_index),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

fn level_token_pattern() -> &'static regex::Regex {
    static PATTERN: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
    PATTERN.get_or_init(|| regex::Regex::new(r"(?i)\b(high|low)\b").expect("valid regex"))
}

/// Extract exactly one High/Low label from free text. Repetitions of the
/// same label are fine; mixed labels are ambiguous; no label is a failure.
pub fn parse_level(text: &str) -> Result<Level, ValidateError> {
    let mut found: Option<Level> = None;
    for capture in level_token_pattern().captures_iter(text) {
        let level = if capture[1].eq_ignore_ascii_case("high") { Level::High } else { Level::Low };
        match found {
            None => found = Some(level),
            Some(previous) if previous != level => {
                return Err(ValidateError::ParseFailure {
                    detail: format!("ambiguous: found both High and Low in {text:?}"),
                });
            }
            Some(_) => {}
        }
    }
    found.ok_or_else(|| ValidateError::ParseFailure {
        detail: format!("no High/Low label in {text:?}"),
    })
}

/// Extract one High/Low per trait dimension, in any order, tolerating
/// prose and markdown around the `Dimension: Level` pairs. Each dimension
/// must resolve to exactly one label.
pub fn parse_trait_labels(text: &str) -> Result<TraitLevels, ValidateError> {
    let mut slots: [Option<Level>; 5] = [None; 5];
    for line in text.lines() {
        let lower = line.to_lowercase();
        for dimension in TraitDimension::ALL {
            let Some(at) = lower.find(dimension.key()) else { continue };
            let tail = &line[at + dimension.key().len()..];
            let Some(capture) = level_token_pattern().captures(tail) else { continue };
            let level =
                if capture[1].eq_ignore_ascii_case("high") { Level::High } else { Level::Low };
            if slots[dimension.index()].replace(level).is_some() {
                return Err(ValidateError::ParseFailure {
                    detail: format!("{} labelled more than once", dimension.name()),
                });
            }
        }
    }
    let mut labels = TraitLevels::uniform(Level::High);
    for dimension in TraitDimension::ALL {
        match slots[dimension.index()] {
            Some(level) => labels.set(dimension, level),
            None => {
                return Err(ValidateError::ParseFailure {
                    detail: format!("no label for {} in {text:?}", dimension.name()),
                })
            }
        }
    }
    Ok(labels)
}

fn rating_line_pattern() -> &'static regex::Regex {
    static PATTERN: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
    PATTERN.get_or_init(|| {
        regex::Regex::new(r"(?im)^\s*\**(?:item\s*)?(\d{1,2})\**\s*[).:\-][\s*]*(\d+)")
            .expect("valid regex")
    })
}

/// Parse all 44 numbered Likert ratings (`1) 4` per line, light variations
/// tolerated). Every statement number must appear exactly once with a
/// rating in [1,5].
pub fn parse_likert_ratings(text: &str) -> Result<Vec<u8>, ValidateError> {
    let mut ratings: BTreeMap<u8, u8> = BTreeMap::new();
    for capture in rating_line_pattern().captures_iter(text) {
        let item: u8 = capture[1].parse().map_err(|_| ValidateError::ParseFailure {
            detail: format!("bad item number {:?}", &capture[1]),
        })?;
        if !(1..=44).contains(&item) {
            return Err(ValidateError::ParseFailure {
                detail: format!("item number {item} outside 1..=44"),
            });
        }
        let rating: u8 = capture[2].parse().map_err(|_| ValidateError::ParseFailure {
            detail: format!("bad rating {:?}", &capture[2]),
        })?;
        if !(1..=5).contains(&rating) {
            return Err(ValidateError::ParseFailure {
                detail: format!("rating {rating} for item {item} outside [1,5]"),
            });
        }
        if ratings.insert(item, rating).is_some() {
            return Err(ValidateError::ParseFailure {
                detail: format!("item {item} rated more than once"),
            });
        }
    }
    if ratings.len() != 44 {
        let missing: Vec<u8> = (1..=44).filter(|n| !ratings.contains_key(n)).collect();
        return Err(ValidateError::ParseFailure {
            detail: format!("got {} ratings, missing items {missing:?}", ratings.len()),
        });
    }
    Ok(ratings.into_values().collect())
}

/// Lowercase and drop everything non-alphanumeric, so `Feeding back`,
/// `feeding-back`, and `Feeding Back.` all compare equal.
fn canonical_token(raw: &str) -> String {
    raw.chars().filter(char::is_ascii_alphanumeric).collect::<String>().to_lowercase()
}

fn scaffolding_alias(token: &str) -> Option<ScaffoldingType> {
    match token {
        "feedingback" => Some(ScaffoldingType::FeedingBack),
        "hints" => Some(ScaffoldingType::Hints),
        "instructing" => Some(ScaffoldingType::Instructing),
        "explaining" => Some(ScaffoldingType::Explaining),
        // Both the single- and double-l spelling appear in the wild.
        "modeling" | "modelling" => Some(ScaffoldingType::Modeling),
        "questioning" => Some(ScaffoldingType::Questioning),
        // "Social-emotional" and the "Socio-" variant name the same move.
        "socialemotionalsupport" | "socioemotionalsupport" => {
            Some(ScaffoldingType::SocialEmotionalSupport)
        }
        _ => None,
    }
}

/// Parse a comma-separated list of scaffolding type names into a non-empty
/// set, canonicalizing spelling variants. Unknown names fail with the
/// offending span.
pub fn parse_scaffolding_labels(text: &str) -> Result<BTreeSet<ScaffoldingType>, ValidateError> {
    let mut labels = BTreeSet::new();
    for raw in text.split([',', ';', '\n']) {
        let token = canonical_token(raw);
        if token.is_empty() {
            continue;
        }
        let Some(label) = scaffolding_alias(&token) else {
            return Err(ValidateError::ParseFailure {
                detail: format!("unknown scaffolding type {:?}", raw.trim()),
            });
        };
        labels.insert(label);
    }
    if labels.is_empty() {
        return Err(ValidateError::ParseFailure {
            detail: format!("no scaffolding types in {text:?}"),
        });
    }
    Ok(labels)
}

// ---------------------------------------------------------------------------
// Judge driver
// ---------------------------------------------------------------------------

/// One parse-retry round-trip limit. With `parse_retries` = K the judge is
/// called at most K+1 times per question.
pub const DEFAULT_PARSE_RETRIES: u32 = 2;

/// A validation judge: a backend plus decoding settings, retry budget, and
/// optional audit/concurrency hooks.
pub struct Judge<'a> {
    pub backend: &'a Backend,
    pub params: GenerationParams,
    pub parse_retries: u32,
    pub audit: Option<&'a AuditLog>,
    pub gate: Option<&'a Gate>,
}

impl<'a> Judge<'a> {
    pub fn new(backend: &'a Backend, params: GenerationParams) -> Self {
        Judge { backend, params, parse_retries: DEFAULT_PARSE_RETRIES, audit: None, gate: None }
    }

    fn chat(&self, messages: &[ChatMessage]) -> Result<ChatMessage, GatewayError> {
        let _permit = self.gate.map(Gate::acquire);
        self.backend.chat(messages, &self.params, self.audit)
    }

    /// Ask, parse, and re-ask with a corrective reminder on parse failure.
    fn ask<T>(
        &self,
        prompt_text: String,
        corrective: &str,
        parse: impl Fn(&str) -> Result<T, ValidateError>,
    ) -> Result<T, ValidateError> {
        let mut messages = vec![ChatMessage::user(prompt_text)];
        let mut last_failure: Option<String> = None;
        for attempt in 0..=self.parse_retries {
            let reply = match self.chat(&messages) {
                Ok(reply) => reply,
                // A scripted queue that runs dry mid-retry means the real
                // problem is the earlier unparseable reply; report that.
                Err(GatewayError::BackendExhausted) if last_failure.is_some() => {
                    return Err(ValidateError::JudgeParseFailure {
                        attempts: attempt,
                        detail: last_failure.expect("checked above"),
                    });
                }
                Err(error) => return Err(error.into()),
            };
            match parse(&reply.content) {
                Ok(value) => return Ok(value),
                Err(failure) => {
                    let detail = failure.to_string();
                    messages.push(reply);
                    messages.push(ChatMessage::user(format!(
                        "That answer could not be parsed. {corrective}"
                    )));
                    last_failure = Some(detail);
                }
            }
        }
        Err(ValidateError::JudgeParseFailure {
            attempts: self.parse_retries + 1,
            detail: last_failure.expect("at least one attempt ran"),
        })
    }

    /// Recover the five High/Low trait labels from a finished dialogue.
    pub fn categorize_traits(&self, dialogue: &Dialogue) -> Result<TraitLevels, ValidateError> {
        self.ask(
            prompt::trait_judge_prompt(&dialogue.transcript()),
            "Answer with exactly five lines, one per dimension, in the format 'Openness: High'.",
            parse_trait_labels,
        )
    }

    /// Recover the High/Low language-ability label.
    pub fn label_ability(&self, dialogue: &Dialogue) -> Result<Level, ValidateError> {
        self.ask(
            prompt::ability_judge_prompt(&dialogue.transcript()),
            "Answer with a single word: High or Low.",
            parse_level,
        )
    }

    /// Rate the student on all 44 inventory statements.
    pub fn administer_inventory(&self, dialogue: &Dialogue) -> Result<Vec<u8>, ValidateError> {
        self.ask(
            prompt::inventory_judge_prompt(&dialogue.transcript()),
            "Answer with exactly 44 lines, one per statement, in the format '1) 4'.",
            parse_likert_ratings,
        )
    }

    /// Label one teacher utterance with scaffolding types.
    pub fn label_scaffolding(
        &self,
        utterance: &Utterance,
    ) -> Result<ScaffoldingLabelSet, ValidateError> {
        if utterance.speaker != Speaker::Teacher {
            return Err(ValidateError::NotTeacherUtterance { index: utterance.index });
        }
        let labels = self.ask(
            prompt::scaffold_judge_prompt(&utterance.text),
            "Answer with the type names only, separated by commas, e.g. 'Feeding back, Questioning'.",
            parse_scaffolding_labels,
        )?;
        Ok(ScaffoldingLabelSet { utterance_index: utterance.index, labels })
    }

    /// Run every instrument over one dialogue.
    ///
    /// Judge calls happen in a fixed order — traits, ability, inventory
    /// (when enabled), then one scaffolding call per teacher utterance in
    /// index order — so scripted judges can queue replies deterministically.
    pub fn validate_dialogue(
        &self,
        dialogue: &Dialogue,
        with_inventory: bool,
    ) -> Result<ValidationRecord, ValidateError> {
        let predicted_traits = self.categorize_traits(dialogue)?;
        let predicted_ability = self.label_ability(dialogue)?;
        let bfi_ratings =
            if with_inventory { Some(self.administer_inventory(dialogue)?) } else { None };
        let scaffolding = dialogue
            .utterances
            .iter()
            .filter(|u| u.speaker == Speaker::Teacher)
            .map(|u| self.label_scaffolding(u))
            .collect::<Result<Vec<_>, _>>()?;
        let record = ValidationRecord {
            dialogue_id: dialogue.id.clone(),
            predicted_traits,
            predicted_ability,
            bfi_ratings,
            scaffolding,
            judge_model: self.params.model_name.clone(),
        };
        record.check_coverage(dialogue)?;
        Ok(record)
    }
}
