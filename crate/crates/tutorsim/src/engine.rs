//! The tutoring-session loop: a teacher agent and a student agent take
//! strictly alternating turns (teacher first) about one picture-description
//! task, each seeing the full transcript so far from its own perspective.
//!
//! One backend call produces one utterance. A session ends either when the
//! teacher produces a question-free closing at or past the configured
//! minimum length (heuristic mode), or at the hard utterance cap.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{AuditLog, Backend, ChatMessage, GatewayError, GenerationParams};
use crate::persona::{Level, StudentProfile, TraitLevels};
use crate::prompt::{
    build_student_prompt_parts, build_teacher_prompt, template_checksums, PromptError, TaskSpec,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("image description is empty")]
    EmptyImageDescription,
    #[error("invalid session config: {reason}")]
    InvalidSessionConfig { reason: String },
    #[error("{speaker} produced an empty utterance at index {index}")]
    EmptyUtterance { speaker: Speaker, index: usize },
    #[error("dialogue invariant violated: {reason}")]
    BrokenDialogue { reason: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Speaker {
    Teacher,
    Student,
}

impl Speaker {
    pub fn name(&self) -> &'static str {
        match self {
            Speaker::Teacher => "Teacher",
            Speaker::Student => "Student",
        }
    }

    pub fn other(&self) -> Speaker {
        match self {
            Speaker::Teacher => Speaker::Student,
            Speaker::Student => Speaker::Teacher,
        }
    }
}

impl std::fmt::Display for Speaker {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub index: usize,
    pub speaker: Speaker,
    pub text: String,
}

/// Everything recorded alongside the transcript so a run can be audited and
/// re-issued: models, decoding params, the sampling seed, and checksums of
/// the exact prompt templates in effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueMetadata {
    pub teacher_params: GenerationParams,
    pub student_params: GenerationParams,
    pub seed: u64,
    pub started_at: String,
    pub template_checksums: BTreeMap<String, String>,
    /// Always present, even for persona-free sessions where `profile` is not.
    pub student_ability: Level,
}

/// One finished tutoring session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub image_description: String,
    /// `None` for persona-free baseline sessions (ability still recorded in
    /// metadata).
    pub profile: Option<StudentProfile>,
    pub utterances: Vec<Utterance>,
    pub metadata: DialogueMetadata,
}

impl Dialogue {
    /// `Teacher: ...` / `Student: ...` lines, the form the judges read.
    pub fn transcript(&self) -> String {
        render_transcript(&self.utterances)
    }

    /// Indices of teacher utterances, in order.
    pub fn teacher_indices(&self) -> Vec<usize> {
        self.utterances
            .iter()
            .filter(|u| u.speaker == Speaker::Teacher)
            .map(|u| u.index)
            .collect()
    }

    /// Structural invariants every stored dialogue must satisfy.
    pub fn check_invariants(&self) -> Result<(), EngineError> {
        if self.utterances.len() < 2 {
            return Err(EngineError::BrokenDialogue {
                reason: format!("only {} utterance(s)", self.utterances.len()),
            });
        }
        for (position, utterance) in self.utterances.iter().enumerate() {
            if utterance.index != position {
                return Err(EngineError::BrokenDialogue {
                    reason: format!("index {} at position {position}", utterance.index),
                });
            }
            let expected = if position % 2 == 0 { Speaker::Teacher } else { Speaker::Student };
            if utterance.speaker != expected {
                return Err(EngineError::BrokenDialogue {
                    reason: format!("expected {expected} at index {position}"),
                });
            }
            if utterance.text.trim().is_empty() {
                return Err(EngineError::BrokenDialogue {
                    reason: format!("empty text at index {position}"),
                });
            }
        }
        Ok(())
    }
}

pub fn render_transcript(utterances: &[Utterance]) -> String {
    utterances
        .iter()
        .map(|u| format!("{}: {}", u.speaker, u.text))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationMode {
    /// Stop on a question-free teacher turn once the minimum is reached.
    Heuristic,
    /// Only the hard cap stops the session.
    MaxOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub max_utterances: usize,
    pub min_utterances: usize,
    pub termination_mode: TerminationMode,
}

impl Default for SessionConfig {
    fn default() -> Self {
        // ~20 utterances per session is the shape of real tutoring
        // transcripts for this task.
        SessionConfig {
            max_utterances: 20,
            min_utterances: 6,
            termination_mode: TerminationMode::Heuristic,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let invalid = |reason: String| EngineError::InvalidSessionConfig { reason };
        if self.min_utterances == 0 || self.max_utterances == 0 {
            return Err(invalid("utterance bounds must be positive".into()));
        }
        if self.min_utterances % 2 != 0 || self.max_utterances % 2 != 0 {
            return Err(invalid(format!(
                "utterance bounds must be even, got min={} max={}",
                self.min_utterances, self.max_utterances
            )));
        }
        if self.min_utterances > self.max_utterances {
            return Err(invalid(format!(
                "min_utterances {} exceeds max_utterances {}",
                self.min_utterances, self.max_utterances
            )));
        }
        Ok(())
    }
}

/// Does this teacher turn close the session?
///
/// Heuristic mode: yes, iff the session would have reached the minimum
/// length including this turn and the turn asks no question ('?' or '？').
pub fn is_terminal(teacher_text: &str, utterance_count_so_far: usize, config: &SessionConfig) -> bool {
    match config.termination_mode {
        TerminationMode::MaxOnly => false,
        TerminationMode::Heuristic => {
            utterance_count_so_far + 1 >= config.min_utterances
                && !teacher_text.contains('?')
                && !teacher_text.contains('？')
        }
    }
}

/// What the student agent is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PersonaAssignment {
    /// Ability plus all five trait levels.
    Full(StudentProfile),
    /// Ability only — the persona-free baseline.
    AbilityOnly(Level),
}

impl PersonaAssignment {
    pub fn ability(&self) -> Level {
        match self {
            PersonaAssignment::Full(profile) => profile.ability,
            PersonaAssignment::AbilityOnly(level) => *level,
        }
    }

    pub fn traits(&self) -> Option<&TraitLevels> {
        match self {
            PersonaAssignment::Full(profile) => Some(&profile.traits),
            PersonaAssignment::AbilityOnly(_) => None,
        }
    }

    pub fn profile(&self) -> Option<StudentProfile> {
        match self {
            PersonaAssignment::Full(profile) => Some(*profile),
            PersonaAssignment::AbilityOnly(_) => None,
        }
    }
}

/// The transcript as one participant sees it: own turns become assistant
/// messages, the other side's turns become user messages, after the given
/// system prompt.
pub fn conversation_view(
    system_prompt: &str,
    utterances: &[Utterance],
    perspective: Speaker,
) -> Vec<ChatMessage> {
    let mut messages = Vec::with_capacity(utterances.len() + 1);
    messages.push(ChatMessage::system(system_prompt));
    for utterance in utterances {
        if utterance.speaker == perspective {
            messages.push(ChatMessage::assistant(&utterance.text));
        } else {
            messages.push(ChatMessage::user(&utterance.text));
        }
    }
    messages
}

/// One session to run: identity, task, persona, and decoding settings.
/// Each role carries its own decoding parameters (and so its own model),
/// though symmetric setups are the common case.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub task: TaskSpec,
    pub student: PersonaAssignment,
    pub config: SessionConfig,
    pub teacher_params: GenerationParams,
    pub student_params: GenerationParams,
    pub seed: u64,
}

impl Session {
    /// Run the alternating loop to completion.
    ///
    /// On a backend failure the partial transcript goes to the audit log
    /// (never to the corpus) and the error is returned.
    pub fn run(
        &self,
        teacher_backend: &Backend,
        student_backend: &Backend,
        audit: Option<&AuditLog>,
    ) -> Result<Dialogue, EngineError> {
        if self.task.image_description.trim().is_empty() {
            return Err(EngineError::EmptyImageDescription);
        }
        self.config.validate()?;
        self.teacher_params.validate()?;
        self.student_params.validate()?;

        let teacher_prompt = build_teacher_prompt(&self.task)?;
        let student_prompt =
            build_student_prompt_parts(self.student.ability(), self.student.traits(), &self.task)?;

        let started_at = chrono::Utc::now().to_rfc3339();
        let mut utterances: Vec<Utterance> = Vec::new();

        let outcome = (|| -> Result<(), EngineError> {
            loop {
                // Teacher turn.
                let text = self.next_utterance(
                    teacher_backend,
                    &teacher_prompt,
                    &utterances,
                    Speaker::Teacher,
                    audit,
                )?;
                let count_before = utterances.len();
                utterances.push(Utterance {
                    index: count_before,
                    speaker: Speaker::Teacher,
                    text: text.clone(),
                });
                if is_terminal(&text, count_before, &self.config)
                    || utterances.len() >= self.config.max_utterances
                {
                    return Ok(());
                }

                // Student turn.
                let text = self.next_utterance(
                    student_backend,
                    &student_prompt,
                    &utterances,
                    Speaker::Student,
                    audit,
                )?;
                utterances.push(Utterance {
                    index: utterances.len(),
                    speaker: Speaker::Student,
                    text,
                });
                if utterances.len() >= self.config.max_utterances {
                    return Ok(());
                }
            }
        })();

        if let Err(error) = outcome {
            if let Some(log) = audit {
                let _ = log.record(
                    "session_abandoned",
                    serde_json::json!({
                        "dialogue_id": self.id,
                        "error": error.to_string(),
                        "partial_transcript": render_transcript(&utterances),
                    }),
                );
            }
            return Err(error);
        }

        let dialogue = Dialogue {
            id: self.id.clone(),
            image_description: self.task.image_description.clone(),
            profile: self.student.profile(),
            utterances,
            metadata: DialogueMetadata {
                teacher_params: self.teacher_params.clone(),
                student_params: self.student_params.clone(),
                seed: self.seed,
                started_at,
                template_checksums: template_checksums(),
                student_ability: self.student.ability(),
            },
        };
        dialogue.check_invariants()?;
        Ok(dialogue)
    }

    fn next_utterance(
        &self,
        backend: &Backend,
        system_prompt: &str,
        utterances: &[Utterance],
        speaker: Speaker,
        audit: Option<&AuditLog>,
    ) -> Result<String, EngineError> {
        let params = match speaker {
            Speaker::Teacher => &self.teacher_params,
            Speaker::Student => &self.student_params,
        };
        let messages = conversation_view(system_prompt, utterances, speaker);
        let reply = backend.chat(&messages, params, audit)?;
        let text = reply.content.trim().to_owned();
        if text.is_empty() {
            return Err(EngineError::EmptyUtterance { speaker, index: utterances.len() });
        }
        Ok(text)
    }
}
