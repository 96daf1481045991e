//! Prompt assembly for the two role-play agents and the four judges.
//!
//! All wording lives in the template files under `prompts/` (embedded at
//! compile time) with `{{name}}` placeholders; this module only fills the
//! holes. The student persona blocks are assembled from the descriptor
//! phrases in [`crate::persona`], one line per dimension in canonical order.

use std::fmt::Write as _;

use thiserror::Error;

use crate::persona::{ability_description, trait_description, Level, StudentProfile, TraitLevels};

pub const TEACHER_ROLE_TEMPLATE: &str = include_str!("../prompts/teacher_role.txt");
pub const STUDENT_ROLE_TEMPLATE: &str = include_str!("../prompts/student_role.txt");
pub const TRAIT_JUDGE_TEMPLATE: &str = include_str!("../prompts/trait_judge.txt");
pub const ABILITY_JUDGE_TEMPLATE: &str = include_str!("../prompts/ability_judge.txt");
pub const INVENTORY_JUDGE_TEMPLATE: &str = include_str!("../prompts/bfi_judge.txt");
pub const SCAFFOLD_JUDGE_TEMPLATE: &str = include_str!("../prompts/scaffold_judge.txt");

/// Every embedded template, by file stem. Used by the snapshot checksums.
pub fn templates() -> [(&'static str, &'static str); 6] {
    [
        ("teacher_role", TEACHER_ROLE_TEMPLATE),
        ("student_role", STUDENT_ROLE_TEMPLATE),
        ("trait_judge", TRAIT_JUDGE_TEMPLATE),
        ("ability_judge", ABILITY_JUDGE_TEMPLATE),
        ("bfi_judge", INVENTORY_JUDGE_TEMPLATE),
        ("scaffold_judge", SCAFFOLD_JUDGE_TEMPLATE),
    ]
}

/// SHA-256 of each embedded template, keyed by file stem. Recorded in every
/// dialogue's metadata so corpus entries pin the exact wording they used.
pub fn template_checksums() -> std::collections::BTreeMap<String, String> {
    use sha2::Digest;
    templates()
        .iter()
        .map(|(name, text)| {
            let digest = sha2::Sha256::digest(text.as_bytes());
            ((*name).to_string(), hex::encode(digest))
        })
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("task image description is empty")]
    EmptyTask,
    #[error("template `{template}` has no placeholder `{{{{{name}}}}}`")]
    UnknownPlaceholder { template: String, name: String },
    #[error("placeholder `{{{{{name}}}}}` in template `{template}` was not filled")]
    UnfilledPlaceholder { template: String, name: String },
}

/// The picture-description task both agents talk about.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TaskSpec {
    pub image_description: String,
}

impl TaskSpec {
    pub fn new(image_description: impl Into<String>) -> Self {
        TaskSpec {
            image_description: image_description.into(),
        }
    }

    /// The stock classroom-drawing scene used by the examples and the
    /// default configuration.
    pub fn classroom_drawing() -> Self {
        TaskSpec::new(
            "In a classroom, one girl drew a rainbow and another girl drew a fish under the sea",
        )
    }

    fn check(&self) -> Result<(), PromptError> {
        if self.image_description.trim().is_empty() {
            Err(PromptError::EmptyTask)
        } else {
            Ok(())
        }
    }
}

/// Fill every `{{name}}` hole in `template`. Fails if the template contains
/// a hole with no matching variable, or a variable matches no hole.
pub fn render(template_name: &str, template: &str, vars: &[(&str, &str)]) -> Result<String, PromptError> {
    let mut out = template.to_owned();
    for (name, value) in vars {
        let hole = format!("{{{{{name}}}}}");
        if !out.contains(&hole) {
            return Err(PromptError::UnknownPlaceholder {
                template: template_name.to_owned(),
                name: (*name).to_owned(),
            });
        }
        out = out.replace(&hole, value);
    }
    if let Some(start) = out.find("{{") {
        let rest = &out[start + 2..];
        let name = rest.split("}}").next().unwrap_or(rest).to_owned();
        return Err(PromptError::UnfilledPlaceholder {
            template: template_name.to_owned(),
            name,
        });
    }
    Ok(out)
}

/// One `Dimension: phrase; phrase; phrase;` line per dimension, in
/// canonical order, under a `[Personality Description]` header.
pub fn personality_block(traits: &TraitLevels) -> String {
    let mut block = String::from("[Personality Description]\n");
    for (dim, level) in traits.iter() {
        let d = trait_description(dim, level);
        let _ = writeln!(block, "{}: {};", dim.name(), d.descriptors.join("; "));
    }
    block
}

/// Single `[Language Ability]` line carrying the level's descriptor phrases.
pub fn ability_block(ability: Level) -> String {
    let d = ability_description(ability);
    format!("[Language Ability] {}.\n", d.descriptors.join("; "))
}

/// System prompt for the teacher agent.
pub fn build_teacher_prompt(task: &TaskSpec) -> Result<String, PromptError> {
    task.check()?;
    render(
        "teacher_role",
        TEACHER_ROLE_TEMPLATE,
        &[("image_description", &task.image_description)],
    )
}

/// System prompt for a persona-conditioned student agent.
pub fn build_student_prompt(profile: &StudentProfile, task: &TaskSpec) -> Result<String, PromptError> {
    build_student_prompt_parts(profile.ability, Some(&profile.traits), task)
}

/// General form: `traits: None` produces the ability-only student prompt
/// used by the persona-free baseline sessions.
pub fn build_student_prompt_parts(
    ability: Level,
    traits: Option<&TraitLevels>,
    task: &TaskSpec,
) -> Result<String, PromptError> {
    task.check()?;
    let personality = traits.map(personality_block).unwrap_or_default();
    render(
        "student_role",
        STUDENT_ROLE_TEMPLATE,
        &[
            ("personality_block", &personality),
            ("ability_block", &ability_block(ability)),
            ("image_description", &task.image_description),
        ],
    )
}

/// Judge prompt: recover High/Low trait labels from a finished dialogue.
pub fn trait_judge_prompt(dialogue_content: &str) -> String {
    render(
        "trait_judge",
        TRAIT_JUDGE_TEMPLATE,
        &[("dialogue_content", dialogue_content)],
    )
    .expect("trait judge template has exactly one hole")
}

/// Judge prompt: recover the High/Low language-ability label.
pub fn ability_judge_prompt(dialogue_content: &str) -> String {
    render(
        "ability_judge",
        ABILITY_JUDGE_TEMPLATE,
        &[("dialogue_content", dialogue_content)],
    )
    .expect("ability judge template has exactly one hole")
}

/// Judge prompt: rate the student on all 44 inventory statements.
pub fn inventory_judge_prompt(dialogue_content: &str) -> String {
    render(
        "bfi_judge",
        INVENTORY_JUDGE_TEMPLATE,
        &[("dialogue_content", dialogue_content)],
    )
    .expect("inventory judge template has exactly one hole")
}

/// Judge prompt: label one teacher utterance with scaffolding types.
pub fn scaffold_judge_prompt(utterance: &str) -> String {
    render(
        "scaffold_judge",
        SCAFFOLD_JUDGE_TEMPLATE,
        &[("utterance", utterance)],
    )
    .expect("scaffold judge template has exactly one hole")
}
