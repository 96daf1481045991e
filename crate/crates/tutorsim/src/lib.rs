//! Simulation and validation pipeline for persona-conditioned tutoring
//! dialogues.
//!
//! A teacher agent and a student agent — both backed by a chat-completion
//! model — converse about a picture-description task. The student is
//! conditioned on a [`persona::StudentProfile`]: a High/Low language-ability
//! level plus High/Low settings on five personality dimensions. Finished
//! dialogues are checked by four model-based judges (personality recovery,
//! ability recovery, a 44-item personality inventory, and per-utterance
//! scaffolding-strategy labels), and an analysis layer turns the judge
//! output into reliability and agreement statistics.
//!
//! Start with the runnable examples:
//!
//! - `sample_profiles` — enumerate and sample the 64-profile space
//! - `render_prompts` — teacher/student system prompts for a profile
//! - `scripted_session` — run one dialogue against a scripted backend
//! - `validate_dialogue` — all four judges over a scripted dialogue
//! - `score_bfi` — inventory scoring and High/Low labelling
//! - `reliability_stats` — Cronbach's alpha, Pearson r, macro P/R/F1
//! - `mock_pipeline` — generate, validate, and report end to end, offline
//! - `live_session` — one dialogue against a real endpoint (needs
//!   `TUTORSIM_API_KEY`)
//!
//! Each example is `cargo run --example <name>`. The same pipeline is also
//! exposed as the `tutorsim` binary with `generate`, `validate`, `report`,
//! and `export-responses` subcommands.

pub mod analysis;
pub mod bfi;
pub mod config;
pub mod corpus;
pub mod engine;
pub mod gateway;
pub mod persona;
pub mod prompt;
pub mod report;
pub mod run;
pub mod stats;
pub mod validate;
