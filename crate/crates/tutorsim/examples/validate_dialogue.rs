//! Point all four judge instruments at a finished dialogue.
//!
//! The judge is just another chat backend. Per dialogue it is asked, in a
//! fixed order, for: the five personality labels, the ability label, the
//! 44-statement inventory ratings, and one scaffolding label set per
//! teacher utterance. Unparseable answers are retried with a corrective
//! reminder before giving up.
//!
//! Run with: `cargo run --example validate_dialogue`

use tutorsim::engine::{PersonaAssignment, Session, SessionConfig, TerminationMode};
use tutorsim::gateway::{Backend, GenerationParams};
use tutorsim::persona::{Level, StudentProfile, TraitLevels};
use tutorsim::prompt::TaskSpec;
use tutorsim::validate::Judge;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A quick scripted dialogue to judge (teacher turns at indices 0, 2, 4).
    let session = Session {
        id: "to-validate".into(),
        task: TaskSpec::classroom_drawing(),
        student: PersonaAssignment::Full(StudentProfile::new(
            Level::Low,
            TraitLevels::uniform(Level::Low),
        )),
        config: SessionConfig {
            min_utterances: 4,
            max_utterances: 8,
            termination_mode: TerminationMode::Heuristic,
        },
        teacher_params: GenerationParams::role_play("scripted-teacher"),
        student_params: GenerationParams::role_play("scripted-student"),
        seed: 3,
    };
    let dialogue = session.run(
        &Backend::scripted(["What do you see?", "Can you say more about the rainbow?", "Good try today."]),
        &Backend::scripted(["girl draw", "rainbow… color"]),
        None,
    )?;

    // Scripted judge replies, queued in instrument order. The second reply
    // is deliberately unparseable: watch the retry consume the third.
    let ratings: String =
        (1..=44).map(|i| format!("{i}) {}", 5 - i % 4)).collect::<Vec<_>>().join("\n");
    let judge_backend = Backend::scripted([
        // 1) trait labels
        "Openness: Low\nConscientiousness: Low\nExtraversion: Low\nAgreeableness: Low\nNeuroticism: Low".to_string(),
        // 2) ability — first answer fails to parse, retry succeeds
        "The student seems to struggle.".to_string(),
        "Low".to_string(),
        // 3) inventory
        ratings,
        // 4) one scaffolding set per teacher utterance
        "Questioning".to_string(),
        "Hints, Questioning".to_string(),
        "Feeding back, Social-emotional Support".to_string(),
    ]);

    let judge = Judge::new(&judge_backend, GenerationParams::judge("scripted-judge"));
    let record = judge.validate_dialogue(&dialogue, true)?;

    println!("dialogue:        {}", record.dialogue_id);
    println!("judged traits:   {}", record.predicted_traits.code());
    println!("judged ability:  {:?}", record.predicted_ability);
    println!("inventory items: {}", record.bfi_ratings.as_ref().map_or(0, Vec::len));
    println!("scaffolding:");
    for set in &record.scaffolding {
        let names: Vec<&str> = set.labels.iter().map(|l| l.name()).collect();
        println!("  utterance {:>2}: {}", set.utterance_index, names.join(", "));
    }
    Ok(())
}
