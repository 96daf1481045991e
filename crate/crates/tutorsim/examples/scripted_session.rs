//! Run one complete tutoring session against scripted backends.
//!
//! A session alternates strictly — teacher first, one backend call per
//! utterance — and ends when the teacher stops asking questions after the
//! minimum length, or at the hard cap. Scripted backends make the whole
//! exchange deterministic and offline.
//!
//! Run with: `cargo run --example scripted_session`

use tutorsim::engine::{PersonaAssignment, Session, SessionConfig, TerminationMode};
use tutorsim::gateway::{Backend, GenerationParams};
use tutorsim::persona::{Level, StudentProfile, TraitLevels};
use tutorsim::prompt::TaskSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let teacher = Backend::scripted([
        "What do you see in this picture?",
        "Lovely! What is the second girl drawing?",
        "Why might she have chosen a fish?",
        "Excellent thinking. You described the whole picture today.",
    ]);
    let student = Backend::scripted([
        "Um… two girls are drawing.",
        "A fish… under the sea!",
        "Maybe she went to an aquarium once.",
    ]);

    // A shy but able student.
    let mut traits = TraitLevels::uniform(Level::High);
    traits.set(tutorsim::persona::TraitDimension::Extraversion, Level::Low);
    let profile = StudentProfile::new(Level::High, traits);

    let session = Session {
        id: "example-session".into(),
        task: TaskSpec::classroom_drawing(),
        student: PersonaAssignment::Full(profile),
        config: SessionConfig {
            min_utterances: 4,
            max_utterances: 12,
            termination_mode: TerminationMode::Heuristic,
        },
        teacher_params: GenerationParams::role_play("scripted-teacher"),
        student_params: GenerationParams::role_play("scripted-student"),
        seed: 1,
    };

    let dialogue = session.run(&teacher, &student, None)?;
    println!("dialogue {} ({} utterances)\n", dialogue.id, dialogue.utterances.len());
    println!("{}", dialogue.transcript());

    // The final utterance is the teacher's question-free closer.
    let last = dialogue.utterances.last().expect("non-empty");
    println!("\nterminated after: {:?}", last.text);
    Ok(())
}
