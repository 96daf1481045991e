//! One tutoring dialogue against a real chat-completions endpoint.
//!
//! Needs credentials; without them it prints how to supply them and exits
//! cleanly, so it is safe to run in a batch with the offline examples:
//!
//! ```text
//! export TUTORSIM_ENDPOINT=https://api.example.com/v1/chat/completions
//! export TUTORSIM_API_KEY=sk-...
//! TUTORSIM_MODEL=gpt-4o cargo run --example live_session
//! ```

use tutorsim::engine::{PersonaAssignment, Session, SessionConfig};
use tutorsim::gateway::{Backend, GenerationParams, HttpBackend, API_KEY_ENV, ENDPOINT_ENV};
use tutorsim::persona::{Level, StudentProfile, TraitDimension, TraitLevels};
use tutorsim::prompt::TaskSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if std::env::var(ENDPOINT_ENV).is_err() || std::env::var(API_KEY_ENV).is_err() {
        println!("live_session: set {ENDPOINT_ENV} and {API_KEY_ENV} to run against a real endpoint.");
        println!("Nothing was sent. Try `cargo run --example mock_pipeline` for the offline tour.");
        return Ok(());
    }
    let model = std::env::var("TUTORSIM_MODEL").unwrap_or_else(|_| "gpt-4o".to_string());

    // A curious but anxious low-ability student; the teacher sees only
    // the picture task, never the persona.
    let mut traits = TraitLevels::uniform(Level::Low);
    traits.set(TraitDimension::Openness, Level::High);
    traits.set(TraitDimension::Neuroticism, Level::High);
    let student = StudentProfile::new(Level::Low, traits);
    println!("profile: {}", student.code());

    let session = Session {
        id: "live-demo-0001".to_string(),
        task: TaskSpec::classroom_drawing(),
        student: PersonaAssignment::Full(student),
        config: SessionConfig::default(),
        teacher_params: GenerationParams::role_play(&model),
        student_params: GenerationParams::role_play(&model),
        seed: 7,
    };

    let teacher = Backend::Http(HttpBackend::from_env()?);
    let student = Backend::Http(HttpBackend::from_env()?);
    let dialogue = session.run(&teacher, &student, None)?;

    println!(
        "{} utterances ({} from the teacher):\n",
        dialogue.utterances.len(),
        dialogue.teacher_indices().len()
    );
    println!("{}", dialogue.transcript());
    Ok(())
}
