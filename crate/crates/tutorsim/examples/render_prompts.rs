//! Show the exact system prompts both agents receive.
//!
//! The teacher prompt fixes the tutoring persona and the one-question-at-
//! a-time rule; the student prompt splices the profile's descriptor
//! phrases into a personality block, an ability block, and a behavior
//! constraint. Judges get their own prompt per instrument — the trait
//! judge's is shown at the end.
//!
//! Run with: `cargo run --example render_prompts`

use tutorsim::persona::{Level, StudentProfile, TraitDimension, TraitLevels};
use tutorsim::prompt::{
    build_student_prompt, build_teacher_prompt, trait_judge_prompt, TaskSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let task = TaskSpec::classroom_drawing();

    println!("=== teacher system prompt ===");
    println!("{}\n", build_teacher_prompt(&task)?);

    // A concrete profile: strong language, curious but anxious student.
    let mut traits = TraitLevels::uniform(Level::High);
    traits.set(TraitDimension::Conscientiousness, Level::Low);
    traits.set(TraitDimension::Extraversion, Level::Low);
    let profile = StudentProfile::new(Level::High, traits);

    println!("=== student system prompt for {} ===", profile.code());
    println!("{}\n", build_student_prompt(&profile, &task)?);

    println!("=== trait-judge prompt (truncated) ===");
    let judge = trait_judge_prompt("Teacher: What do you see?\nStudent: A rainbow!");
    for line in judge.lines().take(12) {
        println!("{line}");
    }
    println!("...");
    Ok(())
}
