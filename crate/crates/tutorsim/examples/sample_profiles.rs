//! Enumerate the student-profile space and draw samples from it.
//!
//! A profile is one language-ability level (High/Low) crossed with
//! High/Low settings on the five personality dimensions: 2 × 2⁵ = 64
//! distinct profiles. `Grid` sampling walks that space exhaustively;
//! `Uniform` draws independently with a seeded generator, so both are
//! reproducible.
//!
//! Run with: `cargo run --example sample_profiles`

use tutorsim::persona::{
    all_profiles, sample_profiles, trait_description, Level, SamplingStrategy, TraitDimension,
};

fn main() {
    let everyone = all_profiles();
    println!("total profiles: {}", everyone.len());
    println!("first four in grid order:");
    for profile in &everyone[..4] {
        println!("  {}", profile.code());
    }

    // Grid sampling cycles the full space; ask for 6 and you get the
    // first 6 grid entries, deterministically.
    let grid = sample_profiles(6, 42, SamplingStrategy::Grid);
    println!("\ngrid sample of 6:");
    for profile in &grid {
        println!("  {}", profile.code());
    }

    // Uniform sampling depends only on the seed.
    let uniform = sample_profiles(6, 42, SamplingStrategy::Uniform);
    let again = sample_profiles(6, 42, SamplingStrategy::Uniform);
    assert_eq!(uniform, again, "same seed, same draw");
    println!("\nuniform sample of 6 (seed 42):");
    for profile in &uniform {
        println!("  {}", profile.code());
    }

    // Each (dimension, level) pair carries three descriptor phrases that
    // later become the student's system prompt.
    println!("\ndescriptors for Openness:");
    for level in [Level::High, Level::Low] {
        let descriptor = trait_description(TraitDimension::Openness, level);
        println!("  {level:?}: {}", descriptor.descriptors.join("; "));
    }
}
