//! Score a 44-statement inventory response and label each trait.
//!
//! Items are grouped into five trait scales (8–10 items each); reverse-
//! keyed items are reflected as 6 − x before summing. A trait is labelled
//! High when its mean rating reaches the threshold — the 3.0 scale
//! midpoint by default, or reference means measured on a corpus.
//!
//! Run with: `cargo run --example score_bfi`

use tutorsim::bfi::{score_bfi, scoring_key, ThresholdMode, TraitMeans};
use tutorsim::persona::TraitDimension;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A response sheet: agreeable and diligent, but shy and anxious.
    #[rustfmt::skip]
    let ratings: Vec<u8> = vec![
        // items 1..=44, each rated 1-5
        2, 4, 4, 4, 4, 4, 4, 5, 2, 4,
        2, 1, 4, 4, 3, 4, 5, 2, 4, 4,
        4, 4, 2, 2, 4, 2, 1, 4, 4, 3,
        4, 4, 4, 2, 2, 2, 1, 4, 4, 4,
        3, 5, 2, 3,
    ];

    let score = score_bfi(&ratings, &ThresholdMode::Midpoint)?;
    println!("midpoint threshold (mean ≥ 3.0 → High):");
    for trait_score in &score.traits {
        let k = scoring_key(trait_score.dimension).len();
        println!(
            "  {:<18} sum {:>2} over {k} items, mean {:.3} → {:?}",
            trait_score.dimension.name(),
            trait_score.sum,
            trait_score.mean,
            trait_score.label
        );
    }
    println!("  as a trait code: {}", score.labels().code());

    // Against corpus-level reference means the same sheet can read
    // differently: a 3.6 Openness mean clears the 3.0 midpoint but falls
    // short of a curious corpus averaging 3.7, while a 2.25 Extraversion
    // mean is Low against 3.0 yet High against a reserved corpus at 2.0.
    let reference = ThresholdMode::CorpusMean {
        means: TraitMeans([3.7, 3.4, 2.0, 3.6, 2.6]),
    };
    let rescored = score_bfi(&ratings, &reference)?;
    println!("\ncorpus-mean threshold:");
    for dimension in TraitDimension::ALL {
        let before = score.get(dimension).label;
        let after = rescored.get(dimension).label;
        let marker = if before != after { "  ← flipped" } else { "" };
        println!("  {:<18} {:?} → {:?}{marker}", dimension.name(), before, after);
    }
    Ok(())
}
