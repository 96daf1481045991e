//! The statistics the reporting layer is built on, exercised directly:
//! Cronbach's alpha for internal consistency, Pearson correlation with a
//! two-tailed p-value and significance stars, and macro-averaged
//! precision/recall/F1 for High/Low agreement.
//!
//! Run with: `cargo run --example reliability_stats`

use tutorsim::persona::Level;
use tutorsim::stats::{agreement, cronbach_alpha, descriptive, pearson, stars};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // --- Cronbach's alpha ---------------------------------------------
    // Rows are respondents, columns are items of one scale. The first
    // scale's items move together; the second's are close to noise.
    let consistent: Vec<Vec<f64>> = vec![
        vec![4.0, 5.0, 4.0, 4.0],
        vec![2.0, 2.0, 3.0, 2.0],
        vec![5.0, 4.0, 5.0, 5.0],
        vec![3.0, 3.0, 3.0, 4.0],
        vec![1.0, 2.0, 1.0, 1.0],
    ];
    let noisy: Vec<Vec<f64>> = vec![
        vec![4.0, 1.0, 1.0, 3.0],
        vec![5.0, 4.0, 3.0, 4.0],
        vec![3.0, 1.0, 4.0, 3.0],
        vec![2.0, 5.0, 1.0, 4.0],
        vec![1.0, 2.0, 3.0, 2.0],
    ];
    println!("Cronbach's alpha:");
    println!("  consistent scale  α = {:.4}", cronbach_alpha(&consistent)?);
    println!("  noisy scale       α = {:.4}", cronbach_alpha(&noisy)?);

    // --- Pearson correlation -------------------------------------------
    // Hours of questioning-heavy tutoring vs. a made-up engagement score,
    // plus an uncorrelated control.
    let questioning = [0.10, 0.25, 0.30, 0.45, 0.50, 0.60, 0.75, 0.80];
    let engagement = [2.1, 2.8, 2.7, 3.5, 3.9, 4.0, 4.6, 4.4];
    let shoe_size = [39.0, 42.0, 38.0, 44.0, 41.0, 37.0, 43.0, 40.0];

    println!("\nPearson correlation (two-tailed):");
    for (name, ys) in [("engagement", &engagement), ("shoe size", &shoe_size)] {
        let cell = pearson(&questioning, ys)?;
        println!(
            "  questioning vs {:<11} r = {:+.4}, p = {:.6}, n = {} {}",
            name,
            cell.r,
            cell.p,
            cell.n,
            stars(cell.p)
        );
    }
    let d = descriptive(&engagement)?;
    println!("  engagement described: mean {:.3}, sd {:.3}, n {}", d.mean, d.sd, d.n);

    // --- Macro precision / recall / F1 ---------------------------------
    // Judge labels against specified personas; one High slips to Low and
    // one Low slips to High.
    use Level::{High, Low};
    let gold = [High, High, High, Low, Low, High, Low, Low, High, Low];
    let pred = [High, High, Low, Low, Low, High, High, Low, High, Low];
    let report = agreement(&gold, &pred)?;

    println!("\nHigh/Low agreement across {} cases:", gold.len());
    for class in &report.per_class {
        println!(
            "  {:?}:  precision {:.3}, recall {:.3}, F1 {:.3}",
            class.class, class.precision, class.recall, class.f1
        );
    }
    println!(
        "  macro: precision {:.3}, recall {:.3}, F1 {:.3}",
        report.precision, report.recall, report.f1
    );
    Ok(())
}
