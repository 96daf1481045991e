//! Turns a run's corpora into the analysis tables: agreement scores,
//! inventory reliability and correlations, and the scaffolding grids,
//! written as CSV plus a plain-text summary.
//!
//! Column layouts are documented in `docs/schemas.md` and pinned by
//! snapshot tests. Output is deterministic for a given corpus: rows follow
//! canonical trait/scaffolding order, floats use fixed precision, and no
//! timestamps appear, so re-running a report is byte-idempotent.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{self, AnalysisError, CorrelationGrid, ScaffoldingObservation};
use crate::bfi::{self, BfiError, ThresholdMode, TraitMeans};
use crate::config::ThresholdChoice;
use crate::corpus::{self, BfiRecord, CorpusError, CorpusWriter, RunPaths};
use crate::engine::Dialogue;
use crate::persona::{Level, TraitDimension, TraitLevels};
use crate::stats::{self, CorrelationCell, StatsError};
use crate::validate::{ScaffoldingType, ValidationRecord};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("missing inputs: {detail}")]
    MissingInputs { detail: String },
    #[error("corpus integrity violation: {detail}")]
    Integrity { detail: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Bfi(#[from] BfiError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What a report pass produced: the files written and any data-quality
/// notes (insufficient strata, undefined statistics, skipped tables).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
    pub dialogue_count: usize,
    pub validation_count: usize,
}

const AGREEMENT_HEADER: &str = "dimension,precision,recall,f1";
const CLASS_AGREEMENT_HEADER: &str = "class,precision,recall,f1";
const BFI_SUMMARY_HEADER: &str = "dimension,n,mean,sd,alpha";
const BFI_CORRELATIONS_HEADER: &str = "dimension_a,dimension_b,r,p,stars,n,status";
const TRAIT_SCAFFOLDING_HEADER: &str = "dimension,scaffolding_type,r,p,stars,n,status";
const ABILITY_SCAFFOLDING_HEADER: &str = "scaffolding_type,r,p,stars,n,status";

fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), ReportError> {
    let mut content = String::from(header);
    content.push('\n');
    for row in rows {
        content.push_str(row);
        content.push('\n');
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// `r,p,stars,n,status` cell rendering shared by every correlation table.
fn correlation_columns(cell: &Option<CorrelationCell>) -> String {
    match cell {
        Some(cell) => format!(
            "{},{},{},{},ok",
            fmt4(cell.r),
            fmt6(cell.p),
            stats::stars(cell.p),
            cell.n
        ),
        None => ",,,,undefined".to_string(),
    }
}

/// The corpora a report runs over, cross-checked: every validation must
/// reference a dialogue that exists.
pub struct ReportInputs {
    pub dialogues: Vec<Dialogue>,
    pub validations: Vec<ValidationRecord>,
}

impl ReportInputs {
    pub fn load(paths: &RunPaths) -> Result<Self, ReportError> {
        for (path, what) in
            [(&paths.dialogues, "dialogue corpus"), (&paths.validations, "validation corpus")]
        {
            if !path.exists() {
                return Err(ReportError::MissingInputs {
                    detail: format!("{what} not found at {}", path.display()),
                });
            }
        }
        let dialogues: Vec<Dialogue> = corpus::read_all(&paths.dialogues)?;
        let validations: Vec<ValidationRecord> = corpus::read_all(&paths.validations)?;
        let known: std::collections::BTreeSet<&str> =
            dialogues.iter().map(|d| d.id.as_str()).collect();
        for validation in &validations {
            if !known.contains(validation.dialogue_id.as_str()) {
                return Err(ReportError::Integrity {
                    detail: format!(
                        "validation references unknown dialogue {:?}",
                        validation.dialogue_id
                    ),
                });
            }
        }
        Ok(ReportInputs { dialogues, validations })
    }

    fn dialogue(&self, id: &str) -> &Dialogue {
        self.dialogues.iter().find(|d| d.id == id).expect("integrity checked on load")
    }

    /// Gold ability for a dialogue: the profile when present, otherwise
    /// the ability recorded at generation time.
    fn gold_ability(dialogue: &Dialogue) -> Level {
        dialogue.profile.as_ref().map_or(dialogue.metadata.student_ability, |p| p.ability)
    }
}

fn agreement_rows(
    pairs: &[(TraitLevels, TraitLevels)],
    notes: &mut Vec<String>,
    table: &str,
) -> Vec<String> {
    let mut rows = Vec::new();
    if pairs.is_empty() {
        notes.push(format!("{table}: no label pairs available"));
        return rows;
    }
    let agreement = analysis::trait_agreement(pairs).expect("non-empty pairs");
    for dimension in TraitDimension::ALL {
        let report = &agreement.per_dimension[dimension.index()];
        rows.push(format!(
            "{},{},{},{}",
            dimension.name(),
            fmt4(report.precision),
            fmt4(report.recall),
            fmt4(report.f1)
        ));
    }
    rows.push(format!(
        "Average,{},{},{}",
        fmt4(agreement.average_precision),
        fmt4(agreement.average_recall),
        fmt4(agreement.average_f1)
    ));
    rows
}

fn trait_grid_rows(grid: Result<CorrelationGrid, AnalysisError>, notes: &mut Vec<String>, table: &str) -> Vec<String> {
    let mut rows = Vec::new();
    match grid {
        Ok(grid) => {
            for dimension in TraitDimension::ALL {
                for scaffold in ScaffoldingType::ALL {
                    let cell = &grid[dimension.index()][scaffold.index()];
                    rows.push(format!(
                        "{},{},{}",
                        dimension.name(),
                        scaffold.name(),
                        correlation_columns(cell)
                    ));
                }
            }
        }
        Err(error) => {
            notes.push(format!("{table}: {error}"));
            for dimension in TraitDimension::ALL {
                for scaffold in ScaffoldingType::ALL {
                    rows.push(format!(
                        "{},{},,,,,insufficient",
                        dimension.name(),
                        scaffold.name()
                    ));
                }
            }
        }
    }
    rows
}

/// Run-level per-trait means over scored inventories — the reference cut
/// for `corpus_mean` labelling, and the Mean column of the summary table.
fn corpus_trait_means(trait_mean_columns: &[Vec<f64>; 5]) -> Option<TraitMeans> {
    if trait_mean_columns[0].is_empty() {
        return None;
    }
    let mut means = [0.0; 5];
    for dimension in TraitDimension::ALL {
        let column = &trait_mean_columns[dimension.index()];
        means[dimension.index()] = column.iter().sum::<f64>() / column.len() as f64;
    }
    Some(TraitMeans(means))
}

/// Produce every report artifact for a run. Statistics that a corpus
/// cannot support (too few records, zero variance) degrade to explicitly
/// marked cells and a note, never an abort.
pub fn generate_reports(
    paths: &RunPaths,
    threshold: ThresholdChoice,
) -> Result<RunReport, ReportError> {
    let inputs = ReportInputs::load(paths)?;
    std::fs::create_dir_all(&paths.report_dir)?;
    let mut notes: Vec<String> = Vec::new();
    let mut files: Vec<PathBuf> = Vec::new();

    // --- Inventory scoring ------------------------------------------------
    let rated: Vec<(&ValidationRecord, &Vec<u8>)> = inputs
        .validations
        .iter()
        .filter_map(|v| v.bfi_ratings.as_ref().map(|r| (v, r)))
        .collect();
    let rating_rows: Vec<Vec<u8>> = rated.iter().map(|(_, r)| (*r).clone()).collect();

    // Per-record trait means, one column per dimension, record order.
    let mut trait_mean_columns: [Vec<f64>; 5] = Default::default();
    for row in &rating_rows {
        let score = bfi::score_bfi(row, &ThresholdMode::Midpoint)?;
        for dimension in TraitDimension::ALL {
            trait_mean_columns[dimension.index()].push(score.get(dimension).mean);
        }
    }

    let threshold_mode = match threshold {
        ThresholdChoice::Midpoint => ThresholdMode::Midpoint,
        ThresholdChoice::CorpusMean => match corpus_trait_means(&trait_mean_columns) {
            Some(means) => ThresholdMode::CorpusMean { means },
            None => {
                notes.push(
                    "threshold: corpus_mean requested but no inventory ratings exist; \
                     falling back to midpoint"
                        .to_string(),
                );
                ThresholdMode::Midpoint
            }
        },
    };

    // Rewrite the scored-inventory corpus from scratch so a re-run stays
    // idempotent under a possibly different threshold mode.
    match std::fs::remove_file(&paths.bfi_scores) {
        Ok(()) => {}
        Err(error) if error.kind() == std::io::ErrorKind::NotFound => {}
        Err(error) => return Err(error.into()),
    }
    let mut inventory_labels: Vec<(String, TraitLevels)> = Vec::new();
    {
        let mut writer: CorpusWriter<BfiRecord> = CorpusWriter::open(&paths.bfi_scores)?;
        for (validation, ratings) in &rated {
            let score = bfi::score_bfi(ratings, &threshold_mode)?;
            inventory_labels.push((validation.dialogue_id.clone(), score.labels()));
            writer.append(&BfiRecord { dialogue_id: validation.dialogue_id.clone(), score })?;
        }
    }

    // --- Agreement tables --------------------------------------------------
    let trait_pairs: Vec<(TraitLevels, TraitLevels)> = inputs
        .validations
        .iter()
        .filter_map(|v| {
            let dialogue = inputs.dialogue(&v.dialogue_id);
            dialogue.profile.as_ref().map(|p| (p.traits, v.predicted_traits))
        })
        .collect();
    let path = paths.report_dir.join("trait_agreement.csv");
    write_csv(&path, AGREEMENT_HEADER, &agreement_rows(&trait_pairs, &mut notes, "trait_agreement"))?;
    files.push(path);

    let ability_pairs: Vec<(Level, Level)> = inputs
        .validations
        .iter()
        .map(|v| (ReportInputs::gold_ability(inputs.dialogue(&v.dialogue_id)), v.predicted_ability))
        .collect();
    let mut ability_rows = Vec::new();
    if ability_pairs.is_empty() {
        notes.push("ability_agreement: no label pairs available".to_string());
    } else {
        let report = analysis::ability_agreement(&ability_pairs)?;
        for class in &report.per_class {
            ability_rows.push(format!(
                "{},{},{},{}",
                class.class.name(),
                fmt4(class.precision),
                fmt4(class.recall),
                fmt4(class.f1)
            ));
        }
        ability_rows.push(format!(
            "Macro,{},{},{}",
            fmt4(report.precision),
            fmt4(report.recall),
            fmt4(report.f1)
        ));
    }
    let path = paths.report_dir.join("ability_agreement.csv");
    write_csv(&path, CLASS_AGREEMENT_HEADER, &ability_rows)?;
    files.push(path);

    // --- Inventory summary and correlations ---------------------------------
    let mut summary_rows = Vec::new();
    let reliability = analysis::inventory_reliability(&rating_rows);
    for dimension in TraitDimension::ALL {
        let column = &trait_mean_columns[dimension.index()];
        let (mean, sd) = match stats::descriptive(column) {
            Ok(d) => (fmt4(d.mean), fmt4(d.sd)),
            Err(StatsError::Empty) => (String::new(), String::new()),
            Err(_) if column.len() == 1 => (fmt4(column[0]), String::new()),
            Err(_) => (String::new(), String::new()),
        };
        let alpha = match &reliability[dimension.index()] {
            Ok(alpha) => fmt4(*alpha),
            Err(error) => {
                if !rating_rows.is_empty() {
                    notes.push(format!("bfi_summary: alpha undefined for {} ({error})", dimension.name()));
                }
                String::new()
            }
        };
        summary_rows.push(format!("{},{},{mean},{sd},{alpha}", dimension.name(), column.len()));
    }
    let path = paths.report_dir.join("bfi_summary.csv");
    write_csv(&path, BFI_SUMMARY_HEADER, &summary_rows)?;
    files.push(path);

    let mut correlation_rows = Vec::new();
    for (i, a) in TraitDimension::ALL.iter().enumerate() {
        for b in TraitDimension::ALL.iter().skip(i + 1) {
            let cell = match stats::pearson(
                &trait_mean_columns[a.index()],
                &trait_mean_columns[b.index()],
            ) {
                Ok(cell) => Some(cell),
                Err(_) => None,
            };
            correlation_rows.push(format!(
                "{},{},{}",
                a.name(),
                b.name(),
                correlation_columns(&cell)
            ));
        }
    }
    let path = paths.report_dir.join("bfi_correlations.csv");
    write_csv(&path, BFI_CORRELATIONS_HEADER, &correlation_rows)?;
    files.push(path);

    // --- Judge-vs-inventory label consistency -------------------------------
    let judged: std::collections::BTreeMap<&str, TraitLevels> = inputs
        .validations
        .iter()
        .map(|v| (v.dialogue_id.as_str(), v.predicted_traits))
        .collect();
    let consistency_pairs: Vec<(TraitLevels, TraitLevels)> = inventory_labels
        .iter()
        .filter_map(|(id, inventory)| judged.get(id.as_str()).map(|judge| (*inventory, *judge)))
        .collect();
    let path = paths.report_dir.join("trait_judge_vs_inventory.csv");
    write_csv(
        &path,
        AGREEMENT_HEADER,
        &agreement_rows(&consistency_pairs, &mut notes, "trait_judge_vs_inventory"),
    )?;
    files.push(path);

    // --- Scaffolding correlations -------------------------------------------
    let observations: Vec<ScaffoldingObservation> = inputs
        .validations
        .iter()
        .map(|v| ScaffoldingObservation::from_validated(inputs.dialogue(&v.dialogue_id), v))
        .collect::<Result<_, _>>()?;
    let with_traits: Vec<ScaffoldingObservation> =
        observations.iter().filter(|o| o.traits.is_some()).cloned().collect();
    let (high, low) = analysis::split_by_ability(&with_traits);
    for (stratum, ability, name) in [
        (high, Level::High, "trait_scaffolding_high.csv"),
        (low, Level::Low, "trait_scaffolding_low.csv"),
    ] {
        let grid = analysis::trait_scaffolding_grid(&stratum, ability);
        let rows = trait_grid_rows(grid, &mut notes, name);
        let path = paths.report_dir.join(name);
        write_csv(&path, TRAIT_SCAFFOLDING_HEADER, &rows)?;
        files.push(path);
    }

    let mut ability_scaffolding_rows = Vec::new();
    match analysis::ability_scaffolding_correlation(&observations) {
        Ok(cells) => {
            for scaffold in ScaffoldingType::ALL {
                ability_scaffolding_rows.push(format!(
                    "{},{}",
                    scaffold.name(),
                    correlation_columns(&cells[scaffold.index()])
                ));
            }
        }
        Err(error) => {
            notes.push(format!("ability_scaffolding: {error}"));
            for scaffold in ScaffoldingType::ALL {
                ability_scaffolding_rows.push(format!("{},,,,,insufficient", scaffold.name()));
            }
        }
    }
    let path = paths.report_dir.join("ability_scaffolding.csv");
    write_csv(&path, ABILITY_SCAFFOLDING_HEADER, &ability_scaffolding_rows)?;
    files.push(path);

    // --- Plain-text run summary ----------------------------------------------
    let mut summary = String::new();
    summary.push_str(&format!("run directory: {}\n", paths.root.display()));
    summary.push_str(&format!("dialogues: {}\n", inputs.dialogues.len()));
    summary.push_str(&format!("validations: {}\n", inputs.validations.len()));
    summary.push_str(&format!("inventories scored: {}\n", rated.len()));
    match &threshold_mode {
        ThresholdMode::Midpoint => summary.push_str("threshold: midpoint (3.0)\n"),
        ThresholdMode::CorpusMean { means } => {
            let rendered: Vec<String> = TraitDimension::ALL
                .iter()
                .map(|d| format!("{}={}", d.name(), fmt4(means.get(*d))))
                .collect();
            summary.push_str(&format!("threshold: corpus means ({})\n", rendered.join(", ")));
        }
    }
    if notes.is_empty() {
        summary.push_str("notes: none\n");
    } else {
        summary.push_str("notes:\n");
        for note in &notes {
            summary.push_str(&format!("  - {note}\n"));
        }
    }
    summary.push_str("files:\n");
    for file in &files {
        summary.push_str(&format!(
            "  - report/{}\n",
            file.file_name().expect("report file").to_string_lossy()
        ));
    }
    let path = paths.report_dir.join("summary.txt");
    std::fs::write(&path, &summary)?;
    files.push(path);

    Ok(RunReport {
        files,
        notes,
        dialogue_count: inputs.dialogues.len(),
        validation_count: inputs.validations.len(),
    })
}

/// Write every student utterance, grouped per dialogue under a profile
/// header, for external embedding or inspection tools. Text passes
/// through byte-exact.
pub fn export_student_responses(paths: &RunPaths, out: &Path) -> Result<usize, ReportError> {
    if !paths.dialogues.exists() {
        return Err(ReportError::MissingInputs {
            detail: format!("dialogue corpus not found at {}", paths.dialogues.display()),
        });
    }
    let dialogues: Vec<Dialogue> = corpus::read_all(&paths.dialogues)?;

    // Group by profile code so per-persona response sets stay contiguous.
    let mut grouped: std::collections::BTreeMap<String, Vec<&Dialogue>> =
        std::collections::BTreeMap::new();
    for dialogue in &dialogues {
        let code = dialogue
            .profile
            .as_ref()
            .map_or_else(|| format!("ab{}-none", dialogue.metadata.student_ability.letter()), |p| p.code());
        grouped.entry(code).or_default().push(dialogue);
    }

    let mut content = String::from("# student responses by profile\n");
    let mut exported = 0usize;
    for (code, group) in &grouped {
        content.push_str(&format!("\n[profile {code}]\n"));
        for dialogue in group {
            content.push_str(&format!("## dialogue {}\n", dialogue.id));
            for utterance in &dialogue.utterances {
                if utterance.speaker == crate::engine::Speaker::Student {
                    content.push_str(&utterance.text);
                    content.push('\n');
                    exported += 1;
                }
            }
        }
    }
    std::fs::write(out, content)?;
    Ok(exported)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{DialogueMetadata, Speaker, Utterance};
    use crate::gateway::GenerationParams;
    use crate::persona::StudentProfile;
    use crate::validate::ScaffoldingLabelSet;
    use std::collections::BTreeSet;

    fn dialogue(id: &str, profile: Option<StudentProfile>, ability: Level) -> Dialogue {
        Dialogue {
            id: id.into(),
            image_description: "a drawing".into(),
            profile,
            utterances: vec![
                Utterance { index: 0, speaker: Speaker::Teacher, text: "What is this?".into() },
                Utterance { index: 1, speaker: Speaker::Student, text: format!("reply for {id}") },
                Utterance { index: 2, speaker: Speaker::Teacher, text: "Good work.".into() },
                Utterance { index: 3, speaker: Speaker::Student, text: "Thanks… 🌈".into() },
            ],
            metadata: DialogueMetadata {
                teacher_params: GenerationParams::role_play("mock"),
                student_params: GenerationParams::role_play("mock"),
                seed: 0,
                started_at: "2026-01-01T00:00:00Z".into(),
                template_checksums: Default::default(),
                student_ability: ability,
            },
        }
    }

    fn validation(
        id: &str,
        traits: TraitLevels,
        ability: Level,
        ratings: Option<Vec<u8>>,
        scaffold: ScaffoldingType,
    ) -> ValidationRecord {
        ValidationRecord {
            dialogue_id: id.into(),
            predicted_traits: traits,
            predicted_ability: ability,
            bfi_ratings: ratings,
            scaffolding: vec![
                ScaffoldingLabelSet { utterance_index: 0, labels: BTreeSet::from([scaffold]) },
                ScaffoldingLabelSet {
                    utterance_index: 2,
                    labels: BTreeSet::from([ScaffoldingType::FeedingBack]),
                },
            ],
            judge_model: "judge".into(),
        }
    }

    /// A small mixed corpus: both abilities, varied traits, perfect
    /// predictions, ratings that differ per record.
    fn seed_run(dir: &Path) -> RunPaths {
        let paths = RunPaths::new(dir, "run-report");
        paths.create_dirs().unwrap();
        let mut dialogues = CorpusWriter::open(&paths.dialogues).unwrap();
        let mut validations = CorpusWriter::open(&paths.validations).unwrap();
        for i in 0..8 {
            let ability = if i % 2 == 0 { Level::High } else { Level::Low };
            let mut traits = TraitLevels::uniform(Level::High);
            if i % 3 == 0 {
                traits.set(TraitDimension::Openness, Level::Low);
            }
            if i % 4 < 2 {
                traits.set(TraitDimension::Neuroticism, Level::Low);
            }
            if i >= 4 {
                traits.set(TraitDimension::Extraversion, Level::Low);
                traits.set(TraitDimension::Conscientiousness, Level::Low);
                traits.set(TraitDimension::Agreeableness, Level::Low);
            }
            let profile = StudentProfile::new(ability, traits);
            let id = format!("d-{i}");
            dialogues.append(&dialogue(&id, Some(profile), ability)).unwrap();
            let ratings: Vec<u8> = (0..44).map(|k| ((k + i) % 5 + 1) as u8).collect();
            let scaffold = if i % 2 == 0 { ScaffoldingType::Questioning } else { ScaffoldingType::Hints };
            validations.append(&validation(&id, traits, ability, Some(ratings), scaffold)).unwrap();
        }
        paths
    }

    fn read(path: &Path) -> String {
        std::fs::read_to_string(path).unwrap()
    }

    #[test]
    fn perfect_predictions_yield_unit_agreement() {
        let dir = tempfile::tempdir().unwrap();
        let paths = seed_run(dir.path());
        let report = generate_reports(&paths, ThresholdChoice::Midpoint).unwrap();
        assert_eq!(report.dialogue_count, 8);
        assert_eq!(report.validation_count, 8);

        let agreement = read(&paths.report_dir.join("trait_agreement.csv"));
        let mut lines = agreement.lines();
        assert_eq!(lines.next().unwrap(), "dimension,precision,recall,f1");
        for line in lines {
            assert!(line.ends_with("1.0000,1.0000,1.0000"), "{line}");
        }
        let ability = read(&paths.report_dir.join("ability_agreement.csv"));
        assert!(ability.lines().last().unwrap().starts_with("Macro,1.0000"));
    }

    #[test]
    fn report_files_and_headers_match_the_documented_schema() {
        let dir = tempfile::tempdir().unwrap();
        let paths = seed_run(dir.path());
        generate_reports(&paths, ThresholdChoice::Midpoint).unwrap();
        for (file, header) in [
            ("trait_agreement.csv", AGREEMENT_HEADER),
            ("ability_agreement.csv", CLASS_AGREEMENT_HEADER),
            ("bfi_summary.csv", BFI_SUMMARY_HEADER),
            ("bfi_correlations.csv", BFI_CORRELATIONS_HEADER),
            ("trait_judge_vs_inventory.csv", AGREEMENT_HEADER),
            ("trait_scaffolding_high.csv", TRAIT_SCAFFOLDING_HEADER),
            ("trait_scaffolding_low.csv", TRAIT_SCAFFOLDING_HEADER),
            ("ability_scaffolding.csv", ABILITY_SCAFFOLDING_HEADER),
        ] {
            let content = read(&paths.report_dir.join(file));
            assert_eq!(content.lines().next().unwrap(), header, "{file}");
        }
        assert!(paths.report_dir.join("summary.txt").exists());
        assert!(paths.bfi_scores.exists());
    }

    #[test]
    fn report_is_deterministic_and_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let paths = seed_run(dir.path());
        let first = generate_reports(&paths, ThresholdChoice::Midpoint).unwrap();
        let snapshots: Vec<(PathBuf, String)> =
            first.files.iter().map(|f| (f.clone(), read(f))).collect();
        let second = generate_reports(&paths, ThresholdChoice::Midpoint).unwrap();
        assert_eq!(first.files, second.files);
        for (path, before) in snapshots {
            assert_eq!(read(&path), before, "{} changed between runs", path.display());
        }
        // bfi_scores.jsonl was rewritten, not appended to.
        let scores: Vec<BfiRecord> = corpus::read_all(&paths.bfi_scores).unwrap();
        assert_eq!(scores.len(), 8);
    }

    #[test]
    fn corpus_mean_threshold_uses_run_level_means() {
        let dir = tempfile::tempdir().unwrap();
        let paths = seed_run(dir.path());
        generate_reports(&paths, ThresholdChoice::CorpusMean).unwrap();
        let summary = read(&paths.report_dir.join("summary.txt"));
        assert!(summary.contains("threshold: corpus means ("), "{summary}");
        let scores: Vec<BfiRecord> = corpus::read_all(&paths.bfi_scores).unwrap();
        assert!(matches!(scores[0].score.threshold, ThresholdMode::CorpusMean { .. }));
    }

    #[test]
    fn single_stratum_degrades_only_that_grid() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::new(dir.path(), "run-one-stratum");
        paths.create_dirs().unwrap();
        let mut dialogues = CorpusWriter::open(&paths.dialogues).unwrap();
        let mut validations = CorpusWriter::open(&paths.validations).unwrap();
        for i in 0..4 {
            let mut traits = TraitLevels::uniform(Level::High);
            if i % 2 == 0 {
                traits.set(TraitDimension::Openness, Level::Low);
            }
            let id = format!("d-{i}");
            let profile = StudentProfile::new(Level::High, traits);
            dialogues.append(&dialogue(&id, Some(profile), Level::High)).unwrap();
            let scaffold =
                if i % 2 == 0 { ScaffoldingType::Hints } else { ScaffoldingType::Explaining };
            validations.append(&validation(&id, traits, Level::High, None, scaffold)).unwrap();
        }
        drop(dialogues);
        drop(validations);

        let report = generate_reports(&paths, ThresholdChoice::Midpoint).unwrap();
        let low = read(&paths.report_dir.join("trait_scaffolding_low.csv"));
        assert_eq!(low.lines().count(), 1 + 35);
        for line in low.lines().skip(1) {
            assert!(line.ends_with(",insufficient"), "{line}");
        }
        let high = read(&paths.report_dir.join("trait_scaffolding_high.csv"));
        assert!(high.lines().skip(1).any(|l| l.ends_with(",ok")), "{high}");
        assert!(report.notes.iter().any(|n| n.contains("trait_scaffolding_low")));
        // Ability correlation over a single class: defined rows impossible,
        // but the table still renders with undefined markers.
        let ability = read(&paths.report_dir.join("ability_scaffolding.csv"));
        assert_eq!(ability.lines().count(), 1 + 7);
        for line in ability.lines().skip(1) {
            assert!(line.ends_with(",undefined"), "{line}");
        }
    }

    #[test]
    fn missing_inputs_and_unknown_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::new(dir.path(), "run-missing");
        paths.create_dirs().unwrap();
        let err = generate_reports(&paths, ThresholdChoice::Midpoint).unwrap_err();
        assert!(matches!(err, ReportError::MissingInputs { .. }));

        let mut dialogues = CorpusWriter::open(&paths.dialogues).unwrap();
        dialogues
            .append(&dialogue("d-1", Some(StudentProfile::new(Level::High, TraitLevels::uniform(Level::High))), Level::High))
            .unwrap();
        drop(dialogues);
        let mut validations = CorpusWriter::open(&paths.validations).unwrap();
        validations
            .append(&validation(
                "d-ghost",
                TraitLevels::uniform(Level::High),
                Level::High,
                None,
                ScaffoldingType::Hints,
            ))
            .unwrap();
        drop(validations);
        let err = generate_reports(&paths, ThresholdChoice::Midpoint).unwrap_err();
        assert!(matches!(err, ReportError::Integrity { .. }));
    }

    #[test]
    fn stars_appear_on_significant_correlations() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::new(dir.path(), "run-stars");
        paths.create_dirs().unwrap();
        let mut dialogues = CorpusWriter::open(&paths.dialogues).unwrap();
        let mut validations = CorpusWriter::open(&paths.validations).unwrap();
        // Hints frequency exactly tracks Openness across 12 records per
        // stratum — enough points for p < .001.
        for i in 0..24 {
            let ability = if i % 2 == 0 { Level::High } else { Level::Low };
            let openness = if i % 4 < 2 { Level::High } else { Level::Low };
            let mut traits = TraitLevels::uniform(Level::High);
            traits.set(TraitDimension::Openness, openness);
            if i % 3 == 0 {
                traits.set(TraitDimension::Agreeableness, Level::Low);
            }
            let id = format!("d-{i:02}");
            dialogues.append(&dialogue(&id, Some(StudentProfile::new(ability, traits)), ability)).unwrap();
            let scaffold =
                if openness == Level::Low { ScaffoldingType::Hints } else { ScaffoldingType::Questioning };
            validations.append(&validation(&id, traits, ability, None, scaffold)).unwrap();
        }
        drop(dialogues);
        drop(validations);
        generate_reports(&paths, ThresholdChoice::Midpoint).unwrap();
        let high = read(&paths.report_dir.join("trait_scaffolding_high.csv"));
        let hint_row = high
            .lines()
            .find(|l| l.starts_with("Openness,Hints,"))
            .expect("row present");
        assert!(hint_row.contains(",***,"), "{hint_row}");
        assert!(hint_row.contains("-1.0000"), "{hint_row}");
    }

    #[test]
    fn export_collects_only_student_utterances_grouped_by_profile() {
        let dir = tempfile::tempdir().unwrap();
        let paths = seed_run(dir.path());
        let out = dir.path().join("responses.txt");
        let exported = export_student_responses(&paths, &out).unwrap();
        assert_eq!(exported, 16); // 8 dialogues × 2 student utterances
        let content = read(&out);
        assert!(content.contains("reply for d-3"));
        assert!(content.contains("Thanks… 🌈"));
        assert!(!content.contains("What is this?"));
        assert!(content.contains("[profile ab"));
    }

    #[test]
    fn export_of_empty_corpus_keeps_the_header() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::new(dir.path(), "run-empty");
        paths.create_dirs().unwrap();
        std::fs::write(&paths.dialogues, "").unwrap();
        let out = dir.path().join("responses.txt");
        let exported = export_student_responses(&paths, &out).unwrap();
        assert_eq!(exported, 0);
        assert_eq!(read(&out), "# student responses by profile\n");
    }
}
