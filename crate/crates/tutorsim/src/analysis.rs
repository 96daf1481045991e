//! Assembles dialogues, validation records, and inventory scores into the
//! study-level tables: per-dimension agreement, inventory reliability, and
//! the trait/ability × scaffolding correlation grids.
//!
//! Everything here is pure over already-collected records; the numeric
//! kernels live in [`crate::stats`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bfi;
use crate::engine::{Dialogue, Speaker};
use crate::persona::{Level, TraitDimension, TraitLevels};
use crate::stats::{self, AgreementReport, CorrelationCell, StatsError};
use crate::validate::{ScaffoldingType, ValidateError, ValidationRecord};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Coverage(#[from] ValidateError),
    #[error("{ability} ability stratum has {got} records, need at least {needed}")]
    InsufficientStratum { ability: Level, needed: usize, got: usize },
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("dialogue {dialogue_id} carries no trait profile")]
    MissingTraits { dialogue_id: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// How often each scaffolding type appears across a dialogue's teacher
/// utterances: per-type count divided by the teacher utterance count.
pub fn scaffolding_frequency(
    record: &ValidationRecord,
    dialogue: &Dialogue,
) -> Result<[f64; 7], AnalysisError> {
    record.check_coverage(dialogue)?;
    let teacher_count =
        dialogue.utterances.iter().filter(|u| u.speaker == Speaker::Teacher).count();
    let mut frequencies = [0.0; 7];
    for label_set in &record.scaffolding {
        for label in &label_set.labels {
            frequencies[label.index()] += 1.0;
        }
    }
    for value in &mut frequencies {
        *value /= teacher_count as f64;
    }
    Ok(frequencies)
}

/// One dialogue flattened to the fields the correlation grids need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldingObservation {
    pub dialogue_id: String,
    /// Absent for dialogues generated without a trait profile.
    pub traits: Option<TraitLevels>,
    pub ability: Level,
    /// Indexed by [`ScaffoldingType::index`].
    pub frequencies: [f64; 7],
}

impl ScaffoldingObservation {
    pub fn from_validated(
        dialogue: &Dialogue,
        record: &ValidationRecord,
    ) -> Result<Self, AnalysisError> {
        let frequencies = scaffolding_frequency(record, dialogue)?;
        let (traits, ability) = match &dialogue.profile {
            Some(profile) => (Some(profile.traits), profile.ability),
            None => (None, dialogue.metadata.student_ability),
        };
        Ok(ScaffoldingObservation { dialogue_id: dialogue.id.clone(), traits, ability, frequencies })
    }
}

fn level_encoding(level: Level) -> f64 {
    match level {
        Level::Low => 0.0,
        Level::High => 1.0,
    }
}

/// A cell is `None` when the correlation is undefined on this data — a
/// constant trait column or a constant frequency column.
pub type CorrelationGrid = [[Option<CorrelationCell>; 7]; 5];

/// Trait × scaffolding-type correlations, one grid per ability stratum.
/// Rows follow [`TraitDimension::ALL`], columns [`ScaffoldingType::ALL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitScaffoldingMatrix {
    pub high_ability: CorrelationGrid,
    pub low_ability: CorrelationGrid,
}

pub const MIN_STRATUM_SIZE: usize = 3;

fn correlate_or_undefined(x: &[f64], y: &[f64]) -> Result<Option<CorrelationCell>, AnalysisError> {
    match stats::pearson(x, y) {
        Ok(cell) => Ok(Some(cell)),
        Err(StatsError::ZeroVariance) => Ok(None),
        Err(other) => Err(other.into()),
    }
}

/// Correlate each trait's High/Low assignment (Low=0, High=1) with each
/// scaffolding type's frequency over one ability stratum. Every
/// observation must carry a trait profile.
pub fn trait_scaffolding_grid(
    observations: &[&ScaffoldingObservation],
    ability: Level,
) -> Result<CorrelationGrid, AnalysisError> {
    if observations.len() < MIN_STRATUM_SIZE {
        return Err(AnalysisError::InsufficientStratum {
            ability,
            needed: MIN_STRATUM_SIZE,
            got: observations.len(),
        });
    }
    let mut grid: CorrelationGrid = Default::default();
    for dimension in TraitDimension::ALL {
        let encodings: Vec<f64> = observations
            .iter()
            .map(|o| {
                let traits = o.traits.as_ref().ok_or_else(|| AnalysisError::MissingTraits {
                    dialogue_id: o.dialogue_id.clone(),
                })?;
                Ok(level_encoding(traits.get(dimension)))
            })
            .collect::<Result<_, AnalysisError>>()?;
        for scaffold in ScaffoldingType::ALL {
            let frequencies: Vec<f64> =
                observations.iter().map(|o| o.frequencies[scaffold.index()]).collect();
            grid[dimension.index()][scaffold.index()] =
                correlate_or_undefined(&encodings, &frequencies)?;
        }
    }
    Ok(grid)
}

/// Split observations into the two ability strata, in input order.
pub fn split_by_ability(
    observations: &[ScaffoldingObservation],
) -> (Vec<&ScaffoldingObservation>, Vec<&ScaffoldingObservation>) {
    let mut high = Vec::new();
    let mut low = Vec::new();
    for observation in observations {
        match observation.ability {
            Level::High => high.push(observation),
            Level::Low => low.push(observation),
        }
    }
    (high, low)
}

/// Correlate each trait's High/Low assignment (Low=0, High=1) with each
/// scaffolding type's per-dialogue frequency, separately for the two
/// ability strata. Every observation must carry a trait profile.
pub fn trait_scaffolding_matrix(
    observations: &[ScaffoldingObservation],
) -> Result<TraitScaffoldingMatrix, AnalysisError> {
    let (high, low) = split_by_ability(observations);
    Ok(TraitScaffoldingMatrix {
        high_ability: trait_scaffolding_grid(&high, Level::High)?,
        low_ability: trait_scaffolding_grid(&low, Level::Low)?,
    })
}

/// Point-biserial correlation between language ability (Low=0, High=1)
/// and each scaffolding type's frequency, over all observations.
pub fn ability_scaffolding_correlation(
    observations: &[ScaffoldingObservation],
) -> Result<[Option<CorrelationCell>; 7], AnalysisError> {
    if observations.len() < MIN_STRATUM_SIZE {
        return Err(AnalysisError::TooFewRecords {
            needed: MIN_STRATUM_SIZE,
            got: observations.len(),
        });
    }
    let encodings: Vec<f64> =
        observations.iter().map(|o| level_encoding(o.ability)).collect();
    let mut cells: [Option<CorrelationCell>; 7] = Default::default();
    for scaffold in ScaffoldingType::ALL {
        let frequencies: Vec<f64> =
            observations.iter().map(|o| o.frequencies[scaffold.index()]).collect();
        cells[scaffold.index()] = correlate_or_undefined(&encodings, &frequencies)?;
    }
    Ok(cells)
}

/// Scored (reverse-applied) item responses for one trait, one row per
/// respondent — the matrix reliability runs on. Expects already-validated
/// rating rows (44 values, each in [1,5]).
pub fn trait_item_matrix(ratings: &[Vec<u8>], dimension: TraitDimension) -> Vec<Vec<f64>> {
    let key = bfi::scoring_key(dimension);
    ratings
        .iter()
        .map(|row| {
            key.iter()
                .map(|item| {
                    let raw = row[(item.number - 1) as usize];
                    let scored = if item.reversed {
                        bfi::reverse_score(raw).expect("validated rating")
                    } else {
                        raw
                    };
                    scored as f64
                })
                .collect()
        })
        .collect()
}

/// Per-trait internal consistency of the inventory ratings. A trait comes
/// back `Err` when its reliability is undefined (e.g. constant totals).
pub fn inventory_reliability(ratings: &[Vec<u8>]) -> [Result<f64, StatsError>; 5] {
    TraitDimension::ALL
        .map(|dimension| stats::cronbach_alpha(&trait_item_matrix(ratings, dimension)))
}

/// Per-dimension agreement plus the unweighted average row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitAgreement {
    /// Indexed by [`TraitDimension::index`].
    pub per_dimension: [AgreementReport; 5],
    pub average_precision: f64,
    pub average_recall: f64,
    pub average_f1: f64,
}

/// How well predicted trait labels recover the assigned ones, dimension
/// by dimension, from (gold, predicted) pairs.
pub fn trait_agreement(
    pairs: &[(TraitLevels, TraitLevels)],
) -> Result<TraitAgreement, AnalysisError> {
    let mut reports: Vec<AgreementReport> = Vec::with_capacity(5);
    for dimension in TraitDimension::ALL {
        let gold: Vec<Level> = pairs.iter().map(|(g, _)| g.get(dimension)).collect();
        let pred: Vec<Level> = pairs.iter().map(|(_, p)| p.get(dimension)).collect();
        reports.push(stats::agreement(&gold, &pred)?);
    }
    let per_dimension: [AgreementReport; 5] =
        reports.try_into().expect("five dimensions scored");
    let average = |f: fn(&AgreementReport) -> f64| {
        per_dimension.iter().map(f).sum::<f64>() / per_dimension.len() as f64
    };
    Ok(TraitAgreement {
        average_precision: average(|r| r.precision),
        average_recall: average(|r| r.recall),
        average_f1: average(|r| r.f1),
        per_dimension,
    })
}

/// Agreement between assigned and predicted language ability.
pub fn ability_agreement(pairs: &[(Level, Level)]) -> Result<AgreementReport, AnalysisError> {
    let gold: Vec<Level> = pairs.iter().map(|(g, _)| *g).collect();
    let pred: Vec<Level> = pairs.iter().map(|(_, p)| *p).collect();
    Ok(stats::agreement(&gold, &pred)?)
}
