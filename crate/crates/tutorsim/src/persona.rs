//! Student persona model: the five tutoring-conversation personality
//! dimensions, the binary language-ability setting, and profile sampling.
//!
//! Descriptor phrases are loaded from the snapshot files under `persona/`
//! (one phrase per line) and embedded at compile time, so the wording is
//! pinned by the committed files rather than by string literals in code.

use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The five personality dimensions, in the canonical O, C, E, A, N order
/// used by every table and report in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraitDimension {
    Openness,
    Conscientiousness,
    Extraversion,
    Agreeableness,
    Neuroticism,
}

impl TraitDimension {
    /// All five dimensions in canonical order.
    pub const ALL: [TraitDimension; 5] = [
        TraitDimension::Openness,
        TraitDimension::Conscientiousness,
        TraitDimension::Extraversion,
        TraitDimension::Agreeableness,
        TraitDimension::Neuroticism,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TraitDimension::Openness => "Openness",
            TraitDimension::Conscientiousness => "Conscientiousness",
            TraitDimension::Extraversion => "Extraversion",
            TraitDimension::Agreeableness => "Agreeableness",
            TraitDimension::Neuroticism => "Neuroticism",
        }
    }

    /// Lowercase key used in JSON maps and file names.
    pub fn key(&self) -> &'static str {
        match self {
            TraitDimension::Openness => "openness",
            TraitDimension::Conscientiousness => "conscientiousness",
            TraitDimension::Extraversion => "extraversion",
            TraitDimension::Agreeableness => "agreeableness",
            TraitDimension::Neuroticism => "neuroticism",
        }
    }

    /// Position in canonical order (Openness = 0 .. Neuroticism = 4).
    pub fn index(&self) -> usize {
        match self {
            TraitDimension::Openness => 0,
            TraitDimension::Conscientiousness => 1,
            TraitDimension::Extraversion => 2,
            TraitDimension::Agreeableness => 3,
            TraitDimension::Neuroticism => 4,
        }
    }

    pub fn from_key(key: &str) -> Option<TraitDimension> {
        TraitDimension::ALL.into_iter().find(|d| d.key() == key)
    }
}

impl fmt::Display for TraitDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Binary level used for both ability and trait settings.
/// Serialized exactly as `"High"` / `"Low"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    High,
    Low,
}

impl Level {
    pub const ALL: [Level; 2] = [Level::High, Level::Low];

    pub fn name(&self) -> &'static str {
        match self {
            Level::High => "High",
            Level::Low => "Low",
        }
    }

    /// Single-letter code used in compact profile identifiers.
    pub fn letter(&self) -> char {
        match self {
            Level::High => 'H',
            Level::Low => 'L',
        }
    }

    /// Numeric encoding used by the correlation analyses (Low = 0, High = 1).
    pub fn as_binary(&self) -> f64 {
        match self {
            Level::High => 1.0,
            Level::Low => 0.0,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A High/Low assignment for each of the five dimensions.
///
/// Used both as the specified persona of a [`StudentProfile`] and as the
/// label set produced by the personality judge. Serializes as a JSON map
/// keyed by lowercase dimension name, always with all five entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraitLevels([Level; 5]);

impl TraitLevels {
    pub fn new(
        openness: Level,
        conscientiousness: Level,
        extraversion: Level,
        agreeableness: Level,
        neuroticism: Level,
    ) -> Self {
        TraitLevels([
            openness,
            conscientiousness,
            extraversion,
            agreeableness,
            neuroticism,
        ])
    }

    pub fn uniform(level: Level) -> Self {
        TraitLevels([level; 5])
    }

    pub fn get(&self, dimension: TraitDimension) -> Level {
        self.0[dimension.index()]
    }

    pub fn set(&mut self, dimension: TraitDimension, level: Level) {
        self.0[dimension.index()] = level;
    }

    /// (dimension, level) pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (TraitDimension, Level)> + '_ {
        TraitDimension::ALL.into_iter().map(|d| (d, self.get(d)))
    }

    /// Compact code like `oHcHeLaHnL`, canonical order.
    pub fn code(&self) -> String {
        self.iter()
            .map(|(d, l)| format!("{}{}", d.key().chars().next().unwrap(), l.letter()))
            .collect()
    }
}

impl Serialize for TraitLevels {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        for (dim, level) in self.iter() {
            map.serialize_entry(dim.key(), &level)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for TraitLevels {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct TraitLevelsVisitor;

        impl<'de> Visitor<'de> for TraitLevelsVisitor {
            type Value = TraitLevels;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map with exactly the five trait dimensions")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut slots: [Option<Level>; 5] = [None; 5];
                while let Some((key, level)) = access.next_entry::<String, Level>()? {
                    let dim = TraitDimension::from_key(&key)
                        .ok_or_else(|| de::Error::custom(format!("unknown trait dimension `{key}`")))?;
                    if slots[dim.index()].replace(level).is_some() {
                        return Err(de::Error::custom(format!("duplicate trait dimension `{key}`")));
                    }
                }
                let mut levels = [Level::High; 5];
                for dim in TraitDimension::ALL {
                    levels[dim.index()] = slots[dim.index()].ok_or_else(|| {
                        de::Error::custom(format!("missing trait dimension `{}`", dim.key()))
                    })?;
                }
                Ok(TraitLevels(levels))
            }
        }

        deserializer.deserialize_map(TraitLevelsVisitor)
    }
}

/// One simulated student: a language-ability level plus all five trait levels.
///
/// There are exactly 64 distinct profiles (2 ability x 2^5 traits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StudentProfile {
    pub ability: Level,
    pub traits: TraitLevels,
}

impl StudentProfile {
    pub fn new(ability: Level, traits: TraitLevels) -> Self {
        StudentProfile { ability, traits }
    }

    /// Compact identifier like `abH-oHcHeLaHnL`, stable across runs.
    pub fn code(&self) -> String {
        format!("ab{}-{}", self.ability.letter(), self.traits.code())
    }
}

/// The exact descriptor phrases for one (dimension, level) cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraitDescriptor {
    pub dimension: TraitDimension,
    pub level: Level,
    pub descriptors: Vec<String>,
}

/// The descriptor phrases for one language-ability level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbilityDescriptor {
    pub level: Level,
    pub descriptors: Vec<String>,
}

impl Serialize for TraitDimension {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for TraitDimension {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        TraitDimension::ALL
            .into_iter()
            .find(|d| d.name() == name)
            .ok_or_else(|| de::Error::custom(format!("unknown trait dimension `{name}`")))
    }
}

macro_rules! descriptor_file {
    ($name:literal) => {
        include_str!(concat!("../persona/", $name, ".txt"))
    };
}

fn phrases(raw: &'static str) -> Vec<String> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

fn trait_table() -> &'static [[Vec<String>; 2]; 5] {
    static TABLE: OnceLock<[[Vec<String>; 2]; 5]> = OnceLock::new();
    TABLE.get_or_init(|| {
        [
            [
                phrases(descriptor_file!("openness_high")),
                phrases(descriptor_file!("openness_low")),
            ],
            [
                phrases(descriptor_file!("conscientiousness_high")),
                phrases(descriptor_file!("conscientiousness_low")),
            ],
            [
                phrases(descriptor_file!("extraversion_high")),
                phrases(descriptor_file!("extraversion_low")),
            ],
            [
                phrases(descriptor_file!("agreeableness_high")),
                phrases(descriptor_file!("agreeableness_low")),
            ],
            [
                phrases(descriptor_file!("neuroticism_high")),
                phrases(descriptor_file!("neuroticism_low")),
            ],
        ]
    })
}

fn ability_table() -> &'static [Vec<String>; 2] {
    static TABLE: OnceLock<[Vec<String>; 2]> = OnceLock::new();
    TABLE.get_or_init(|| {
        [
            phrases(descriptor_file!("ability_high")),
            phrases(descriptor_file!("ability_low")),
        ]
    })
}

fn level_slot(level: Level) -> usize {
    match level {
        Level::High => 0,
        Level::Low => 1,
    }
}

/// The three descriptor phrases for a (dimension, level) cell.
pub fn trait_description(dimension: TraitDimension, level: Level) -> TraitDescriptor {
    let descriptors = trait_table()[dimension.index()][level_slot(level)].clone();
    TraitDescriptor {
        dimension,
        level,
        descriptors,
    }
}

/// The language-ability descriptor phrases for a level.
pub fn ability_description(level: Level) -> AbilityDescriptor {
    AbilityDescriptor {
        level,
        descriptors: ability_table()[level_slot(level)].clone(),
    }
}

/// How `sample_profiles` picks from the 64-profile space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingStrategy {
    /// Independent draws, reproducible from the seed.
    Uniform,
    /// The full 64-profile enumeration in canonical order, repeated or
    /// truncated to the requested count.
    Grid,
}

/// All 64 profiles in canonical order: ability varies slowest (High first),
/// then each trait dimension in O, C, E, A, N order, Neuroticism fastest.
pub fn all_profiles() -> Vec<StudentProfile> {
    let mut out = Vec::with_capacity(64);
    for ability in Level::ALL {
        for bits in 0..32u8 {
            let mut traits = TraitLevels::uniform(Level::High);
            for dim in TraitDimension::ALL {
                // Bit 4 is Openness, bit 0 Neuroticism; set bit means Low.
                if bits >> (4 - dim.index()) & 1 == 1 {
                    traits.set(dim, Level::Low);
                }
            }
            out.push(StudentProfile::new(ability, traits));
        }
    }
    out
}

/// Sample `count` profiles. Deterministic for a given (count, seed, strategy).
pub fn sample_profiles(count: usize, seed: u64, strategy: SamplingStrategy) -> Vec<StudentProfile> {
    match strategy {
        SamplingStrategy::Grid => all_profiles().into_iter().cycle().take(count).collect(),
        SamplingStrategy::Uniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let space = all_profiles();
            (0..count)
                .map(|_| space[rng.gen_range(0..space.len())])
                .collect()
        }
    }
}
