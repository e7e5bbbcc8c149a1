//! Dataset types and their on-disk formats.
//!
//! Counterfactual pairs come in as CSV (CrowS-Pairs column names). Every
//! other multi-record file is line-delimited JSON, one object per line.
//! Whitespace-only lines are skipped; every other line either yields a
//! record or a line-numbered error.

mod eval;
mod jsonl;
mod lexicon;
mod pairs;
mod triplets;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::{
    parse_embeddings, parse_eval_items, parse_scores, read_embeddings, read_eval_items,
    read_scores, write_embeddings, write_eval_items, write_scores, EmbeddingFile, EmbeddingRow, EvalItem,
    EvalOption, ScoreRow,
};
pub use jsonl::{parse_jsonl, write_jsonl};
pub use lexicon::DemographicLexicon;
pub use pairs::{parse_pairs, read_pairs, write_pairs};
pub use triplets::{
    parse_negatives, parse_triplets, read_negatives, read_triplets, write_triplets,
    FilterScores, NegativeProposal, NegativeSource, Triplet,
};

/// Bias category of a counterfactual pair or triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasType {
    Gender,
    Race,
    Religion,
    Age,
    Other,
}

impl BiasType {
    pub const ALL: [BiasType; 5] = [
        BiasType::Gender,
        BiasType::Race,
        BiasType::Religion,
        BiasType::Age,
        BiasType::Other,
    ];

    /// Maps a free-form category label onto the closed set. Unknown labels
    /// collapse to `Other`.
    pub fn from_label(label: &str) -> Self {
        match label.trim().to_ascii_lowercase().as_str() {
            "gender" => BiasType::Gender,
            "race" | "race-color" | "race_color" => BiasType::Race,
            "religion" => BiasType::Religion,
            "age" => BiasType::Age,
            _ => BiasType::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BiasType::Gender => "gender",
            BiasType::Race => "race",
            BiasType::Religion => "religion",
            BiasType::Age => "age",
            BiasType::Other => "other",
        }
    }
}

impl fmt::Display for BiasType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether `sent_more` is the stereotypical or the anti-stereotypical member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Stereo,
    Antistereo,
}

/// A minimally edited sentence pair differing only in demographic tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterfactualPair {
    pub id: String,
    pub sent_more: String,
    pub sent_less: String,
    pub bias_type: BiasType,
    pub direction: Direction,
}

/// Category of an evaluation item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Gender,
    Race,
    Religion,
    Other,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Gender,
        Category::Race,
        Category::Religion,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Gender => "gender",
            Category::Race => "race",
            Category::Religion => "religion",
            Category::Other => "other",
        }
    }
}

impl From<BiasType> for Category {
    fn from(b: BiasType) -> Self {
        match b {
            BiasType::Gender => Category::Gender,
            BiasType::Race => Category::Race,
            BiasType::Religion => Category::Religion,
            BiasType::Age | BiasType::Other => Category::Other,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Option label of an evaluation item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Stereotype,
    AntiStereotype,
    Unrelated,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Stereotype, Label::AntiStereotype, Label::Unrelated];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Stereotype => "stereotype",
            Label::AntiStereotype => "anti_stereotype",
            Label::Unrelated => "unrelated",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
