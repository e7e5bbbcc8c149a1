//! Stereotype Score, Language Modeling Score and ICAT.

mod metrics;
mod report;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{EvalItem, Label, ScoreRow};
use crate::encoder::ToyModel;
use crate::error::{Error, Result};

pub use metrics::{
    compute_icat, compute_lm_score, compute_ss, CategoryPercentages, OptionScores, ScoredItem,
};
pub use report::{build_report, render_table, BiasReport, CategoryMean, CategoryMetrics, Overall};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemError {
    pub item_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Scoring {
    pub scored: Vec<ScoredItem>,
    pub errors: Vec<ItemError>,
}

/// Scores every option by its length-normalized log-probability under the
/// toy causal LM. Items with an option that has no tokens become error entries.
pub fn score_with_toy(model: &ToyModel, items: &[EvalItem]) -> Scoring {
    let results: Vec<Result<ScoredItem>> = items
        .par_iter()
        .map(|item| {
            item.validate()?;
            let s = |l| model.mean_log_prob(item.option(l));
            Ok(ScoredItem {
                item_id: item.id.clone(),
                category: item.category,
                scores: OptionScores {
                    stereotype: s(Label::Stereotype)?,
                    anti_stereotype: s(Label::AntiStereotype)?,
                    unrelated: s(Label::Unrelated)?,
                },
            })
        })
        .collect();
    let mut out = Scoring::default();
    for (item, r) in items.iter().zip(results) {
        match r {
            Ok(s) => out.scored.push(s),
            Err(e) => out.errors.push(ItemError {
                item_id: item.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    out
}

/// Joins externally computed score rows onto their items.
pub fn scored_from_rows(items: &[EvalItem], rows: &[ScoreRow]) -> Result<Vec<ScoredItem>> {
    let by_key: HashMap<(&str, Label), f64> = rows
        .iter()
        .map(|r| ((r.item_id.as_str(), r.label), r.score))
        .collect();
    items
        .iter()
        .map(|item| {
            let get = |l: Label| {
                by_key.get(&(item.id.as_str(), l)).copied().ok_or_else(|| Error::Coverage {
                    missing: vec![format!("{}:{}", item.id, l)],
                    unknown: vec![],
                })
            };
            Ok(ScoredItem {
                item_id: item.id.clone(),
                category: item.category,
                scores: OptionScores {
                    stereotype: get(Label::Stereotype)?,
                    anti_stereotype: get(Label::AntiStereotype)?,
                    unrelated: get(Label::Unrelated)?,
                },
            })
        })
        .collect()
}

/// Flattens scored items back into score rows.
pub fn to_score_rows(scored: &[ScoredItem]) -> Vec<ScoreRow> {
    scored
        .iter()
        .flat_map(|s| {
            [
                (Label::Stereotype, s.scores.stereotype),
                (Label::AntiStereotype, s.scores.anti_stereotype),
                (Label::Unrelated, s.scores.unrelated),
            ]
            .into_iter()
            .map(|(label, score)| ScoreRow {
                item_id: s.item_id.clone(),
                label,
                score,
            })
        })
        .collect()
}
