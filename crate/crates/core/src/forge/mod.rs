//! Triplet construction from counterfactual pairs.
//!
//! 1. anchor = `sent_more`, positive = `sent_less` (one orientation per pair)
//! 2. negative from a [`NegativeProvider`]; on failure, back off to a sentence
//!    sampled from a different bias category
//! 3. filters, in order: attribute check, toxicity, consistency
//!
//! Items are processed independently (in parallel) with one RNG stream per
//! item index, so output order and samples do not depend on thread count.

mod filters;
mod provider;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    BiasType, CounterfactualPair, DemographicLexicon, FilterScores, NegativeSource, Triplet,
};
use crate::error::{Error, Result};

pub use filters::{
    attribute_check, consistency_check, toxicity_score, BlocklistScorer, Embedder,
    HashingEmbedder, PrecomputedEmbedder, TextScorer,
};
pub use provider::{NegativeProvider, ProposalRequest, ReplayProvider, TemplateProvider};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForgeConfig {
    pub toxicity_threshold: f64,
    pub consistency_threshold: f64,
    pub backoff_enabled: bool,
    pub rng_seed: u64,
}

impl Default for ForgeConfig {
    fn default() -> Self {
        ForgeConfig {
            toxicity_threshold: 0.5,
            consistency_threshold: 0.85,
            backoff_enabled: true,
            rng_seed: 0,
        }
    }
}

impl ForgeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.toxicity_threshold) {
            return Err(Error::Config(format!(
                "toxicity_threshold must lie in [0, 1], got {}",
                self.toxicity_threshold
            )));
        }
        if !(-1.0..=1.0).contains(&self.consistency_threshold) {
            return Err(Error::Config(format!(
                "consistency_threshold must lie in [-1, 1], got {}",
                self.consistency_threshold
            )));
        }
        Ok(())
    }
}

/// Per-run accounting. `retained` plus every `dropped_*` equals `input`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgeStats {
    pub input: usize,
    pub generated: usize,
    pub backoff: usize,
    pub dropped_sourcing: usize,
    pub dropped_attribute: usize,
    pub dropped_toxicity: usize,
    pub dropped_consistency: usize,
    pub retained: usize,
}

impl ForgeStats {
    pub fn is_conserved(&self) -> bool {
        self.retained
            + self.dropped_sourcing
            + self.dropped_attribute
            + self.dropped_toxicity
            + self.dropped_consistency
            == self.input
    }
}

/// Lexicon, toxicity scorer and embedder used by the quality filters.
pub struct FilterSet<'a> {
    pub lexicon: &'a DemographicLexicon,
    pub scorer: &'a dyn TextScorer,
    pub embedder: &'a dyn Embedder,
}

/// A back-off candidate: an anchor from some pair and its category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolEntry {
    pub text: String,
    pub bias_type: BiasType,
}

pub fn assign_anchor_positive(pair: &CounterfactualPair) -> (&str, &str) {
    (&pair.sent_more, &pair.sent_less)
}

/// Per-item RNG: stream `item` of the seeded generator.
pub fn item_rng(seed: u64, item: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(item);
    rng
}

/// Obtains a hard negative for `anchor`, backing off to the pool.
///
/// Back-off candidates must come from a different bias category and must not
/// repeat any text in `exclude`.
#[allow(clippy::too_many_arguments)]
pub fn source_negative(
    pair_id: &str,
    anchor: &str,
    bias_type: BiasType,
    exclude: &[&str],
    provider: &dyn NegativeProvider,
    pool: &[PoolEntry],
    backoff_enabled: bool,
    rng: &mut ChaCha8Rng,
) -> Result<(String, NegativeSource, Option<BiasType>)> {
    let proposal = provider.propose(ProposalRequest {
        pair_id,
        anchor,
        bias_type,
    });
    if let Some(p) = proposal {
        let p_trim = p.trim();
        if !p_trim.is_empty() && p_trim != anchor.trim() && !exclude.contains(&p_trim) {
            return Ok((p_trim.to_string(), NegativeSource::Generated, None));
        }
    }
    if !backoff_enabled {
        return Err(Error::Sourcing {
            id: pair_id.to_string(),
            reason: "provider failed and back-off disabled".into(),
        });
    }
    let candidates: Vec<&PoolEntry> = pool
        .iter()
        .filter(|e| e.bias_type != bias_type && !exclude.contains(&e.text.as_str()))
        .collect();
    match candidates.choose(rng) {
        Some(e) => Ok((e.text.clone(), NegativeSource::CrossCategory, Some(e.bias_type))),
        None => Err(Error::Sourcing {
            id: pair_id.to_string(),
            reason: "provider failed and no cross-category candidate".into(),
        }),
    }
}

enum Outcome {
    Retained(Box<Triplet>),
    DroppedSourcing,
    DroppedAttribute(NegativeSource),
    DroppedToxicity(NegativeSource),
    DroppedConsistency(NegativeSource),
}

impl Outcome {
    fn source(&self) -> Option<NegativeSource> {
        match self {
            Outcome::Retained(t) => Some(t.negative_source),
            Outcome::DroppedSourcing => None,
            Outcome::DroppedAttribute(s) | Outcome::DroppedToxicity(s) | Outcome::DroppedConsistency(s) => Some(*s),
        }
    }
}

fn forge_one(
    index: usize,
    pair: &CounterfactualPair,
    provider: &dyn NegativeProvider,
    filters: &FilterSet<'_>,
    pool: &[PoolEntry],
    cfg: &ForgeConfig,
) -> Outcome {
    let (anchor, positive) = assign_anchor_positive(pair);
    let mut rng = item_rng(cfg.rng_seed, index as u64);
    let sourced = source_negative(
        &pair.id,
        anchor,
        pair.bias_type,
        &[anchor, positive],
        provider,
        pool,
        cfg.backoff_enabled,
        &mut rng,
    );
    let (negative, source, negative_bias_type) = match sourced {
        Ok(x) => x,
        Err(_) => return Outcome::DroppedSourcing,
    };
    if !attribute_check(anchor, positive, filters.lexicon) {
        return Outcome::DroppedAttribute(source);
    }
    let toxicity = [anchor, positive, negative.as_str()]
        .iter()
        .map(|t| toxicity_score(t, filters.scorer))
        .fold(0.0, f64::max);
    if toxicity > cfg.toxicity_threshold {
        return Outcome::DroppedToxicity(source);
    }
    let consistency = match consistency_check(anchor, positive, filters.embedder) {
        Ok(c) if c >= cfg.consistency_threshold => c,
        _ => return Outcome::DroppedConsistency(source),
    };
    Outcome::Retained(Box::new(Triplet {
        id: pair.id.clone(),
        anchor: anchor.to_string(),
        positive: positive.to_string(),
        negative,
        bias_type: pair.bias_type,
        negative_source: source,
        negative_bias_type,
        filter_scores: FilterScores {
            attribute_ok: true,
            toxicity,
            consistency,
        },
    }))
}

/// Runs the three construction steps over every pair. Output order follows input order.
pub fn build_triplets(
    pairs: &[CounterfactualPair],
    provider: &dyn NegativeProvider,
    filters: &FilterSet<'_>,
    cfg: &ForgeConfig,
) -> Result<(Vec<Triplet>, ForgeStats)> {
    cfg.validate()?;
    let pool: Vec<PoolEntry> = pairs
        .iter()
        .map(|p| PoolEntry {
            text: p.sent_more.clone(),
            bias_type: p.bias_type,
        })
        .collect();
    let outcomes: Vec<Outcome> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| forge_one(i, p, provider, filters, &pool, cfg))
        .collect();

    let mut stats = ForgeStats {
        input: pairs.len(),
        ..ForgeStats::default()
    };
    let mut out = Vec::new();
    for o in outcomes {
        match o.source() {
            Some(NegativeSource::Generated) => stats.generated += 1,
            Some(NegativeSource::CrossCategory) => stats.backoff += 1,
            None => {}
        }
        match o {
            Outcome::Retained(t) => {
                stats.retained += 1;
                out.push(*t);
            }
            Outcome::DroppedSourcing => stats.dropped_sourcing += 1,
            Outcome::DroppedAttribute(_) => stats.dropped_attribute += 1,
            Outcome::DroppedToxicity(_) => stats.dropped_toxicity += 1,
            Outcome::DroppedConsistency(_) => stats.dropped_consistency += 1,
        }
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Direction;

    fn pair(id: &str, more: &str, less: &str, b: BiasType) -> CounterfactualPair {
        CounterfactualPair {
            id: id.into(),
            sent_more: more.into(),
            sent_less: less.into(),
            bias_type: b,
            direction: Direction::Stereo,
        }
    }

    fn none_provider(_: ProposalRequest<'_>) -> Option<String> {
        None
    }

    #[test]
    fn anchor_positive_is_positional() {
        let p = pair("1", "He is a doctor.", "She is a doctor.", BiasType::Gender);
        assert_eq!(assign_anchor_positive(&p), ("He is a doctor.", "She is a doctor."));
        let swapped = pair("2", "She is a doctor.", "He is a doctor.", BiasType::Gender);
        assert_eq!(assign_anchor_positive(&swapped).0, "She is a doctor.");
    }

    #[test]
    fn backoff_picks_other_category() {
        let pool = vec![
            PoolEntry {
                text: "same category".into(),
                bias_type: BiasType::Gender,
            },
            PoolEntry {
                text: "The rich man lied.".into(),
                bias_type: BiasType::Race,
            },
        ];
        let mut rng = item_rng(7, 0);
        let got = source_negative("1", "He is a doctor.", BiasType::Gender, &[], &none_provider, &pool, true, &mut rng).unwrap();
        assert_eq!(got, ("The rich man lied.".to_string(), NegativeSource::CrossCategory, Some(BiasType::Race)));
    }

    #[test]
    fn sourcing_fails_without_pool() {
        let mut rng = item_rng(7, 0);
        assert!(matches!(
            source_negative("1", "a b", BiasType::Gender, &[], &none_provider, &[], true, &mut rng),
            Err(Error::Sourcing { .. })
        ));
        let pool = vec![PoolEntry { text: "x".into(), bias_type: BiasType::Race }];
        assert!(source_negative("1", "a b", BiasType::Gender, &[], &none_provider, &pool, false, &mut rng).is_err());
    }

    #[test]
    fn provider_echo_is_rejected() {
        let echo = |r: ProposalRequest<'_>| Some(r.anchor.to_string());
        let mut rng = item_rng(1, 0);
        assert!(source_negative("1", "a b", BiasType::Gender, &[], &echo, &[], true, &mut rng).is_err());
    }

    #[test]
    fn single_pair_paths() {
        let lex = DemographicLexicon::parse("gender\the\tshe\n").unwrap();
        let scorer = BlocklistScorer::default();
        let emb = HashingEmbedder::default();
        let filters = FilterSet {
            lexicon: &lex,
            scorer: &scorer,
            embedder: &emb,
        };
        let neg = |_: ProposalRequest<'_>| Some("He is a doctor and only men can be doctors.".to_string());
        let cfg = ForgeConfig {
            consistency_threshold: 0.5,
            ..ForgeConfig::default()
        };
        let ok = [pair("1", "He is a doctor in town.", "She is a doctor in town.", BiasType::Gender)];
        let (ts, st) = build_triplets(&ok, &neg, &filters, &cfg).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(st.retained, 1);
        assert_eq!(st.generated, 1);
        assert!(ts[0].validate().is_ok());

        let bad = [pair("1", "He is a doctor.", "She is a nurse.", BiasType::Gender)];
        let (ts, st) = build_triplets(&bad, &neg, &filters, &cfg).unwrap();
        assert!(ts.is_empty());
        assert_eq!(st.dropped_attribute, 1);
        assert!(st.is_conserved());
    }
}
