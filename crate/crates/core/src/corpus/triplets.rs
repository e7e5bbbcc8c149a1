use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::jsonl::{parse_jsonl, write_jsonl};
use super::BiasType;
use crate::error::{read_file, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeSource {
    Generated,
    CrossCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterScores {
    pub attribute_ok: bool,
    /// In `[0, 1]`; the maximum over the three sentences.
    pub toxicity: f64,
    /// Cosine similarity of anchor and positive embeddings.
    pub consistency: f64,
}

/// An (anchor, positive, negative) training triplet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub id: String,
    pub anchor: String,
    pub positive: String,
    pub negative: String,
    pub bias_type: BiasType,
    pub negative_source: NegativeSource,
    /// Category of the pair the negative was borrowed from (back-off only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_bias_type: Option<BiasType>,
    pub filter_scores: FilterScores,
}

impl Triplet {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Validation(format!("triplet `{}`: {m}", self.id)));
        if self.anchor.trim().is_empty()
            || self.positive.trim().is_empty()
            || self.negative.trim().is_empty()
        {
            return bad("empty sentence");
        }
        if self.anchor == self.positive
            || self.anchor == self.negative
            || self.positive == self.negative
        {
            return bad("anchor, positive and negative must be pairwise distinct");
        }
        let fs = &self.filter_scores;
        if !fs.attribute_ok {
            return bad("attribute check not passed");
        }
        if !(0.0..=1.0).contains(&fs.toxicity) {
            return bad("toxicity outside [0, 1]");
        }
        if !(-1.0..=1.0).contains(&fs.consistency) {
            return bad("consistency outside [-1, 1]");
        }
        if let Some(nb) = self.negative_bias_type {
            if nb == self.bias_type {
                return bad("cross-category negative shares the anchor's bias type");
            }
        }
        Ok(())
    }

    /// The three sentences in role order.
    pub fn sentences(&self) -> [&str; 3] {
        [&self.anchor, &self.positive, &self.negative]
    }
}

pub fn parse_triplets(content: &str) -> Result<Vec<Triplet>> {
    let records: Vec<(usize, Triplet)> = parse_jsonl(content)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, t) in records {
        t.validate().map_err(|e| Error::Line {
            line,
            message: e.to_string(),
        })?;
        if !seen.insert(t.id.clone()) {
            return Err(Error::DuplicateId { line, id: t.id });
        }
        out.push(t);
    }
    Ok(out)
}

pub fn read_triplets(path: impl AsRef<Path>) -> Result<Vec<Triplet>> {
    let path = path.as_ref();
    parse_triplets(&read_file(path)?)
}

pub fn write_triplets(path: impl AsRef<Path>, triplets: &[Triplet]) -> Result<()> {
    let path = path.as_ref();
    for t in triplets {
        t.validate()?;
    }
    write_jsonl(path, triplets)
}

/// One row of a replay file of generated negatives. A `null` proposal means
/// generation failed for that pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeProposal {
    pub pair_id: String,
    pub proposal: Option<String>,
}

pub fn parse_negatives(content: &str) -> Result<Vec<NegativeProposal>> {
    let records: Vec<(usize, NegativeProposal)> = parse_jsonl(content)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, r) in records {
        if !seen.insert(r.pair_id.clone()) {
            return Err(Error::DuplicateId { line, id: r.pair_id });
        }
        out.push(r);
    }
    Ok(out)
}

pub fn read_negatives(path: impl AsRef<Path>) -> Result<Vec<NegativeProposal>> {
    let path = path.as_ref();
    parse_negatives(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: &str) -> Triplet {
        Triplet {
            id: id.into(),
            anchor: "He is a doctor.".into(),
            positive: "She is a doctor.".into(),
            negative: "He is a doctor, as men always are.".into(),
            bias_type: BiasType::Gender,
            negative_source: NegativeSource::Generated,
            negative_bias_type: None,
            filter_scores: FilterScores {
                attribute_ok: true,
                toxicity: 0.0,
                consistency: 0.93,
            },
        }
    }

    #[test]
    fn write_read_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let mut ts = vec![sample("a"), sample("b"), sample("c")];
        ts[1].negative_source = NegativeSource::CrossCategory;
        ts[1].negative_bias_type = Some(BiasType::Race);
        ts[2].filter_scores.consistency = 0.1 + 0.2;
        write_triplets(&path, &ts).unwrap();
        assert_eq!(read_triplets(&path).unwrap(), ts);
    }

    #[test]
    fn missing_negative_reports_line() {
        let line = r#"{"id":"x","anchor":"a","positive":"b","bias_type":"gender","negative_source":"generated","filter_scores":{"attribute_ok":true,"toxicity":0.0,"consistency":1.0}}"#;
        match parse_triplets(line) {
            Err(Error::Line { line: 1, message }) => assert!(message.contains("negative")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty() {
        assert!(parse_triplets("").unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_rejected() {
        let s = serde_json::to_string(&sample("a")).unwrap();
        let content = format!("{s}\n{s}\n");
        assert!(matches!(
            parse_triplets(&content),
            Err(Error::DuplicateId { line: 2, .. })
        ));
    }

    #[test]
    fn negatives_allow_null() {
        let c = "{\"pair_id\":\"1\",\"proposal\":null}\n{\"pair_id\":\"2\",\"proposal\":\"x\"}\n";
        let n = parse_negatives(c).unwrap();
        assert_eq!(n[0].proposal, None);
        assert_eq!(n[1].proposal.as_deref(), Some("x"));
    }
}
