use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use crate::corpus::{DemographicLexicon, EmbeddingFile};
use crate::encoder::ToyModel;
use crate::error::{read_file, Error, Result};
use crate::objectives::cosine_value;
use crate::text::tokenize;

/// True iff `positive` is `anchor` with demographic terms swapped for their
/// lexicon counterparts and nothing else changed.
///
/// Compares token multisets, so word order is ignored. Every removed token
/// must be matched one-to-one with an added token it is paired with; a pair
/// with no difference at all fails.
pub fn attribute_check(anchor: &str, positive: &str, lexicon: &DemographicLexicon) -> bool {
    let count = |s: &str| {
        let mut m: BTreeMap<String, i64> = BTreeMap::new();
        for t in tokenize(s) {
            *m.entry(t).or_default() += 1;
        }
        m
    };
    let a = count(anchor);
    let p = count(positive);
    let mut removed = Vec::new();
    let mut added = Vec::new();
    for (tok, &n) in &a {
        let diff = n - p.get(tok).copied().unwrap_or(0);
        removed.extend(std::iter::repeat_n(tok.clone(), diff.max(0) as usize));
    }
    for (tok, &n) in &p {
        let diff = n - a.get(tok).copied().unwrap_or(0);
        added.extend(std::iter::repeat_n(tok.clone(), diff.max(0) as usize));
    }
    if removed.is_empty() || removed.len() != added.len() {
        return false;
    }
    if removed.iter().chain(&added).any(|t| !lexicon.contains(t)) {
        return false;
    }
    perfect_matching(removed.len(), |i, j| lexicon.are_paired(&removed[i], &added[j]))
}

/// Kuhn's augmenting-path bipartite matching on an `n × n` compatibility relation.
fn perfect_matching(n: usize, compatible: impl Fn(usize, usize) -> bool) -> bool {
    fn augment(
        i: usize,
        n: usize,
        compatible: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..n {
            if compatible(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, n, compatible, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; n];
    (0..n).all(|i| augment(i, n, &compatible, &mut vec![false; n], &mut owner))
}

/// Scores text for toxicity on `[0, 1]`.
pub trait TextScorer: Sync {
    fn score(&self, text: &str) -> f64;
}

impl<F: Fn(&str) -> f64 + Sync> TextScorer for F {
    fn score(&self, text: &str) -> f64 {
        self(text)
    }
}

/// Fraction of tokens that appear in a blocklist.
#[derive(Debug, Clone, Default)]
pub struct BlocklistScorer {
    terms: HashSet<String>,
}

impl BlocklistScorer {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(terms: I) -> Self {
        BlocklistScorer {
            terms: terms
                .into_iter()
                .map(|t| t.as_ref().trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
        }
    }

    /// One term per line; blank lines and `#` comments skipped.
    pub fn parse(content: &str) -> Self {
        Self::new(
            content
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Ok(Self::parse(&read_file(path)?))
    }
}

impl TextScorer for BlocklistScorer {
    fn score(&self, text: &str) -> f64 {
        let toks = tokenize(text);
        if toks.is_empty() {
            return 0.0;
        }
        let hits = toks.iter().filter(|t| self.terms.contains(*t)).count();
        hits as f64 / toks.len() as f64
    }
}

/// Toxicity clamped to the unit interval.
pub fn toxicity_score(text: &str, scorer: &dyn TextScorer) -> f64 {
    let s = scorer.score(text);
    if s.is_nan() {
        1.0
    } else {
        s.clamp(0.0, 1.0)
    }
}

/// Maps a sentence to a fixed-dimension vector.
pub trait Embedder: Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>>;
}

impl Embedder for ToyModel {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        Ok(self.encode(text).vector)
    }
}

/// Cosine similarity of the two embeddings.
pub fn consistency_check(anchor: &str, positive: &str, embedder: &dyn Embedder) -> Result<f64> {
    let u = embedder.embed(anchor)?;
    let v = embedder.embed(positive)?;
    cosine_value(&u, &v)
}

/// Signed feature hashing of word unigrams and boundary-marked character
/// trigrams. Deterministic and training-free.
#[derive(Debug, Clone, Copy)]
pub struct HashingEmbedder {
    pub dim: usize,
    pub trigram_weight: f64,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder {
            dim: 512,
            trigram_weight: 0.5,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl HashingEmbedder {
    fn add(&self, v: &mut [f64], feature: &str, w: f64) {
        let h = fnv1a(feature.as_bytes());
        let idx = (h % self.dim as u64) as usize;
        let sign = if (h >> 63) == 0 { 1.0 } else { -1.0 };
        v[idx] += sign * w;
    }
}

impl Embedder for HashingEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.dim];
        for tok in tokenize(text) {
            self.add(&mut v, &format!("w:{tok}"), 1.0);
            let chars: Vec<char> = format!("#{tok}#").chars().collect();
            for win in chars.windows(3) {
                let tri: String = win.iter().collect();
                self.add(&mut v, &format!("c:{tri}"), self.trigram_weight);
            }
        }
        Ok(v)
    }
}

/// Looks up embeddings computed elsewhere (e.g. by a pretrained model).
/// Rows without a `text` field are reachable only through [`Self::by_id`].
#[derive(Debug, Clone, Default)]
pub struct PrecomputedEmbedder {
    by_text: HashMap<String, Vec<f64>>,
    by_id: HashMap<String, Vec<f64>>,
}

impl PrecomputedEmbedder {
    pub fn new(file: EmbeddingFile) -> Self {
        let mut e = PrecomputedEmbedder::default();
        for r in file.rows {
            if let Some(t) = r.text {
                e.by_text.insert(t, r.vector.clone());
            }
            e.by_id.insert(r.sentence_id, r.vector);
        }
        e
    }

    pub fn by_id(&self, sentence_id: &str) -> Option<&[f64]> {
        self.by_id.get(sentence_id).map(Vec::as_slice)
    }
}

impl Embedder for PrecomputedEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        self.by_text
            .get(text)
            .cloned()
            .ok_or_else(|| Error::Validation(format!("no precomputed embedding for `{text}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> DemographicLexicon {
        DemographicLexicon::parse("gender\the\tshe\ngender\tman\twoman\ngender\this\ther\ngender\thim\ther\n").unwrap()
    }

    #[test]
    fn attribute_examples() {
        let l = lex();
        assert!(attribute_check("He is a doctor.", "She is a doctor.", &l));
        assert!(!attribute_check("He is a doctor.", "She is a nurse.", &l));
        assert!(!attribute_check("He is a doctor.", "He is a doctor.", &l));
        assert!(attribute_check("He told his man", "She told her woman", &l));
        // partner mismatch: he -> her is not a lexicon pair
        assert!(!attribute_check("he saw it", "her saw it", &l));
    }

    #[test]
    fn matching_needs_augmenting_paths() {
        // her pairs with him and his; greedy first-fit could strand `his`.
        let l = lex();
        assert!(attribute_check("her and her", "his and him", &l));
        assert!(!attribute_check("her and her", "his and he", &l));
    }

    #[test]
    fn blocklist_ratio() {
        let s = BlocklistScorer::parse("dumb\nlazy\n# comment\n");
        assert_eq!(toxicity_score("a nice calm day in the park", &s), 0.0);
        assert_eq!(toxicity_score("the dumb and lazy cat sat on it", &s), 0.25);
        assert_eq!(toxicity_score("", &s), 0.0);
    }

    #[test]
    fn consistency_basics() {
        let e = HashingEmbedder::default();
        assert!((consistency_check("He is a doctor.", "He is a doctor.", &e).unwrap() - 1.0).abs() < 1e-12);
        struct Axis;
        impl Embedder for Axis {
            fn embed(&self, t: &str) -> Result<Vec<f64>> {
                Ok(if t == "x" { vec![1.0, 0.0] } else if t == "y" { vec![0.0, 1.0] } else { vec![0.0, 0.0] })
            }
        }
        assert_eq!(consistency_check("x", "y", &Axis).unwrap(), 0.0);
        assert!(matches!(consistency_check("x", "z", &Axis), Err(Error::UndefinedSimilarity)));
    }
}
