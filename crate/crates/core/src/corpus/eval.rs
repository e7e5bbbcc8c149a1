use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::jsonl::{parse_jsonl, write_jsonl};
use super::{Category, Label};
use crate::error::{read_file, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOption {
    pub text: String,
    pub label: Label,
}

/// A context with stereotype, anti-stereotype and unrelated options.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalItem {
    pub id: String,
    pub category: Category,
    pub options: Vec<EvalOption>,
}

impl EvalItem {
    pub fn new(id: impl Into<String>, category: Category, stereo: &str, anti: &str, unrelated: &str) -> Self {
        let opt = |text: &str, label| EvalOption {
            text: text.to_string(),
            label,
        };
        EvalItem {
            id: id.into(),
            category,
            options: vec![
                opt(stereo, Label::Stereotype),
                opt(anti, Label::AntiStereotype),
                opt(unrelated, Label::Unrelated),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.options.len() != 3 {
            return Err(Error::Validation(format!(
                "item `{}` has {} options, expected 3",
                self.id,
                self.options.len()
            )));
        }
        let labels: HashSet<Label> = self.options.iter().map(|o| o.label).collect();
        if labels.len() != 3 {
            return Err(Error::Validation(format!(
                "item `{}` must carry exactly one option per label",
                self.id
            )));
        }
        if self.options.iter().any(|o| o.text.trim().is_empty()) {
            return Err(Error::Validation(format!("item `{}` has an empty option", self.id)));
        }
        Ok(())
    }

    /// Text of the option with `label`. Panics on an unvalidated item.
    pub fn option(&self, label: Label) -> &str {
        &self
            .options
            .iter()
            .find(|o| o.label == label)
            .expect("validated item carries every label")
            .text
    }
}

pub fn parse_eval_items(content: &str) -> Result<Vec<EvalItem>> {
    let records: Vec<(usize, EvalItem)> = parse_jsonl(content)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, item) in records {
        item.validate().map_err(|e| Error::Line {
            line,
            message: e.to_string(),
        })?;
        if !seen.insert(item.id.clone()) {
            return Err(Error::DuplicateId { line, id: item.id });
        }
        out.push(item);
    }
    Ok(out)
}

pub fn read_eval_items(path: impl AsRef<Path>) -> Result<Vec<EvalItem>> {
    let path = path.as_ref();
    parse_eval_items(&read_file(path)?)
}

pub fn write_eval_items(path: impl AsRef<Path>, items: &[EvalItem]) -> Result<()> {
    let path = path.as_ref();
    write_jsonl(path, items)
}

/// One externally computed sentence score; higher means more probable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub item_id: String,
    pub label: Label,
    pub score: f64,
}

/// Parses a score file. When `items` is given, every (item, label) must
/// appear exactly once and no row may reference an unknown item.
pub fn parse_scores(content: &str, items: Option<&[EvalItem]>) -> Result<Vec<ScoreRow>> {
    let records: Vec<(usize, ScoreRow)> = parse_jsonl(content)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, row) in records {
        if !row.score.is_finite() {
            return Err(Error::Line {
                line,
                message: "score is not finite".into(),
            });
        }
        if !seen.insert((row.item_id.clone(), row.label)) {
            return Err(Error::DuplicateId {
                line,
                id: format!("{}:{}", row.item_id, row.label),
            });
        }
        out.push(row);
    }
    if let Some(items) = items {
        let known: HashMap<&str, ()> = items.iter().map(|i| (i.id.as_str(), ())).collect();
        let unknown: BTreeSet<String> = out
            .iter()
            .filter(|r| !known.contains_key(r.item_id.as_str()))
            .map(|r| r.item_id.clone())
            .collect();
        let mut missing = Vec::new();
        for item in items {
            for label in Label::ALL {
                if !seen.contains(&(item.id.clone(), label)) {
                    missing.push(format!("{}:{}", item.id, label));
                }
            }
        }
        if !missing.is_empty() || !unknown.is_empty() {
            return Err(Error::Coverage {
                missing,
                unknown: unknown.into_iter().collect(),
            });
        }
    }
    Ok(out)
}

pub fn read_scores(path: impl AsRef<Path>, items: Option<&[EvalItem]>) -> Result<Vec<ScoreRow>> {
    let path = path.as_ref();
    parse_scores(&read_file(path)?, items)
}

pub fn write_scores(path: impl AsRef<Path>, rows: &[ScoreRow]) -> Result<()> {
    let path = path.as_ref();
    write_jsonl(path, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingHeader {
    dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRow {
    pub sentence_id: String,
    /// Source sentence; required for text-keyed lookup.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub vector: Vec<f64>,
}

/// Sentence embeddings: a `{"dim": n}` header line followed by one row per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub dim: usize,
    pub rows: Vec<EmbeddingRow>,
}

pub fn parse_embeddings(content: &str) -> Result<EmbeddingFile> {
    let mut lines = content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(Error::Line {
        line: 1,
        message: "missing {\"dim\": n} header".into(),
    })?;
    let header: EmbeddingHeader = serde_json::from_str(header).map_err(|e| Error::Line {
        line: hline + 1,
        message: format!("bad header: {e}"),
    })?;
    if header.dim == 0 {
        return Err(Error::Line {
            line: hline + 1,
            message: "dimension must be positive".into(),
        });
    }
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for (idx, l) in lines {
        let line = idx + 1;
        let row: EmbeddingRow = serde_json::from_str(l).map_err(|e| Error::Line {
            line,
            message: e.to_string(),
        })?;
        if row.vector.len() != header.dim {
            return Err(Error::Line {
                line,
                message: format!("vector has {} components, header declares {}", row.vector.len(), header.dim),
            });
        }
        if row.vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Line {
                line,
                message: "non-finite component".into(),
            });
        }
        if !seen.insert(row.sentence_id.clone()) {
            return Err(Error::DuplicateId {
                line,
                id: row.sentence_id,
            });
        }
        rows.push(row);
    }
    Ok(EmbeddingFile { dim: header.dim, rows })
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingFile> {
    let path = path.as_ref();
    parse_embeddings(&read_file(path)?)
}

pub fn write_embeddings(path: impl AsRef<Path>, file: &EmbeddingFile) -> Result<()> {
    let path = path.as_ref();
    use std::io::Write;
    let mut buf = serde_json::to_string(&EmbeddingHeader { dim: file.dim })?;
    buf.push('\n');
    for r in &file.rows {
        buf.push_str(&serde_json::to_string(r)?);
        buf.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(buf.as_bytes())?;
    Ok(())
}
