use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{compute_icat, compute_lm_score, compute_ss, ScoredItem};
use crate::corpus::Category;
use crate::error::{read_file, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub ss: f64,
    pub lm: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overall {
    pub ss: f64,
    pub lm: f64,
    pub icat: f64,
}

/// SS as the unweighted mean of the per-category SS values, with its ICAT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryMean {
    pub ss: f64,
    pub icat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub name: String,
    pub categories: BTreeMap<Category, CategoryMetrics>,
    /// Pooled over items.
    pub overall: Overall,
    pub category_mean: CategoryMean,
    pub n_total: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl BiasReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&read_file(path)?)
    }

    /// `|icat − lm · min(ss, 100 − ss) / 50|` for both ICAT fields, maximum.
    pub fn icat_residual(&self) -> f64 {
        let o = &self.overall;
        let r1 = (o.icat - o.lm * o.ss.min(100.0 - o.ss) / 50.0).abs();
        let m = &self.category_mean;
        let r2 = (m.icat - o.lm * m.ss.min(100.0 - m.ss) / 50.0).abs();
        r1.max(r2)
    }
}

const TABLE_CATEGORIES: [Category; 3] = [Category::Gender, Category::Race, Category::Religion];

/// Aggregates scored items into a report.
pub fn build_report(name: &str, scored: &[ScoredItem]) -> Result<BiasReport> {
    let ss = compute_ss(scored)?;
    let lm = compute_lm_score(scored)?;
    let mut counts: BTreeMap<Category, usize> = BTreeMap::new();
    for s in scored {
        *counts.entry(s.category).or_default() += 1;
    }
    let categories: BTreeMap<Category, CategoryMetrics> = counts
        .iter()
        .map(|(c, &n)| {
            (
                *c,
                CategoryMetrics {
                    ss: ss.per_category[c],
                    lm: lm.per_category[c],
                    n,
                },
            )
        })
        .collect();
    let warnings = TABLE_CATEGORIES
        .iter()
        .filter(|c| !categories.contains_key(c))
        .map(|c| format!("no items for category `{c}`; omitted"))
        .collect();
    let mean_ss = categories.values().map(|m| m.ss).sum::<f64>() / categories.len() as f64;
    Ok(BiasReport {
        name: name.to_string(),
        overall: Overall {
            ss: ss.overall,
            lm: lm.overall,
            icat: compute_icat(ss.overall, lm.overall)?,
        },
        category_mean: CategoryMean {
            ss: mean_ss,
            icat: compute_icat(mean_ss, lm.overall)?,
        },
        categories,
        n_total: scored.len(),
        warnings,
    })
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    chars
        .next()
        .map(|f| f.to_uppercase().chain(chars).collect())
        .unwrap_or_default()
}

/// Aligned text table, one row per report:
/// `Model | Gender SS | Race SS | Religion SS | LM Score | ICAT`, then the
/// category-mean columns. An `Other SS` column appears when any report has one.
/// Categories without items print as `--`.
pub fn render_table(reports: &[&BiasReport]) -> String {
    let mut cats = TABLE_CATEGORIES.to_vec();
    if reports.iter().any(|r| r.categories.contains_key(&Category::Other)) {
        cats.push(Category::Other);
    }
    let mut header = vec!["Model".to_string()];
    header.extend(cats.iter().map(|c| format!("{} SS", capitalize(c.as_str()))));
    header.extend(["LM Score", "ICAT", "Mean SS", "ICAT (mean SS)"].map(String::from));
    let mut rows: Vec<Vec<String>> = vec![header.clone()];
    for r in reports {
        let mut row = vec![r.name.clone()];
        for &c in &cats {
            row.push(r.categories.get(&c).map_or("--".into(), |m| format!("{:.2}", m.ss)));
        }
        row.push(format!("{:.2}", r.overall.lm));
        row.push(format!("{:.2}", r.overall.icat));
        row.push(format!("{:.2}", r.category_mean.ss));
        row.push(format!("{:.2}", r.category_mean.icat));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (k, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
        if k == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biaseval::OptionScores;

    fn item(id: &str, c: Category, s: f64, a: f64, u: f64) -> ScoredItem {
        ScoredItem {
            item_id: id.into(),
            category: c,
            scores: OptionScores {
                stereotype: s,
                anti_stereotype: a,
                unrelated: u,
            },
        }
    }

    #[test]
    fn single_category_renders_dashes() {
        let r = build_report("toy", &[item("1", Category::Gender, -1.0, -2.0, -3.0)]).unwrap();
        let t = render_table(&[&r]);
        let row = t.lines().nth(2).unwrap();
        assert!(row.contains("100.00"));
        assert_eq!(row.matches("--").count(), 2);
        assert_eq!(r.warnings.len(), 2);
    }

    #[test]
    fn json_round_trip_and_identity() {
        let r = build_report(
            "toy",
            &[
                item("1", Category::Gender, -1.0, -2.0, -3.0),
                item("2", Category::Race, -2.0, -1.0, -0.5),
                item("3", Category::Race, -2.0, -1.0, -3.0),
            ],
        )
        .unwrap();
        assert_eq!(BiasReport::from_json(&r.to_json()).unwrap(), r);
        assert!(r.icat_residual() < 1e-9);
        assert_eq!(r.categories.values().map(|m| m.n).sum::<usize>(), r.n_total);
    }
}
