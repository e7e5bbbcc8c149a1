use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::corpus::{BiasType, NegativeProposal};

/// What a provider is asked to produce a hard negative for.
#[derive(Debug, Clone, Copy)]
pub struct ProposalRequest<'a> {
    pub pair_id: &'a str,
    pub anchor: &'a str,
    pub bias_type: BiasType,
}

/// Source of stereotype-reinforcing variants of an anchor sentence.
///
/// `None` means generation failed. A proposal that is empty or equal to the
/// anchor is treated as a failure by the forge.
pub trait NegativeProvider: Sync {
    fn propose(&self, req: ProposalRequest<'_>) -> Option<String>;
}

impl<F> NegativeProvider for F
where
    F: Fn(ProposalRequest<'_>) -> Option<String> + Sync,
{
    fn propose(&self, req: ProposalRequest<'_>) -> Option<String> {
        self(req)
    }
}

/// Replays proposals generated offline, keyed by pair id.
#[derive(Debug, Clone, Default)]
pub struct ReplayProvider {
    proposals: HashMap<String, Option<String>>,
}

impl ReplayProvider {
    pub fn new(rows: impl IntoIterator<Item = NegativeProposal>) -> Self {
        ReplayProvider {
            proposals: rows.into_iter().map(|r| (r.pair_id, r.proposal)).collect(),
        }
    }
}

impl NegativeProvider for ReplayProvider {
    fn propose(&self, req: ProposalRequest<'_>) -> Option<String> {
        self.proposals.get(req.pair_id).cloned().flatten()
    }
}

/// Appends a stereotype-amplifying clause picked from a per-category table.
///
/// Templates contain `{anchor}`; the clause index is chosen by hashing the
/// anchor, so the output depends on nothing but the input text.
#[derive(Debug, Clone)]
pub struct TemplateProvider {
    table: HashMap<BiasType, Vec<String>>,
}

impl Default for TemplateProvider {
    fn default() -> Self {
        let mut table = HashMap::new();
        let generic = [
            "{anchor} and that is just how people like that are",
            "{anchor} because that is all their kind is good for",
        ];
        let rows: [(BiasType, &[&str]); 5] = [
            (
                BiasType::Gender,
                &[
                    "{anchor} because that is what their gender is made for",
                    "{anchor} as everyone of that sex naturally is",
                ],
            ),
            (
                BiasType::Race,
                &[
                    "{anchor} as is typical of their race",
                    "{anchor} because people of that race are always like that",
                ],
            ),
            (
                BiasType::Religion,
                &[
                    "{anchor} as their faith makes them",
                    "{anchor} because followers of that religion are all the same",
                ],
            ),
            (BiasType::Age, &generic),
            (BiasType::Other, &generic),
        ];
        for (b, ts) in rows {
            table.insert(b, ts.iter().map(|s| s.to_string()).collect());
        }
        TemplateProvider { table }
    }
}

impl TemplateProvider {
    /// Parses `category<TAB>template` lines; categories not listed produce no proposal.
    pub fn from_tsv(content: &str) -> crate::Result<Self> {
        let mut table: HashMap<BiasType, Vec<String>> = HashMap::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (cat, tpl) = line.split_once('\t').ok_or_else(|| crate::Error::Line {
                line: i + 1,
                message: "expected `category<TAB>template`".into(),
            })?;
            if !tpl.contains("{anchor}") {
                return Err(crate::Error::Line {
                    line: i + 1,
                    message: "template lacks `{anchor}`".into(),
                });
            }
            table
                .entry(BiasType::from_label(cat))
                .or_default()
                .push(tpl.to_string());
        }
        Ok(TemplateProvider { table })
    }

    pub fn with_templates(mut self, bias: BiasType, templates: Vec<String>) -> Self {
        self.table.insert(bias, templates);
        self
    }
}

impl NegativeProvider for TemplateProvider {
    fn propose(&self, req: ProposalRequest<'_>) -> Option<String> {
        let ts = self.table.get(&req.bias_type)?;
        if ts.is_empty() {
            return None;
        }
        let digest = Sha256::digest(req.anchor.as_bytes());
        let mut first = [0u8; 8];
        first.copy_from_slice(&digest[..8]);
        let pick = (u64::from_le_bytes(first) % ts.len() as u64) as usize;
        let anchor = req.anchor.trim().trim_end_matches(['.', '!', '?']);
        Some(format!("{}.", ts[pick].replace("{anchor}", anchor)))
    }
}
