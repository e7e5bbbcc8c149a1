use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{read_file, Error, Result};

/// Paired identity terms per protected attribute (e.g. `gender: he <-> she`).
///
/// Pairing is stored symmetrically, so `are_paired(a, b) == are_paired(b, a)`.
/// A term may have several counterparts (`her` pairs with both `him` and `his`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DemographicLexicon {
    groups: BTreeMap<String, Vec<(String, String)>>,
    partners: BTreeMap<String, BTreeSet<String>>,
}

impl DemographicLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a symmetric pair. Terms are lowercased.
    pub fn insert(&mut self, group: &str, a: &str, b: &str) -> Result<()> {
        let a = a.trim().to_lowercase();
        let b = b.trim().to_lowercase();
        if a.is_empty() || b.is_empty() || a == b {
            return Err(Error::Validation(format!("invalid lexicon pair `{a}` / `{b}`")));
        }
        let pairs = self.groups.entry(group.trim().to_string()).or_default();
        if !pairs.contains(&(a.clone(), b.clone())) {
            pairs.push((a.clone(), b.clone()));
        }
        self.partners.entry(a.clone()).or_default().insert(b.clone());
        self.partners.entry(b).or_default().insert(a);
        Ok(())
    }

    /// Parses `group<TAB>termA<TAB>termB` lines. `#` starts a comment line.
    pub fn parse(content: &str) -> Result<Self> {
        let mut lex = Self::new();
        for (idx, raw) in content.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Line {
                    line: idx + 1,
                    message: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            }
            lex.insert(fields[0], fields[1], fields[2]).map_err(|e| Error::Line {
                line: idx + 1,
                message: e.to_string(),
            })?;
        }
        Ok(lex)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_file(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (g, pairs) in &self.groups {
            for (a, b) in pairs {
                s.push_str(&format!("{g}\t{a}\t{b}\n"));
            }
        }
        s
    }

    pub fn are_paired(&self, a: &str, b: &str) -> bool {
        self.partners.get(a).is_some_and(|p| p.contains(b))
    }

    pub fn counterparts(&self, term: &str) -> Option<&BTreeSet<String>> {
        self.partners.get(term)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.partners.contains_key(term)
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &[(String, String)])> {
        self.groups.iter().map(|(g, p)| (g.as_str(), p.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.partners.is_empty()
    }

    /// Every stored partner relation has its mirror.
    pub fn is_symmetric(&self) -> bool {
        self.partners
            .iter()
            .all(|(a, bs)| bs.iter().all(|b| self.are_paired(b, a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_is_symmetric() {
        let lex = DemographicLexicon::parse("gender\the\tshe\n# c\ngender\this\ther\ngender\thim\ther\n").unwrap();
        assert!(lex.are_paired("she", "he"));
        assert!(lex.are_paired("her", "his"));
        assert!(lex.are_paired("her", "him"));
        assert!(!lex.are_paired("he", "her"));
        assert!(lex.is_symmetric());
        assert_eq!(DemographicLexicon::parse(&lex.to_text()).unwrap(), lex);
    }

    #[test]
    fn malformed_line_located() {
        assert!(matches!(
            DemographicLexicon::parse("gender\the\tshe\ngender he she\n"),
            Err(Error::Line { line: 2, .. })
        ));
        assert!(DemographicLexicon::parse("g\tx\tX\n").is_err());
    }
}
