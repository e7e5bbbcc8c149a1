//! Shared word tokenizer.
//!
//! Lowercases, splits on whitespace and strips leading/trailing ASCII
//! punctuation from each piece. Pieces that are pure punctuation vanish.

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation()))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_edges_only() {
        assert_eq!(tokenize("He's a doctor."), vec!["he's", "a", "doctor"]);
        assert_eq!(tokenize("  -- Hello,   WORLD!! "), vec!["hello", "world"]);
        assert!(tokenize("...").is_empty());
        assert!(tokenize("").is_empty());
    }
}
