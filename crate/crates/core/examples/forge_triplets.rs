//! Builds training triplets from the shipped counterfactual pairs, replaying
//! recorded negative proposals, and prints what each filter removed.
//!
//! ```text
//! cargo run --example forge_triplets [seed]
//! ```

use fairtrip::corpus::{read_negatives, read_pairs, DemographicLexicon, NegativeSource};
use fairtrip::forge::{build_triplets, BlocklistScorer, FilterSet, ForgeConfig, HashingEmbedder, ReplayProvider};

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let pairs = read_pairs(data.join("pairs.csv"))?;
    let lexicon = DemographicLexicon::read(data.join("lexicon.txt"))?;
    let scorer = BlocklistScorer::read(data.join("blocklist.txt"))?;
    let provider = ReplayProvider::new(read_negatives(data.join("negatives.jsonl"))?);
    let embedder = HashingEmbedder::default();
    let filters = FilterSet {
        lexicon: &lexicon,
        scorer: &scorer,
        embedder: &embedder,
    };
    let cfg = ForgeConfig {
        rng_seed: seed,
        ..ForgeConfig::default()
    };
    let (triplets, stats) = build_triplets(&pairs, &provider, &filters, &cfg)?;

    println!("{stats:#?}");
    println!("conserved: {}", stats.is_conserved());
    for t in triplets.iter().take(4) {
        println!("\n[{}] {:?}", t.id, t.bias_type);
        println!("  anchor   {}", t.anchor);
        println!("  positive {}", t.positive);
        println!("  negative {}", t.negative);
    }
    if let Some(t) = triplets.iter().find(|t| t.negative_source == NegativeSource::CrossCategory) {
        println!(
            "\nback-off example [{}]: {:?} anchor, negative borrowed from {:?}:\n  {}",
            t.id,
            t.bias_type,
            t.negative_bias_type.expect("set on back-off"),
            t.negative
        );
    }
    Ok(())
}
