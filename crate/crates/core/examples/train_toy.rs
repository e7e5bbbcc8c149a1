//! Trains the toy encoder on a separable triplet set in each mode and prints
//! the per-epoch log.
//!
//! ```text
//! cargo run --release --example train_toy [epochs]
//! ```

use fairtrip::synth::separable_triplets;
use fairtrip::trainer::{train, TrainConfig, TrainMode};

fn main() -> anyhow::Result<()> {
    let epochs = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(8);
    let triplets = separable_triplets(128, 0);
    for mode in TrainMode::ALL {
        let cfg = TrainConfig {
            mode,
            epochs,
            ..TrainConfig::default()
        };
        let out = train(&triplets, &[], None, &cfg)?;
        println!("{} (vocab {}, best epoch {})", mode.as_str(), out.model.vocab_size(), out.best_epoch);
        for r in &out.log {
            let lm = r.mean_lm_loss.map_or("-".to_string(), |l| format!("{l:.3}"));
            println!(
                "  epoch {:>2}  contrastive {:.4}  lm {:>6}  s_ap {:.3}  s_an {:+.3}",
                r.epoch, r.mean_triplet_loss, lm, r.mean_s_ap, r.mean_s_an
            );
        }
    }
    Ok(())
}
