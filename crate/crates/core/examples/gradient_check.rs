//! Compares the analytic gradients of the triplet loss, all the way through
//! cosine similarity and the toy encoder, against central finite differences.

use fairtrip::corpus::{BiasType, FilterScores, NegativeSource, Triplet};
use fairtrip::encoder::{ToyModel, Vocab};
use fairtrip::trainer::{batch_gradients, TrainConfig, TrainMode};

const EPS: f64 = 1e-5;

fn triplet(a: &str, p: &str, n: &str) -> Triplet {
    Triplet {
        id: a.into(),
        anchor: a.into(),
        positive: p.into(),
        negative: n.into(),
        bias_type: BiasType::Gender,
        negative_source: NegativeSource::Generated,
        negative_bias_type: None,
        filter_scores: FilterScores {
            attribute_ok: true,
            toxicity: 0.0,
            consistency: 1.0,
        },
    }
}

fn main() -> anyhow::Result<()> {
    let data = [
        triplet("he is a good pilot", "she is a good pilot", "only men can fly planes"),
        triplet("my mother cooked dinner", "my father cooked dinner", "women belong in the kitchen"),
    ];
    let batch: Vec<&Triplet> = data.iter().collect();
    let texts: Vec<&str> = data.iter().flat_map(|t| t.sentences()).collect();
    let vocab = Vocab::build(texts.iter().copied(), 1);
    let model = ToyModel::init(vocab, 8, 1);

    for mode in TrainMode::ALL {
        let cfg = TrainConfig {
            mode,
            ..TrainConfig::default()
        };
        let loss = |m: &ToyModel| -> f64 {
            let g = batch_gradients(m, &batch, &texts, &cfg).expect("finite model");
            g.contrastive_loss + cfg.loss.lambda * g.lm_loss.unwrap_or(0.0)
        };
        let grads = batch_gradients(&model, &batch, &texts, &cfg)?.total(cfg.loss.lambda);
        println!("{}", mode.as_str());
        for (block, (name, g)) in grads.blocks().iter().enumerate() {
            let mut worst: f64 = 0.0;
            for i in (0..g.len()).step_by(g.len() / 16 + 1) {
                let x = model.blocks()[block].1[i];
                let mut plus = model.clone();
                plus.blocks_mut()[block].1[i] = x + EPS;
                let mut minus = model.clone();
                minus.blocks_mut()[block].1[i] = x - EPS;
                let numeric = (loss(&plus) - loss(&minus)) / (2.0 * EPS);
                let rel = (g[i] - numeric).abs() / g[i].abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
            }
            println!("  {name:<16} worst relative error {worst:.2e}");
        }
    }
    Ok(())
}
