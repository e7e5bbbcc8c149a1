//! Joint optimization of the contrastive objective and the LM loss with Adam.

mod adam;
mod config;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use std::path::Path;

use crate::corpus::{parse_jsonl, write_jsonl, Triplet};
use crate::encoder::{ModelGrads, ToyModel, Vocab};
use crate::error::{read_file, Error, Result};
use crate::objectives::{cosine, pairwise_infonce, triplet_loss, TripletSims};

pub use adam::{adam_step, adam_update, AdamConfig, AdamState};
pub use config::{LmTextSource, TrainConfig, TrainMode};

/// Per-epoch training summary. `mean_lm_loss` is `None` when the LM term is off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_triplet_loss: f64,
    pub mean_lm_loss: Option<f64>,
    pub mean_total_loss: f64,
    pub mean_s_ap: f64,
    pub mean_s_an: f64,
}

pub type TrainLog = Vec<EpochRecord>;

/// Writes a training log as `train_log.jsonl` (one record per line).
pub fn write_train_log(path: impl AsRef<Path>, log: &[EpochRecord]) -> Result<()> {
    write_jsonl(path, log)
}

pub fn read_train_log(path: impl AsRef<Path>) -> Result<TrainLog> {
    let content = read_file(path.as_ref())?;
    Ok(parse_jsonl(&content)?.into_iter().map(|(_, r)| r).collect())
}

/// Final parameters, the log, and one snapshot per epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ToyModel,
    pub log: TrainLog,
    /// Snapshot after each epoch, index `e` holds epoch `e + 1`.
    pub checkpoints: Vec<ToyModel>,
    /// 1-based epoch with the lowest mean total loss.
    pub best_epoch: usize,
}

impl TrainOutcome {
    pub fn best(&self) -> &ToyModel {
        &self.checkpoints[self.best_epoch - 1]
    }
}

/// Gradients of one batch, split by path.
#[derive(Debug, Clone)]
pub struct BatchGrads {
    pub contrastive: ModelGrads,
    /// Unweighted LM gradient; `None` when the mode has no LM term.
    pub lm: Option<ModelGrads>,
    pub contrastive_loss: f64,
    pub lm_loss: Option<f64>,
    pub sum_s_ap: f64,
    pub sum_s_an: f64,
}

impl BatchGrads {
    /// `contrastive + λ · lm`.
    pub fn total(&self, lambda: f64) -> ModelGrads {
        let mut g = self.contrastive.clone();
        if let Some(lm) = &self.lm {
            g.add_scaled(lm, lambda);
        }
        g
    }
}

/// Builds the vocabulary from every triplet sentence plus an LM corpus.
pub fn build_vocab(triplets: &[Triplet], corpus: &[String], min_freq: usize) -> Vocab {
    let texts = triplets
        .iter()
        .flat_map(|t| t.sentences())
        .chain(corpus.iter().map(String::as_str));
    Vocab::build(texts, min_freq)
}

/// Mean contrastive loss over `batch` and its gradient.
pub fn contrastive_gradients(
    model: &ToyModel,
    batch: &[&Triplet],
    mode: TrainMode,
    cfg: &TrainConfig,
) -> Result<(f64, ModelGrads, f64, f64)> {
    let mut g = model.zero_grads();
    let scale = 1.0 / batch.len() as f64;
    let (mut loss, mut sum_ap, mut sum_an) = (0.0, 0.0, 0.0);
    for t in batch {
        let a = model.encode(&t.anchor);
        let p = model.encode(&t.positive);
        let n = model.encode(&t.negative);
        let ap = cosine(&a.vector, &p.vector)?;
        let an = cosine(&a.vector, &n.vector)?;
        let sl = match mode {
            TrainMode::PairwiseLm => pairwise_infonce(ap.value, an.value, cfg.loss.tau),
            TrainMode::TripletLm | TrainMode::TripletOnly => triplet_loss(
                TripletSims {
                    s_ap: ap.value,
                    s_an: an.value,
                },
                &cfg.loss,
            ),
        };
        loss += sl.value;
        sum_ap += ap.value;
        sum_an += an.value;
        let da: Vec<f64> = ap
            .du
            .iter()
            .zip(&an.du)
            .map(|(x, y)| sl.d_s_ap * x + sl.d_s_an * y)
            .collect();
        let dp: Vec<f64> = ap.dv.iter().map(|x| sl.d_s_ap * x).collect();
        let dn: Vec<f64> = an.dv.iter().map(|x| sl.d_s_an * x).collect();
        model.encode_backward_into(&da, &a.cache, scale, &mut g)?;
        model.encode_backward_into(&dp, &p.cache, scale, &mut g)?;
        model.encode_backward_into(&dn, &n.cache, scale, &mut g)?;
    }
    Ok((loss * scale, g, sum_ap, sum_an))
}

/// Mean LM loss over `texts` and its gradient. Texts with no tokens are skipped.
pub fn lm_gradients(model: &ToyModel, texts: &[&str]) -> Result<(f64, ModelGrads)> {
    let seqs: Vec<Vec<usize>> = texts
        .iter()
        .map(|t| model.vocab.ids(t))
        .filter(|ids| !ids.is_empty())
        .collect();
    let mut g = model.zero_grads();
    if seqs.is_empty() {
        return Ok((0.0, g));
    }
    let scale = 1.0 / seqs.len() as f64;
    let mut loss = 0.0;
    for ids in &seqs {
        loss += model.lm_backward_into(ids, scale, &mut g)?;
    }
    Ok((loss * scale, g))
}

pub fn batch_gradients(
    model: &ToyModel,
    batch: &[&Triplet],
    lm_texts: &[&str],
    cfg: &TrainConfig,
) -> Result<BatchGrads> {
    let (closs, cg, sum_ap, sum_an) = contrastive_gradients(model, batch, cfg.mode, cfg)?;
    let (lm_loss, lm) = if cfg.mode.uses_lm() {
        let (l, g) = lm_gradients(model, lm_texts)?;
        (Some(l), Some(g))
    } else {
        (None, None)
    };
    Ok(BatchGrads {
        contrastive: cg,
        lm,
        contrastive_loss: closs,
        lm_loss,
        sum_s_ap: sum_ap,
        sum_s_an: sum_an,
    })
}

fn clip(g: &mut ModelGrads, max_norm: Option<f64>) {
    if let Some(max) = max_norm {
        let norm = g.global_norm();
        if norm > max {
            g.scale(max / norm);
        }
    }
}

/// Trains on `triplets` from `init` (or a fresh model over a vocabulary built
/// from the triplets and `lm_corpus`).
pub fn train(
    triplets: &[Triplet],
    lm_corpus: &[String],
    init: Option<ToyModel>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if triplets.is_empty() {
        return Err(Error::Config("training needs at least one triplet".into()));
    }
    if cfg.mode.uses_lm() && cfg.lm_text_source == LmTextSource::ExternalCorpus && lm_corpus.is_empty() {
        return Err(Error::Config("lm_text_source = external_corpus needs a corpus".into()));
    }
    let mut model = match init {
        Some(m) => m,
        None => ToyModel::init(build_vocab(triplets, lm_corpus, cfg.min_freq), cfg.dim, cfg.seed),
    };
    let mut state = AdamState::for_model(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..triplets.len()).collect();
    let mut step: u64 = 0;
    let mut corpus_cursor = 0usize;
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut checkpoints = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut sum_c, mut sum_ap, mut sum_an) = (0.0, 0.0, 0.0);
        let (mut sum_lm, mut n_batches) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Triplet> = chunk.iter().map(|&i| &triplets[i]).collect();
            let lm_texts: Vec<&str> = match cfg.lm_text_source {
                LmTextSource::TripletSentences => batch.iter().flat_map(|t| t.sentences()).collect(),
                LmTextSource::ExternalCorpus if lm_corpus.is_empty() => Vec::new(),
                LmTextSource::ExternalCorpus => (0..3 * batch.len())
                    .map(|k| lm_corpus[(corpus_cursor + k) % lm_corpus.len()].as_str())
                    .collect(),
            };
            if cfg.lm_text_source == LmTextSource::ExternalCorpus {
                corpus_cursor += lm_texts.len();
            }
            let bg = batch_gradients(&model, &batch, &lm_texts, cfg)?;
            sum_c += bg.contrastive_loss * batch.len() as f64;
            sum_ap += bg.sum_s_ap;
            sum_an += bg.sum_s_an;
            if let Some(l) = bg.lm_loss {
                sum_lm += l;
            }
            n_batches += 1;
            let mut g = bg.total(cfg.loss.lambda);
            clip(&mut g, cfg.clip_norm);
            step += 1;
            adam_step(&mut model, &g, &mut state, step, &cfg.adam)?;
        }
        let n = triplets.len() as f64;
        let mean_triplet_loss = sum_c / n;
        let mean_lm_loss = cfg.mode.uses_lm().then(|| sum_lm / n_batches as f64);
        log.push(EpochRecord {
            epoch,
            mean_triplet_loss,
            mean_lm_loss,
            mean_total_loss: mean_triplet_loss + cfg.loss.lambda * mean_lm_loss.unwrap_or(0.0),
            mean_s_ap: sum_ap / n,
            mean_s_an: sum_an / n,
        });
        checkpoints.push(model.clone());
    }
    let best_epoch = log
        .iter()
        .min_by(|a, b| a.mean_total_loss.total_cmp(&b.mean_total_loss))
        .map_or(0, |r| r.epoch);
    Ok(TrainOutcome {
        model,
        log,
        checkpoints,
        best_epoch,
    })
}

/// Settings for LM-only pretraining of a fresh toy model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub clip_norm: Option<f64>,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            epochs: 20,
            batch_size: 32,
            adam: AdamConfig {
                learning_rate: 1e-2,
                ..AdamConfig::default()
            },
            seed: 0,
            clip_norm: Some(5.0),
        }
    }
}

/// Next-token pretraining on a plain corpus. Returns mean LM loss per epoch.
pub fn pretrain_lm(model: &mut ToyModel, corpus: &[String], cfg: &PretrainConfig) -> Result<Vec<f64>> {
    if corpus.is_empty() {
        return Err(Error::Config("pretraining corpus is empty".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch_size must be >= 1".into()));
    }
    let mut state = AdamState::for_model(model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut step = 0u64;
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut sum, mut batches) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            let texts: Vec<&str> = chunk.iter().map(|&i| corpus[i].as_str()).collect();
            let (loss, mut g) = lm_gradients(model, &texts)?;
            clip(&mut g, cfg.clip_norm);
            step += 1;
            adam_step(model, &g, &mut state, step, &cfg.adam)?;
            sum += loss;
            batches += 1;
        }
        losses.push(sum / batches as f64);
    }
    Ok(losses)
}
