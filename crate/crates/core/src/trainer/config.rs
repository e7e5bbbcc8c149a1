use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamConfig;
use crate::encoder::{DEFAULT_DIM, DEFAULT_MIN_FREQ};
use crate::error::{read_file, Error, Result};
use crate::objectives::LossConfig;

/// Which contrastive objective is used and whether the LM loss is included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// Decoupled triplet loss plus λ · LM loss.
    TripletLm,
    /// Single-negative InfoNCE plus λ · LM loss.
    PairwiseLm,
    /// Decoupled triplet loss only; no LM term at all.
    TripletOnly,
}

impl TrainMode {
    pub const ALL: [TrainMode; 3] = [TrainMode::TripletLm, TrainMode::PairwiseLm, TrainMode::TripletOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            TrainMode::TripletLm => "triplet_lm",
            TrainMode::PairwiseLm => "pairwise_lm",
            TrainMode::TripletOnly => "triplet_only",
        }
    }

    pub fn uses_lm(self) -> bool {
        !matches!(self, TrainMode::TripletOnly)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LmTextSource {
    /// The three sentences of every triplet in the batch.
    TripletSentences,
    /// A separate corpus, consumed cyclically.
    ExternalCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossConfig,
    pub mode: TrainMode,
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub lm_text_source: LmTextSource,
    /// Global gradient-norm clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
    pub dim: usize,
    pub min_freq: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossConfig::default(),
            mode: TrainMode::TripletLm,
            adam: AdamConfig::default(),
            batch_size: 16,
            epochs: 10,
            seed: 0,
            lm_text_source: LmTextSource::TripletSentences,
            clip_norm: Some(5.0),
            dim: DEFAULT_DIM,
            min_freq: DEFAULT_MIN_FREQ,
        }
    }
}

/// Flat on-disk form; every key optional, unknown keys rejected.
#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FlatConfig {
    tau: Option<f64>,
    margin_pos: Option<f64>,
    margin_neg: Option<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    mode: Option<TrainMode>,
    learning_rate: Option<f64>,
    adam_beta1: Option<f64>,
    adam_beta2: Option<f64>,
    adam_eps: Option<f64>,
    batch_size: Option<usize>,
    epochs: Option<usize>,
    seed: Option<u64>,
    lm_text_source: Option<LmTextSource>,
    clip_norm: Option<f64>,
    dim: Option<usize>,
    min_freq: Option<usize>,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        let a = &self.adam;
        if !(a.learning_rate > 0.0 && a.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || a.eps <= 0.0 {
            return Err(Error::Config("adam betas must lie in [0, 1) and eps > 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.dim == 0 {
            return Err(Error::Config("dim must be >= 1".into()));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return Err(Error::Config("clip_norm must be positive (use 0 to disable)".into()));
            }
        }
        Ok(())
    }

    /// Parses flat `key = value` lines (TOML syntax). Missing keys keep defaults.
    /// `clip_norm = 0` disables clipping.
    pub fn parse(content: &str) -> Result<Self> {
        let flat: FlatConfig = toml::from_str(content).map_err(|e| Error::Config(e.to_string()))?;
        let mut c = TrainConfig::default();
        let l = &mut c.loss;
        l.tau = flat.tau.unwrap_or(l.tau);
        l.margin_pos = flat.margin_pos.unwrap_or(l.margin_pos);
        l.margin_neg = flat.margin_neg.unwrap_or(l.margin_neg);
        l.beta = flat.beta.unwrap_or(l.beta);
        l.lambda = flat.lambda.unwrap_or(l.lambda);
        c.mode = flat.mode.unwrap_or(c.mode);
        let a = &mut c.adam;
        a.learning_rate = flat.learning_rate.unwrap_or(a.learning_rate);
        a.beta1 = flat.adam_beta1.unwrap_or(a.beta1);
        a.beta2 = flat.adam_beta2.unwrap_or(a.beta2);
        a.eps = flat.adam_eps.unwrap_or(a.eps);
        c.batch_size = flat.batch_size.unwrap_or(c.batch_size);
        c.epochs = flat.epochs.unwrap_or(c.epochs);
        c.seed = flat.seed.unwrap_or(c.seed);
        c.lm_text_source = flat.lm_text_source.unwrap_or(c.lm_text_source);
        if let Some(clip) = flat.clip_norm {
            c.clip_norm = (clip != 0.0).then_some(clip);
        }
        c.dim = flat.dim.unwrap_or(c.dim);
        c.min_freq = flat.min_freq.unwrap_or(c.min_freq);
        c.validate()?;
        Ok(c)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_file(path)?)
    }

    /// Flat `key = value` rendering; `parse(to_flat_string())` is the identity.
    pub fn to_flat_string(&self) -> String {
        let flat = FlatConfig {
            tau: Some(self.loss.tau),
            margin_pos: Some(self.loss.margin_pos),
            margin_neg: Some(self.loss.margin_neg),
            beta: Some(self.loss.beta),
            lambda: Some(self.loss.lambda),
            mode: Some(self.mode),
            learning_rate: Some(self.adam.learning_rate),
            adam_beta1: Some(self.adam.beta1),
            adam_beta2: Some(self.adam.beta2),
            adam_eps: Some(self.adam.eps),
            batch_size: Some(self.batch_size),
            epochs: Some(self.epochs),
            seed: Some(self.seed),
            lm_text_source: Some(self.lm_text_source),
            clip_norm: Some(self.clip_norm.unwrap_or(0.0)),
            dim: Some(self.dim),
            min_freq: Some(self.min_freq),
        };
        toml::to_string(&flat).expect("flat config serializes")
    }
}
