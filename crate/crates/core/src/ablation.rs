//! The three-way training ablation: triplet + LM, pairwise InfoNCE + LM, and
//! triplet only, all fine-tuned from the same starting model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biaseval::{build_report, render_table, score_with_toy, BiasReport};
use crate::corpus::{EvalItem, Triplet};
use crate::encoder::ToyModel;
use crate::error::Result;
use crate::forge::{
    build_triplets, BlocklistScorer, FilterSet, ForgeConfig, ForgeStats, HashingEmbedder, ReplayProvider,
};
use crate::synth::World;
use crate::trainer::{
    build_vocab, pretrain_lm, train, LmTextSource, PretrainConfig, TrainConfig, TrainLog, TrainMode,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    /// Shared fine-tuning settings; `mode` is overridden per row.
    pub train: TrainConfig,
    pub pretrain: PretrainConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub mode: TrainMode,
    pub report: BiasReport,
    pub log: TrainLog,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationOutcome {
    /// The starting model (after pretraining, before fine-tuning).
    pub baseline: BiasReport,
    pub rows: Vec<AblationRow>,
}

impl AblationOutcome {
    pub fn row(&self, mode: TrainMode) -> &AblationRow {
        self.rows.iter().find(|r| r.mode == mode).expect("every mode is run")
    }

    pub fn table(&self) -> String {
        let mut all = vec![&self.baseline];
        all.extend(self.rows.iter().map(|r| &r.report));
        render_table(&all)
    }
}

fn report_for(name: &str, model: &ToyModel, items: &[EvalItem]) -> Result<BiasReport> {
    let scoring = score_with_toy(model, items);
    let mut report = build_report(name, &scoring.scored)?;
    report
        .warnings
        .extend(scoring.errors.iter().map(|e| format!("item `{}` not scored: {}", e.item_id, e.message)));
    Ok(report)
}

/// Builds a model over triplets plus `pretrain_corpus`, pretrains it on that
/// corpus (skipped when empty), then fine-tunes one copy per mode.
pub fn run_ablation(
    triplets: &[Triplet],
    eval_items: &[EvalItem],
    pretrain_corpus: &[String],
    lm_corpus: &[String],
    cfg: &AblationConfig,
) -> Result<AblationOutcome> {
    let vocab = build_vocab(triplets, pretrain_corpus, cfg.train.min_freq);
    let mut base = ToyModel::init(vocab, cfg.train.dim, cfg.train.seed);
    if !pretrain_corpus.is_empty() {
        pretrain_lm(&mut base, pretrain_corpus, &cfg.pretrain)?;
    }
    let baseline = report_for("pretrained", &base, eval_items)?;
    let rows = TrainMode::ALL
        .par_iter()
        .map(|&mode| {
            let tc = TrainConfig { mode, ..cfg.train };
            let out = train(triplets, lm_corpus, Some(base.clone()), &tc)?;
            Ok(AblationRow {
                mode,
                report: report_for(mode.as_str(), &out.model, eval_items)?,
                log: out.log,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationOutcome { baseline, rows })
}

/// The synthetic biased fixture the ablation is usually run on: a seeded
/// [`World`], forged into triplets with its simulated generator, then the
/// three-way comparison.
#[derive(Debug, Clone)]
pub struct SyntheticAblation {
    pub world: World,
    pub config: AblationConfig,
    /// Sentences with demographic-neutral subjects in the fine-tuning LM corpus.
    pub lm_neutral_size: usize,
    /// Sentences with group subjects and no group-profession association.
    pub lm_balanced_size: usize,
}

impl Default for SyntheticAblation {
    fn default() -> Self {
        let mut config = AblationConfig::default();
        config.train.adam.learning_rate = 1e-2;
        config.train.epochs = 40;
        // Sentences that differ in one token sit near cosine 0.99 under mean
        // pooling, so the positive margin has to be set on that scale.
        config.train.loss.margin_pos = 0.97;
        config.train.lm_text_source = LmTextSource::ExternalCorpus;
        SyntheticAblation {
            world: World::default(),
            config,
            lm_neutral_size: 2400,
            lm_balanced_size: 600,
        }
    }
}

/// Everything the synthetic ablation produced, including its inputs.
#[derive(Debug, Clone)]
pub struct SyntheticRun {
    pub triplets: Vec<Triplet>,
    pub forge_stats: ForgeStats,
    pub eval_items: Vec<EvalItem>,
    pub outcome: AblationOutcome,
}

impl SyntheticAblation {
    pub fn with_seed(seed: u64) -> Self {
        let mut s = Self::default();
        s.world.seed = seed;
        s
    }

    pub fn lm_corpus(&self) -> Vec<String> {
        let mut c = self.world.neutral_corpus(self.lm_neutral_size);
        c.extend(self.world.corpus_with_bias(0.5, self.lm_balanced_size));
        c
    }

    pub fn forge(&self) -> Result<(Vec<Triplet>, ForgeStats)> {
        let lexicon = self.world.lexicon();
        let scorer = BlocklistScorer::default();
        let embedder = HashingEmbedder::default();
        let filters = FilterSet {
            lexicon: &lexicon,
            scorer: &scorer,
            embedder: &embedder,
        };
        let provider = ReplayProvider::new(self.world.negatives());
        let forge_cfg = ForgeConfig {
            rng_seed: self.world.seed,
            ..ForgeConfig::default()
        };
        build_triplets(&self.world.pairs(), &provider, &filters, &forge_cfg)
    }

    pub fn run(&self) -> Result<SyntheticRun> {
        let (triplets, forge_stats) = self.forge()?;
        let eval_items = self.world.eval_items();
        let outcome = run_ablation(
            &triplets,
            &eval_items,
            &self.world.corpus(),
            &self.lm_corpus(),
            &self.config,
        )?;
        Ok(SyntheticRun {
            triplets,
            forge_stats,
            eval_items,
            outcome,
        })
    }
}
