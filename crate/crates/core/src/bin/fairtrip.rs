use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use fairtrip::ablation::{run_ablation, AblationConfig, SyntheticAblation};
use fairtrip::biaseval::{build_report, render_table, score_with_toy, scored_from_rows, to_score_rows, BiasReport};
use fairtrip::corpus::{
    read_eval_items, read_embeddings, read_negatives, read_pairs, read_scores, read_triplets, write_scores,
    write_triplets, DemographicLexicon,
};
use fairtrip::encoder::ToyModel;
use fairtrip::forge::{
    build_triplets, BlocklistScorer, Embedder, FilterSet, ForgeConfig, HashingEmbedder, NegativeProvider,
    PrecomputedEmbedder, ReplayProvider, TemplateProvider,
};
use fairtrip::manifest::RunManifest;
use fairtrip::trainer::{train, write_train_log, PretrainConfig, TrainConfig, TrainMode};

#[derive(Parser)]
#[command(name = "fairtrip", version, about = "Counterfactual triplets, debiasing training and stereotype evaluation")]
struct Cli {
    /// Print a machine-readable JSON summary on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel stages (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build filtered (anchor, positive, negative) triplets from counterfactual pairs.
    BuildTriplets(BuildArgs),
    /// Train the toy encoder on triplets.
    Train(TrainArgs),
    /// Score an evaluation set and compute SS / LM Score / ICAT.
    Evaluate(EvalArgs),
    /// Run the three training modes side by side.
    Ablate(AblateArgs),
    /// Render saved reports as one table.
    Report(ReportArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Counterfactual pairs CSV.
    #[arg(long)]
    pairs: PathBuf,
    /// Demographic lexicon (tab-separated `category term counterpart`).
    #[arg(long)]
    lexicon: PathBuf,
    /// Recorded negative proposals (JSONL); without it the template generator is used.
    #[arg(long)]
    negatives: Option<PathBuf>,
    /// Toxicity blocklist, one term per line.
    #[arg(long)]
    blocklist: Option<PathBuf>,
    /// Precomputed sentence embeddings for the consistency filter.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Seed for negative sourcing and back-off.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drop triplets whose toxicity score exceeds this (default 0.5).
    #[arg(long)]
    toxicity_threshold: Option<f64>,
    /// Drop negatives whose similarity to the anchor is below this (default 0.85).
    #[arg(long)]
    consistency_threshold: Option<f64>,
    /// Drop pairs without a usable negative instead of borrowing from another category.
    #[arg(long)]
    no_backoff: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    triplets: PathBuf,
    /// Flat TOML training config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Plain-text LM corpus, one sentence per line.
    #[arg(long)]
    lm_corpus: Option<PathBuf>,
    /// Start from this checkpoint instead of a fresh model.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Overrides `mode` from the config.
    #[arg(long)]
    mode: Option<String>,
    /// Overrides `epochs` from the config.
    #[arg(long)]
    epochs: Option<usize>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    eval_items: PathBuf,
    /// Toy model checkpoint to score with.
    #[arg(long, required_unless_present = "scores", conflicts_with = "scores")]
    checkpoint: Option<PathBuf>,
    /// Externally produced scores; no checkpoint is loaded.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Fail with exit code 4 unless the checkpoint's vocabulary has this hash.
    #[arg(long, requires = "checkpoint")]
    expect_vocab_hash: Option<String>,
    /// Model name shown in the report.
    #[arg(long, default_value = "model")]
    name: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateArgs {
    /// Run on the built-in seeded synthetic world instead of files.
    #[arg(long, conflicts_with_all = ["triplets", "eval_items"])]
    synthetic: bool,
    /// World seed for `--synthetic`.
    #[arg(long, default_value_t = 7, requires = "synthetic")]
    world_seed: u64,
    #[arg(long, required_unless_present = "synthetic")]
    triplets: Option<PathBuf>,
    #[arg(long, required_unless_present = "synthetic")]
    eval_items: Option<PathBuf>,
    /// Corpus to LM-pretrain the shared starting model on.
    #[arg(long)]
    pretrain_corpus: Option<PathBuf>,
    /// Corpus for the LM term when the config selects `external_corpus`.
    #[arg(long)]
    lm_corpus: Option<PathBuf>,
    /// Flat TOML training config shared by the three modes.
    #[arg(long)]
    config: Option<PathBuf>,
    /// LM pretraining epochs before fine-tuning; 0 skips pretraining.
    #[arg(long)]
    pretrain_epochs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON files written by `evaluate` or `ablate`.
    #[arg(long, num_args = 1.., required = true)]
    reports: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// A failure with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<fairtrip::Error>() {
            Some(fairtrip::Error::VocabMismatch { .. }) => 4,
            Some(e) if e.is_schema() => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

impl From<fairtrip::Error> for Failure {
    fn from(e: fairtrip::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn empty_output(msg: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        error: anyhow::anyhow!(msg.into()),
    }
}

type Outcome = Result<serde_json::Value, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = match &cli.command {
        Command::BuildTriplets(a) => build(a, args),
        Command::Train(a) => train_cmd(a, args),
        Command::Evaluate(a) => evaluate(a, args),
        Command::Ablate(a) => ablate(a, args),
        Command::Report(a) => report(a, args),
    };
    match result {
        Ok(mut summary) => {
            if cli.json {
                if let Some(obj) = summary.as_object_mut() {
                    obj.remove("text");
                }
                println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            } else if let Some(text) = summary.get("text").and_then(|t| t.as_str()) {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn out_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating output directory {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let s = serde_json::to_string_pretty(value)?;
    std::fs::write(path, s + "\n").with_context(|| format!("writing {}", path.display()))
}

fn read_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    let content = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

fn build(a: &BuildArgs, args: Vec<String>) -> Outcome {
    let mut cfg = ForgeConfig {
        rng_seed: a.seed,
        backoff_enabled: !a.no_backoff,
        ..ForgeConfig::default()
    };
    if let Some(t) = a.toxicity_threshold {
        cfg.toxicity_threshold = t;
    }
    if let Some(t) = a.consistency_threshold {
        cfg.consistency_threshold = t;
    }
    cfg.validate()?;
    let mut manifest = RunManifest::new("build-triplets", args, a.seed, &cfg)?;

    let pairs = read_pairs(&a.pairs)?;
    manifest.add_input("pairs", &a.pairs)?;
    let lexicon = DemographicLexicon::read(&a.lexicon)?;
    manifest.add_input("lexicon", &a.lexicon)?;
    let scorer = match &a.blocklist {
        Some(p) => {
            manifest.add_input("blocklist", p)?;
            BlocklistScorer::read(p)?
        }
        None => BlocklistScorer::default(),
    };
    let embedder: Box<dyn Embedder> = match &a.embeddings {
        Some(p) => {
            manifest.add_input("embeddings", p)?;
            Box::new(PrecomputedEmbedder::new(read_embeddings(p)?))
        }
        None => Box::new(HashingEmbedder::default()),
    };
    let provider: Box<dyn NegativeProvider> = match &a.negatives {
        Some(p) => {
            manifest.add_input("negatives", p)?;
            Box::new(ReplayProvider::new(read_negatives(p)?))
        }
        None => Box::new(TemplateProvider::default()),
    };
    let filters = FilterSet {
        lexicon: &lexicon,
        scorer: &scorer,
        embedder: embedder.as_ref(),
    };
    let (triplets, stats) = build_triplets(&pairs, provider.as_ref(), &filters, &cfg)?;

    out_dir(&a.out)?;
    let triplets_path = a.out.join("triplets.jsonl");
    let stats_path = a.out.join("forge_stats.json");
    write_triplets(&triplets_path, &triplets)?;
    write_json(&stats_path, &stats)?;
    manifest.add_output("triplets", &triplets_path)?;
    manifest.add_output("forge_stats", &stats_path)?;
    manifest.write(&a.out)?;
    if triplets.is_empty() {
        return Err(empty_output(format!(
            "every pair was dropped ({} input): {:?}",
            stats.input, stats
        )));
    }
    Ok(json!({
        "stats": stats,
        "triplets": triplets_path,
        "text": format!("{stats:?}\nwrote {} triplets to {}\n", triplets.len(), triplets_path.display()),
    }))
}

fn load_train_config(path: Option<&Path>) -> anyhow::Result<TrainConfig> {
    Ok(match path {
        Some(p) => TrainConfig::read(p)?,
        None => TrainConfig::default(),
    })
}

fn train_cmd(a: &TrainArgs, args: Vec<String>) -> Outcome {
    let mut cfg = load_train_config(a.config.as_deref())?;
    if let Some(m) = &a.mode {
        cfg.mode = TrainMode::ALL
            .into_iter()
            .find(|x| x.as_str() == m)
            .ok_or_else(|| fairtrip::Error::Config(format!("unknown mode `{m}`")))?;
    }
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let mut manifest = RunManifest::new("train", args, cfg.seed, &cfg)?;
    let triplets = read_triplets(&a.triplets)?;
    manifest.add_input("triplets", &a.triplets)?;
    if let Some(p) = &a.config {
        manifest.add_input("config", p)?;
    }
    let corpus = match &a.lm_corpus {
        Some(p) => {
            manifest.add_input("lm_corpus", p)?;
            read_lines(p)?
        }
        None => Vec::new(),
    };
    let init = match &a.init {
        Some(p) => {
            manifest.add_input("init_checkpoint", p)?;
            Some(ToyModel::load(p)?)
        }
        None => None,
    };
    let out = train(&triplets, &corpus, init, &cfg)?;

    out_dir(&a.out)?;
    let ckpt_dir = a.out.join("checkpoints");
    out_dir(&ckpt_dir)?;
    for (i, m) in out.checkpoints.iter().enumerate() {
        m.save(ckpt_dir.join(format!("epoch_{:03}.ckpt", i + 1)))?;
    }
    let model_path = a.out.join("model.ckpt");
    let best_path = a.out.join("best.ckpt");
    let log_path = a.out.join("train_log.jsonl");
    let cfg_path = a.out.join("train_config.toml");
    out.model.save(&model_path)?;
    out.best().save(&best_path)?;
    write_train_log(&log_path, &out.log)?;
    std::fs::write(&cfg_path, cfg.to_flat_string()).context("writing train_config.toml")?;
    for (role, p) in [
        ("model", &model_path),
        ("best", &best_path),
        ("train_log", &log_path),
        ("train_config", &cfg_path),
    ] {
        manifest.add_output(role, p)?;
    }
    manifest.write(&a.out)?;

    let last = out.log.last().expect("at least one epoch");
    Ok(json!({
        "vocab_hash": out.model.vocab.hash(),
        "best_epoch": out.best_epoch,
        "final": last,
        "model": model_path,
        "text": format!(
            "trained {} epochs ({}): total loss {:.4}, s_ap {:.3}, s_an {:.3}\nvocab hash {}\nwrote {}\n",
            out.log.len(),
            cfg.mode.as_str(),
            last.mean_total_loss,
            last.mean_s_ap,
            last.mean_s_an,
            out.model.vocab.hash(),
            model_path.display()
        ),
    }))
}

fn evaluate(a: &EvalArgs, args: Vec<String>) -> Outcome {
    let mut manifest = RunManifest::new("evaluate", args, 0, &json!({ "name": a.name }))?;
    let items = read_eval_items(&a.eval_items)?;
    manifest.add_input("eval_items", &a.eval_items)?;
    let (scored, mut warnings) = match (&a.scores, &a.checkpoint) {
        (Some(p), _) => {
            manifest.add_input("scores", p)?;
            let rows = read_scores(p, Some(&items))?;
            (scored_from_rows(&items, &rows)?, Vec::new())
        }
        (None, Some(p)) => {
            let model = ToyModel::load(p)?;
            manifest.add_input("checkpoint", p)?;
            if let Some(expected) = &a.expect_vocab_hash {
                let found = model.vocab.hash();
                if &found != expected {
                    return Err(fairtrip::Error::VocabMismatch {
                        expected: expected.clone(),
                        found,
                    }
                    .into());
                }
            }
            let scoring = score_with_toy(&model, &items);
            let warnings = scoring
                .errors
                .iter()
                .map(|e| format!("item `{}` not scored: {}", e.item_id, e.message))
                .collect();
            (scoring.scored, warnings)
        }
        (None, None) => unreachable!("clap requires --checkpoint or --scores"),
    };
    if scored.is_empty() {
        return Err(empty_output("no evaluation item could be scored"));
    }
    let mut report = build_report(&a.name, &scored)?;
    report.warnings.append(&mut warnings);

    let mut text = render_table(&[&report]);
    for w in &report.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    out_dir(&a.out)?;
    let report_path = a.out.join("bias_report.json");
    let table_path = a.out.join("bias_report.txt");
    report.save(&report_path)?;
    std::fs::write(&table_path, &text).context("writing bias_report.txt")?;
    manifest.add_output("report", &report_path)?;
    manifest.add_output("table", &table_path)?;
    if a.scores.is_none() {
        let scores_path = a.out.join("scores.jsonl");
        write_scores(&scores_path, &to_score_rows(&scored))?;
        manifest.add_output("scores", &scores_path)?;
    }
    manifest.write(&a.out)?;
    Ok(json!({ "report": report, "text": text }))
}

fn ablate(a: &AblateArgs, args: Vec<String>) -> Outcome {
    let (outcome, manifest) = if a.synthetic {
        let mut synth = SyntheticAblation::with_seed(a.world_seed);
        if let Some(p) = &a.config {
            synth.config.train = TrainConfig::read(p)?;
        }
        if let Some(e) = a.pretrain_epochs {
            synth.config.pretrain.epochs = e;
        }
        let manifest = RunManifest::new(
            "ablate",
            args,
            synth.config.train.seed,
            &json!({ "world_seed": a.world_seed, "ablation": synth.config }),
        )?;
        (synth.run()?.outcome, manifest)
    } else {
        let (triplets_path, items_path) = (a.triplets.as_ref().unwrap(), a.eval_items.as_ref().unwrap());
        let mut cfg = AblationConfig {
            train: load_train_config(a.config.as_deref())?,
            pretrain: PretrainConfig::default(),
        };
        cfg.pretrain.seed = cfg.train.seed;
        if let Some(e) = a.pretrain_epochs {
            cfg.pretrain.epochs = e;
        }
        let mut manifest = RunManifest::new("ablate", args, cfg.train.seed, &cfg)?;
        let triplets = read_triplets(triplets_path)?;
        manifest.add_input("triplets", triplets_path)?;
        let items = read_eval_items(items_path)?;
        manifest.add_input("eval_items", items_path)?;
        let mut corpus_for = |p: &Option<PathBuf>, role: &str| -> anyhow::Result<Vec<String>> {
            match p {
                Some(p) => {
                    manifest.add_input(role, p)?;
                    read_lines(p)
                }
                None => Ok(Vec::new()),
            }
        };
        let pretrain = corpus_for(&a.pretrain_corpus, "pretrain_corpus")?;
        let lm = corpus_for(&a.lm_corpus, "lm_corpus")?;
        (run_ablation(&triplets, &items, &pretrain, &lm, &cfg)?, manifest)
    };
    let mut manifest = manifest;

    out_dir(&a.out)?;
    let ablation_path = a.out.join("ablation.json");
    let table_path = a.out.join("table.txt");
    write_json(&ablation_path, &outcome)?;
    std::fs::write(&table_path, outcome.table()).context("writing table.txt")?;
    manifest.add_output("ablation", &ablation_path)?;
    manifest.add_output("table", &table_path)?;
    for (name, report) in std::iter::once(("pretrained", &outcome.baseline))
        .chain(outcome.rows.iter().map(|r| (r.mode.as_str(), &r.report)))
    {
        let p = a.out.join(format!("report_{name}.json"));
        report.save(&p)?;
        manifest.add_output(&format!("report_{name}"), &p)?;
    }
    manifest.write(&a.out)?;
    let rows: Vec<_> = outcome
        .rows
        .iter()
        .map(|r| {
            json!({
                "mode": r.mode,
                "ss": r.report.overall.ss,
                "lm": r.report.overall.lm,
                "icat": r.report.overall.icat,
            })
        })
        .collect();
    Ok(json!({ "rows": rows, "baseline": outcome.baseline.overall, "text": outcome.table() }))
}

fn report(a: &ReportArgs, args: Vec<String>) -> Outcome {
    let reports = a
        .reports
        .iter()
        .map(BiasReport::load)
        .collect::<fairtrip::Result<Vec<_>>>()?;
    let refs: Vec<&BiasReport> = reports.iter().collect();
    let table = render_table(&refs);
    let mut manifest = RunManifest::new("report", args, 0, &json!({}))?;
    for p in &a.reports {
        manifest.add_input("report", p)?;
    }
    out_dir(&a.out)?;
    let table_path = a.out.join("table.txt");
    std::fs::write(&table_path, &table).context("writing table.txt")?;
    manifest.add_output("table", &table_path)?;
    manifest.write(&a.out)?;
    Ok(json!({ "reports": reports, "text": table }))
}
