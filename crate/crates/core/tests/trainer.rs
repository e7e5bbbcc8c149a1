mod common;

use common::data;
use fairtrip::corpus::read_triplets;
use fairtrip::synth::separable_triplets;
use fairtrip::trainer::{
    adam_update, read_train_log, train, write_train_log, AdamConfig, LmTextSource, TrainConfig, TrainMode,
};
use fairtrip::Error;

fn fixture_config() -> TrainConfig {
    TrainConfig {
        mode: TrainMode::TripletOnly,
        epochs: 5,
        ..TrainConfig::default()
    }
}

#[test]
fn same_inputs_give_bit_identical_checkpoints() {
    let triplets = separable_triplets(64, 3);
    for mode in TrainMode::ALL {
        let cfg = TrainConfig { mode, epochs: 4, ..TrainConfig::default() };
        let a = train(&triplets, &[], None, &cfg).unwrap();
        let b = train(&triplets, &[], None, &cfg).unwrap();
        assert_eq!(a.model.to_checkpoint_string(), b.model.to_checkpoint_string(), "{mode:?}");
        assert_eq!(a.log, b.log);
    }
}

#[test]
fn different_seeds_differ() {
    let triplets = separable_triplets(32, 3);
    let a = train(&triplets, &[], None, &TrainConfig { epochs: 2, ..TrainConfig::default() }).unwrap();
    let b = train(&triplets, &[], None, &TrainConfig { epochs: 2, seed: 1, ..TrainConfig::default() }).unwrap();
    assert_ne!(a.model, b.model);
}

#[test]
fn zero_lambda_matches_triplet_only() {
    let triplets = separable_triplets(48, 9);
    let mut with_lm = TrainConfig { epochs: 3, ..TrainConfig::default() };
    with_lm.loss.lambda = 0.0;
    let only = TrainConfig { mode: TrainMode::TripletOnly, ..with_lm };
    let a = train(&triplets, &[], None, &with_lm).unwrap();
    let b = train(&triplets, &[], None, &only).unwrap();
    assert_eq!(a.model, b.model);
    assert!(b.log.iter().all(|r| r.mean_lm_loss.is_none()));
    assert!(a.log.iter().all(|r| r.mean_lm_loss.is_some()));
}

#[test]
fn separable_fixture_opens_a_similarity_gap() {
    let triplets = separable_triplets(96, 1);
    let cfg = TrainConfig { mode: TrainMode::TripletOnly, epochs: 10, ..TrainConfig::default() };
    let out = train(&triplets, &[], None, &cfg).unwrap();
    let last = out.log.last().unwrap();
    assert!(last.mean_s_ap - last.mean_s_an >= 0.3, "{last:?}");
}

#[test]
fn eight_triplet_fixture_matches_frozen_log() {
    let triplets = read_triplets(data("train_fixture.jsonl")).unwrap();
    let frozen = read_train_log(data("train_fixture_log.jsonl")).unwrap();
    let out = train(&triplets, &[], None, &fixture_config()).unwrap();
    assert_eq!(out.log.len(), frozen.len());
    for (got, want) in out.log.iter().zip(&frozen) {
        assert_eq!(got.epoch, want.epoch);
        assert!((got.mean_s_ap - want.mean_s_ap).abs() < 1e-9, "{got:?}");
        assert!((got.mean_s_an - want.mean_s_an).abs() < 1e-9, "{got:?}");
        assert_eq!(got.mean_lm_loss, None);
    }
    // The repulsion side moves monotonically. The attraction side dips in
    // the middle epochs on this fixture but ends higher than it started.
    assert!(out.log.windows(2).all(|w| w[1].mean_s_an < w[0].mean_s_an));
    assert!(out.log[4].mean_s_ap > out.log[0].mean_s_ap);
}

#[test]
fn log_and_best_checkpoint() {
    let triplets = separable_triplets(32, 2);
    let out = train(&triplets, &[], None, &TrainConfig { epochs: 3, ..TrainConfig::default() }).unwrap();
    assert_eq!(out.checkpoints.len(), 3);
    assert_eq!(out.checkpoints[2], out.model);
    let best = out
        .log
        .iter()
        .min_by(|a, b| a.mean_total_loss.total_cmp(&b.mean_total_loss))
        .unwrap();
    assert_eq!(out.best_epoch, best.epoch);
    assert_eq!(out.best(), &out.checkpoints[best.epoch - 1]);
    for r in &out.log {
        let lm = r.mean_lm_loss.unwrap();
        assert!((r.mean_total_loss - (r.mean_triplet_loss + lm)).abs() < 1e-12);
    }
    let dir = tempfile::tempdir().unwrap();
    write_train_log(dir.path().join("log.jsonl"), &out.log).unwrap();
    assert_eq!(read_train_log(dir.path().join("log.jsonl")).unwrap(), out.log);
}

#[test]
fn external_corpus_is_required_when_selected() {
    let triplets = separable_triplets(8, 2);
    let cfg = TrainConfig { lm_text_source: LmTextSource::ExternalCorpus, ..TrainConfig::default() };
    assert!(matches!(train(&triplets, &[], None, &cfg), Err(Error::Config(_))));
    assert!(matches!(train(&[], &[], None, &TrainConfig::default()), Err(Error::Config(_))));
    let corpus = vec!["he likes red bicycles".to_string(), "she sells old clocks".to_string()];
    let out = train(&triplets, &corpus, None, &TrainConfig { epochs: 1, ..cfg }).unwrap();
    assert!(out.log[0].mean_lm_loss.unwrap() > 0.0);
}

#[test]
fn adam_matches_reference_values() {
    // Independent scalar reference: p = 1, lr = 0.1, gradients 0.5, -0.25, 2.0
    let cfg = AdamConfig { learning_rate: 0.1, ..AdamConfig::default() };
    let expected = [0.900000002, 0.8733662987078463, 0.8063015345291531];
    let mut p = [1.0];
    let (mut m, mut v) = ([0.0], [0.0]);
    for (t, (g, want)) in [0.5, -0.25, 2.0].into_iter().zip(expected).enumerate() {
        adam_update(&mut p, &[g], &mut m, &mut v, t as u64 + 1, &cfg);
        assert!((p[0] - want).abs() < 1e-15, "step {}: {} vs {want}", t + 1, p[0]);
    }
}
