#![allow(dead_code)]

use std::path::PathBuf;

use fairtrip::biaseval::{compute_lm_score, compute_ss, OptionScores, ScoredItem};
use fairtrip::corpus::{BiasType, Category, FilterScores, NegativeSource, Triplet};
use fairtrip::encoder::{ToyModel, Vocab};
use fairtrip::objectives::{cosine, pairwise_infonce, triplet_loss, LossConfig, SimLoss, TripletSims};
use fairtrip::trainer::{batch_gradients, TrainConfig, TrainMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_EPS: f64 = 1e-5;
pub const GRAD_TOL: f64 = 1e-4;
/// Denominator floor for relative error. Below it both gradients are
/// numerically zero and the comparison is effectively absolute.
pub const REL_FLOOR: f64 = 1e-6;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

pub fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    (f(x + FD_EPS) - f(x - FD_EPS)) / (2.0 * FD_EPS)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GradCheck {
    pub probes: usize,
    pub worst: f64,
}

impl GradCheck {
    pub fn record(&mut self, analytic: f64, numeric: f64) {
        self.probes += 1;
        self.worst = self.worst.max(rel_err(analytic, numeric));
    }

    pub fn merge(&mut self, other: GradCheck) {
        self.probes += other.probes;
        self.worst = self.worst.max(other.worst);
    }

    pub fn passes(&self, min_probes: usize) -> bool {
        self.probes >= min_probes && self.worst <= GRAD_TOL
    }
}

fn random_loss_config(rng: &mut ChaCha8Rng) -> LossConfig {
    LossConfig {
        tau: rng.gen_range(0.05..1.0),
        margin_pos: rng.gen_range(-0.5..0.9),
        margin_neg: rng.gen_range(-0.5..0.9),
        beta: rng.gen_range(0.1..2.0),
        lambda: 1.0,
    }
}

/// dL/ds_ap and dL/ds_an of both objectives at random points.
pub fn similarity_partials(n: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check = GradCheck::default();
    for k in 0..n {
        let s_ap = rng.gen_range(-1.0..1.0);
        let s_an = rng.gen_range(-1.0..1.0);
        let cfg = if k % 4 == 0 { LossConfig::default() } else { random_loss_config(&mut rng) };
        let l = triplet_loss(TripletSims { s_ap, s_an }, &cfg);
        check.record(l.d_s_ap, central_diff(|x| triplet_loss(TripletSims { s_ap: x, s_an }, &cfg).value, s_ap));
        check.record(l.d_s_an, central_diff(|x| triplet_loss(TripletSims { s_ap, s_an: x }, &cfg).value, s_an));
        let p = pairwise_infonce(s_ap, s_an, cfg.tau);
        check.record(p.d_s_ap, central_diff(|x| pairwise_infonce(x, s_an, cfg.tau).value, s_ap));
        check.record(p.d_s_an, central_diff(|x| pairwise_infonce(s_ap, x, cfg.tau).value, s_an));
    }
    check
}

/// Cosine gradients with respect to every coordinate of both operands.
pub fn cosine_partials(n: usize, dim: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check = GradCheck::default();
    for _ in 0..n {
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = cosine(&u, &v).unwrap();
        for i in 0..dim {
            let fu = |x: f64| {
                let mut w = u.clone();
                w[i] = x;
                cosine(&w, &v).unwrap().value
            };
            check.record(c.du[i], central_diff(fu, u[i]));
            let fv = |x: f64| {
                let mut w = v.clone();
                w[i] = x;
                cosine(&u, &w).unwrap().value
            };
            check.record(c.dv[i], central_diff(fv, v[i]));
        }
    }
    check
}

pub fn small_triplets() -> Vec<Triplet> {
    let t = |id: &str, a: &str, p: &str, n: &str| Triplet {
        id: id.into(),
        anchor: a.into(),
        positive: p.into(),
        negative: n.into(),
        bias_type: BiasType::Gender,
        negative_source: NegativeSource::Generated,
        negative_bias_type: None,
        filter_scores: FilterScores {
            attribute_ok: true,
            toxicity: 0.0,
            consistency: 0.9,
        },
    };
    vec![
        t("g1", "he is a good engineer", "she is a good engineer", "men are better engineers"),
        t("g2", "my father fixed the car", "my mother fixed the car", "only men can fix cars"),
        t("g3", "the nurse said she was tired", "the nurse said he was tired", "nurses are always women"),
    ]
}

pub fn small_model(triplets: &[Triplet], dim: usize, seed: u64) -> ToyModel {
    let vocab = Vocab::build(triplets.iter().flat_map(|t| t.sentences()), 1);
    let mut m = ToyModel::init(vocab, dim, seed);
    // nonzero biases so their gradients are exercised too
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    m.encoder.bias.iter_mut().for_each(|b| *b = rng.gen_range(-0.2..0.2));
    m.head.bias.iter_mut().for_each(|b| *b = rng.gen_range(-0.2..0.2));
    m
}

/// Total batch loss `contrastive + λ · lm` evaluated from scratch.
pub fn batch_loss(model: &ToyModel, batch: &[&Triplet], lm_texts: &[&str], cfg: &TrainConfig) -> f64 {
    let g = batch_gradients(model, batch, lm_texts, cfg).unwrap();
    g.contrastive_loss + cfg.loss.lambda * g.lm_loss.unwrap_or(0.0)
}

/// Full parameter gradients through loss, cosine, encoder and LM head,
/// probed at random coordinates of every parameter block.
pub fn end_to_end(probes_per_block: usize, seed: u64) -> GradCheck {
    let triplets = small_triplets();
    let batch: Vec<&Triplet> = triplets.iter().collect();
    let lm_texts: Vec<&str> = triplets.iter().flat_map(|t| t.sentences()).collect();
    let mut check = GradCheck::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (k, mode) in TrainMode::ALL.into_iter().enumerate() {
        let model = small_model(&triplets, 6, seed + k as u64);
        let cfg = TrainConfig {
            mode,
            loss: LossConfig {
                tau: 0.2,
                lambda: 0.7,
                ..LossConfig::default()
            },
            ..TrainConfig::default()
        };
        let bg = batch_gradients(&model, &batch, &lm_texts, &cfg).unwrap();
        let total = bg.total(cfg.loss.lambda);
        for (block, (_, g)) in total.blocks().iter().enumerate() {
            for _ in 0..probes_per_block {
                let i = rng.gen_range(0..g.len());
                let f = |x: f64| {
                    let mut m = model.clone();
                    m.blocks_mut()[block].1[i] = x;
                    batch_loss(&m, &batch, &lm_texts, &cfg)
                };
                let x0 = model.blocks()[block].1[i];
                check.record(g[i], central_diff(f, x0));
            }
        }
    }
    check
}

/// LM head gradients for single sentences.
pub fn lm_partials(probes_per_block: usize, seed: u64) -> GradCheck {
    let triplets = small_triplets();
    let model = small_model(&triplets, 5, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check = GradCheck::default();
    for text in ["he is a good engineer", "nurses are always women", "my mother fixed the car"] {
        let (_, g) = model.lm_loss_and_grads(text).unwrap();
        for (block, (_, gb)) in g.blocks().iter().enumerate() {
            for _ in 0..probes_per_block {
                let i = rng.gen_range(0..gb.len());
                let f = |x: f64| {
                    let mut m = model.clone();
                    m.blocks_mut()[block].1[i] = x;
                    m.lm_loss(text).unwrap()
                };
                check.record(gb[i], central_diff(f, model.blocks()[block].1[i]));
            }
        }
    }
    check
}

pub fn grid() -> Vec<f64> {
    (0..21).map(|i| -1.0 + 0.1 * i as f64).collect()
}

/// Whether `d/ds_ap` is bit-identical across `s_an` and `d/ds_an` across `s_ap`.
pub fn is_decoupled(loss: impl Fn(f64, f64) -> SimLoss) -> bool {
    let g = grid();
    let ap_ok = g.iter().all(|&ap| {
        let first = loss(ap, g[0]).d_s_ap.to_bits();
        g.iter().all(|&an| loss(ap, an).d_s_ap.to_bits() == first)
    });
    let an_ok = g.iter().all(|&an| {
        let first = loss(g[0], an).d_s_an.to_bits();
        g.iter().all(|&ap| loss(ap, an).d_s_an.to_bits() == first)
    });
    ap_ok && an_ok
}

pub fn scored(category: Category, s: f64, a: f64, u: f64, id: usize) -> ScoredItem {
    ScoredItem {
        item_id: format!("i{id}"),
        category,
        scores: OptionScores {
            stereotype: s,
            anti_stereotype: a,
            unrelated: u,
        },
    }
}

/// Label swap maps SS to 100 - SS and leaves LM alone; checked per category and pooled.
pub fn swap_symmetry_holds(items: &[ScoredItem]) -> bool {
    let swapped: Vec<ScoredItem> = items.iter().map(ScoredItem::label_swapped).collect();
    let (ss, ss_sw) = (compute_ss(items).unwrap(), compute_ss(&swapped).unwrap());
    let (lm, lm_sw) = (compute_lm_score(items).unwrap(), compute_lm_score(&swapped).unwrap());
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    close(ss_sw.overall, 100.0 - ss.overall)
        && ss
            .per_category
            .iter()
            .all(|(c, v)| close(ss_sw.per_category[c], 100.0 - v))
        && lm == lm_sw
}
