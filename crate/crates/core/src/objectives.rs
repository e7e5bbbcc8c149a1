//! Similarity and contrastive objectives with analytic gradients.
//!
//! The decoupled triplet loss for one (anchor, positive, negative) triplet is
//!
//! ```text
//! L = -log σ((s_ap - m_p) / τ) - β · log(1 - σ((s_an - m_n) / τ))
//! ```
//!
//! where `s_ap`, `s_an` are cosine similarities of the anchor embedding to the
//! positive and negative embeddings. Each term depends on one similarity only,
//! so `∂L/∂s_ap` never sees `s_an` and vice versa. The pairwise InfoNCE form
//! puts both similarities in one softmax and does not have that property.
//!
//! With τ = 0.05 the logits reach ±40, so both log terms go through softplus:
//! `-log σ(x) = softplus(-x)` and `-log(1 - σ(x)) = softplus(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Loss hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub tau: f64,
    pub margin_pos: f64,
    pub margin_neg: f64,
    /// Weight of the negative (repulsion) term.
    pub beta: f64,
    /// Weight of the language-modeling loss in the total objective.
    pub lambda: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            tau: 0.05,
            margin_pos: 0.5,
            margin_neg: 0.2,
            beta: 1.0,
            lambda: 1.0,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !self.margin_pos.is_finite() || !self.margin_neg.is_finite() {
            return Err(Error::Config("margins must be finite".into()));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Anchor-positive and anchor-negative cosine similarities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletSims {
    pub s_ap: f64,
    pub s_an: f64,
}

/// Loss value and its partials with respect to the two similarities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimLoss {
    pub value: f64,
    pub d_s_ap: f64,
    pub d_s_an: f64,
}

/// Logistic function, branching on sign so neither branch overflows.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow for large `x` or loss of precision for very negative `x`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Cosine similarity with gradients with respect to both inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Cosine {
    pub value: f64,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<Cosine> {
    if u.len() != v.len() {
        return Err(Error::ShapeMismatch {
            what: "cosine operands",
            expected: u.len(),
            got: v.len(),
        });
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu2: f64 = u.iter().map(|a| a * a).sum();
    let nv2: f64 = v.iter().map(|a| a * a).sum();
    if nu2 == 0.0 || nv2 == 0.0 || !nu2.is_finite() || !nv2.is_finite() {
        return Err(Error::UndefinedSimilarity);
    }
    let nu = nu2.sqrt();
    let nv = nv2.sqrt();
    let raw = dot / (nu * nv);
    let inv = 1.0 / (nu * nv);
    let du = u
        .iter()
        .zip(v)
        .map(|(a, b)| b * inv - raw * a / nu2)
        .collect();
    let dv = u
        .iter()
        .zip(v)
        .map(|(a, b)| a * inv - raw * b / nv2)
        .collect();
    Ok(Cosine {
        value: raw.clamp(-1.0, 1.0),
        du,
        dv,
    })
}

/// Cosine value only.
pub fn cosine_value(u: &[f64], v: &[f64]) -> Result<f64> {
    cosine(u, v).map(|c| c.value)
}

/// Decoupled triplet loss and its partials.
pub fn triplet_loss(sims: TripletSims, cfg: &LossConfig) -> SimLoss {
    let pos = (sims.s_ap - cfg.margin_pos) / cfg.tau;
    let neg = (sims.s_an - cfg.margin_neg) / cfg.tau;
    let value = softplus(-pos) + cfg.beta * softplus(neg);
    SimLoss {
        value,
        d_s_ap: positive_term_grad(sims.s_ap, cfg),
        d_s_an: negative_term_grad(sims.s_an, cfg),
    }
}

// Each partial is computed from its own similarity only.
fn positive_term_grad(s_ap: f64, cfg: &LossConfig) -> f64 {
    -sigmoid(-(s_ap - cfg.margin_pos) / cfg.tau) / cfg.tau
}

fn negative_term_grad(s_an: f64, cfg: &LossConfig) -> f64 {
    cfg.beta * sigmoid((s_an - cfg.margin_neg) / cfg.tau) / cfg.tau
}

/// Single-negative InfoNCE: `-log(e^{s_ap/τ} / (e^{s_ap/τ} + e^{s_an/τ}))`.
pub fn pairwise_infonce(s_ap: f64, s_an: f64, tau: f64) -> SimLoss {
    // log-sum-exp of the two logits minus the positive logit
    let gap = (s_an - s_ap) / tau;
    let p_neg = sigmoid(gap);
    SimLoss {
        value: softplus(gap),
        d_s_ap: -p_neg / tau,
        d_s_an: p_neg / tau,
    }
}

/// `triplet + λ · lm`.
pub fn total_loss(triplet: f64, lm: f64, cfg: &LossConfig) -> f64 {
    triplet + cfg.lambda * lm
}
