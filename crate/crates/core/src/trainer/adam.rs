use serde::{Deserialize, Serialize};

use crate::encoder::{ModelGrads, ToyModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment accumulators, one vector per parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn for_model(model: &ToyModel) -> Self {
        let m: Vec<Vec<f64>> = model.blocks().iter().map(|(_, b)| vec![0.0; b.len()]).collect();
        AdamState { v: m.clone(), m }
    }
}

/// One bias-corrected Adam update on a flat parameter slice. `t` is 1-based.
pub fn adam_update(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], t: u64, cfg: &AdamConfig) {
    debug_assert!(t >= 1);
    let bc1 = 1.0 - cfg.beta1.powi(t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

/// Applies Adam to every block of `model`. Rejects non-finite gradients
/// before touching any parameter.
pub fn adam_step(
    model: &mut ToyModel,
    grads: &ModelGrads,
    state: &mut AdamState,
    t: u64,
    cfg: &AdamConfig,
) -> Result<()> {
    if t == 0 {
        return Err(Error::Config("Adam step index is 1-based".into()));
    }
    for ((name, g), (_, p)) in grads.blocks().iter().zip(model.blocks()) {
        if g.len() != p.len() {
            return Err(Error::ShapeMismatch {
                what: name,
                expected: p.len(),
                got: g.len(),
            });
        }
        if let Some(index) = g.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteGradient { block: name, index });
        }
    }
    for (((_, p), (_, g)), (m, v)) in model
        .blocks_mut()
        .into_iter()
        .zip(grads.blocks())
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        adam_update(p, g, m, v, t, cfg);
    }
    Ok(())
}
