use super::config::AdamConfig;
use super::model::NetWeights;
use crate::error::{Error, Result};

/// First and second moment estimates plus the step counter `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(num_params: usize) -> Self {
        AdamState {
            m1: vec![0.0; num_params],
            m2: vec![0.0; num_params],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update; increments the step counter first.
pub fn adam_step(state: &mut AdamState, weights: &mut NetWeights, grad: &NetWeights, cfg: &AdamConfig) -> Result<()> {
    let n = weights.num_params();
    if grad.num_params() != n || state.m1.len() != n || state.m2.len() != n {
        return Err(Error::Shape(format!(
            "Adam state, weights and gradient sizes differ ({}, {n}, {})",
            state.m1.len(),
            grad.num_params()
        )));
    }
    state.step += 1;
    let r = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(r);
    let c2 = 1.0 - cfg.beta2.powi(r);
    for (((w, &g), m1), m2) in weights
        .params_mut()
        .zip(grad.params())
        .zip(state.m1.iter_mut())
        .zip(state.m2.iter_mut())
    {
        *m1 = cfg.beta1 * *m1 + (1.0 - cfg.beta1) * g;
        *m2 = cfg.beta2 * *m2 + (1.0 - cfg.beta2) * g * g;
        let h1 = *m1 / c1;
        let h2 = *m2 / c2;
        *w -= cfg.alpha * h1 / (h2.sqrt() + cfg.epsilon);
    }
    Ok(())
}
