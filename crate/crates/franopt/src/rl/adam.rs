//! Adam optimizer with bias-corrected moment estimates.

use serde::{Deserialize, Serialize};

use crate::rl::net::{Gradients, QNetwork};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon_hat: f64,
    pub m_weights: Vec<Vec<f64>>,
    pub v_weights: Vec<Vec<f64>>,
    pub m_biases: Vec<Vec<f64>>,
    pub v_biases: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(net: &QNetwork, learning_rate: f64) -> Self {
        let zeros_w: Vec<Vec<f64>> = net.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let zeros_b: Vec<Vec<f64>> = net.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        Self {
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon_hat: 1e-8,
            m_weights: zeros_w.clone(),
            v_weights: zeros_w,
            m_biases: zeros_b.clone(),
            v_biases: zeros_b,
        }
    }

    fn update_slice(
        params: &mut [f64],
        grads: &[f64],
        m: &mut [f64],
        v: &mut [f64],
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        bc1: f64,
        bc2: f64,
    ) {
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

/// One Adam update in place; step_count increments by exactly 1.
pub fn adam_step(net: &mut QNetwork, grads: &Gradients, opt: &mut AdamState) {
    opt.step_count += 1;
    let t = opt.step_count as i32;
    let bc1 = 1.0 - opt.beta1.powi(t);
    let bc2 = 1.0 - opt.beta2.powi(t);
    for l in 0..net.num_layers() {
        AdamState::update_slice(
            &mut net.weights[l],
            &grads.weights[l],
            &mut opt.m_weights[l],
            &mut opt.v_weights[l],
            opt.learning_rate,
            opt.beta1,
            opt.beta2,
            opt.epsilon_hat,
            bc1,
            bc2,
        );
        AdamState::update_slice(
            &mut net.biases[l],
            &grads.biases[l],
            &mut opt.m_biases[l],
            &mut opt.v_biases[l],
            opt.learning_rate,
            opt.beta1,
            opt.beta2,
            opt.epsilon_hat,
            bc1,
            bc2,
        );
    }
}
