//! Dense Q-network: affine layers with ReLU hidden activations and an
//! identity output, plus analytic backprop for the squared TD error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QNetwork {
    /// Layer widths, input first (e.g. [14, 24, 24, 96]).
    pub layer_dims: Vec<usize>,
    /// weights[l] is row-major (out x in) for layer l.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-parameter gradient buffers, shaped like the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// One training example: input, the action whose Q-value is regressed, and
/// its target value.
#[derive(Debug, Clone)]
pub struct TdSample {
    pub input: Vec<f64>,
    pub action: usize,
    pub target: f64,
}

impl QNetwork {
    /// Glorot-style uniform init, scaled by fan-in/fan-out.
    pub fn new(layer_dims: &[usize], rng: &mut impl Rng) -> Self {
        assert!(layer_dims.len() >= 2, "need at least input and output layers");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let layer: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            weights.push(layer);
            biases.push(vec![0.0; fan_out]);
        }
        Self {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        }
    }

    pub fn zeros(layer_dims: &[usize]) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_dims.windows(2) {
            weights.push(vec![0.0; w[0] * w[1]]);
            biases.push(vec![0.0; w[1]]);
        }
        Self {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Verify that weight and bias lengths match `layer_dims`.
    pub fn check_shapes(&self) -> Result<()> {
        if self.layer_dims.len() < 2
            || self.weights.len() != self.layer_dims.len() - 1
            || self.biases.len() != self.weights.len()
        {
            return Err(Error::DimensionMismatch {
                expected: self.layer_dims.len().saturating_sub(1),
                got: self.weights.len(),
            });
        }
        for (l, pair) in self.layer_dims.windows(2).enumerate() {
            if self.weights[l].len() != pair[0] * pair[1] {
                return Err(Error::DimensionMismatch {
                    expected: pair[0] * pair[1],
                    got: self.weights[l].len(),
                });
            }
            if self.biases[l].len() != pair[1] {
                return Err(Error::DimensionMismatch {
                    expected: pair[1],
                    got: self.biases[l].len(),
                });
            }
        }
        Ok(())
    }

    fn affine(&self, layer: usize, x: &[f64]) -> Vec<f64> {
        let (n_in, n_out) = (self.layer_dims[layer], self.layer_dims[layer + 1]);
        let w = &self.weights[layer];
        let b = &self.biases[layer];
        let mut y = b.clone();
        for (o, yo) in y.iter_mut().enumerate().take(n_out) {
            let row = &w[o * n_in..(o + 1) * n_in];
            *yo += row.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>();
        }
        y
    }

    /// Q-values for one input.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let last = self.num_layers() - 1;
        let mut h = x.to_vec();
        for l in 0..self.num_layers() {
            h = self.affine(l, &h);
            if l < last {
                for v in h.iter_mut() {
                    *v = v.max(0.0);
                }
            }
        }
        Ok(h)
    }

    /// Forward pass keeping post-activation values of every layer
    /// (activations[0] is the input).
    fn forward_cached(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let last = self.num_layers() - 1;
        let mut acts = Vec::with_capacity(self.num_layers() + 1);
        acts.push(x.to_vec());
        for l in 0..self.num_layers() {
            let mut h = self.affine(l, acts.last().unwrap());
            if l < last {
                for v in h.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            acts.push(h);
        }
        acts
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Gradient of the mean squared TD error over the batch with respect to
    /// every parameter. Only the taken-action output coordinate of each
    /// sample carries error.
    pub fn gradients(&self, batch: &[TdSample]) -> Result<(Gradients, f64)> {
        if batch.is_empty() {
            return Err(Error::BatchTooLarge { have: 0, need: 1 });
        }
        let mut grads = self.zero_gradients();
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        let last = self.num_layers() - 1;

        for sample in batch {
            if sample.input.len() != self.input_dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.input_dim(),
                    got: sample.input.len(),
                });
            }
            let acts = self.forward_cached(&sample.input);
            let out = &acts[self.num_layers()];
            let residual = out[sample.action] - sample.target;
            loss += residual * residual * scale;

            // Output-layer error: 2 * residual / B on the taken action only.
            let mut delta = vec![0.0; self.output_dim()];
            delta[sample.action] = 2.0 * residual * scale;

            for l in (0..=last).rev() {
                let n_in = self.layer_dims[l];
                let n_out = self.layer_dims[l + 1];
                let input = &acts[l];
                for o in 0..n_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    grads.biases[l][o] += d;
                    let row = &mut grads.weights[l][o * n_in..(o + 1) * n_in];
                    for (g, xi) in row.iter_mut().zip(input) {
                        *g += d * xi;
                    }
                }
                if l > 0 {
                    // Propagate through the affine map, then gate by ReLU.
                    let w = &self.weights[l];
                    let mut prev = vec![0.0; n_in];
                    for o in 0..n_out {
                        let d = delta[o];
                        if d == 0.0 {
                            continue;
                        }
                        let row = &w[o * n_in..(o + 1) * n_in];
                        for (p, wi) in prev.iter_mut().zip(row) {
                            *p += d * wi;
                        }
                    }
                    for (p, a) in prev.iter_mut().zip(&acts[l]) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        Ok((grads, loss))
    }

    /// All parameters finite (training-divergence guard).
    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = QNetwork::zeros(&[14, 24, 24, 96]);
        let q = net.forward(&vec![1.0; 14]).unwrap();
        assert_eq!(q.len(), 96);
        assert!(q.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_is_pure_and_checks_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = QNetwork::new(&[14, 24, 24, 96], &mut rng);
        let x: Vec<f64> = (0..14).map(|i| (i % 2) as f64).collect();
        assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
        assert!(net.forward(&vec![0.0; 13]).is_err());
    }

    #[test]
    fn positive_path_is_linear() {
        // Single chain with positive weights: ReLU stays in its linear
        // region for positive input, so the net composes to a product.
        let mut net = QNetwork::zeros(&[1, 1, 1, 1]);
        net.weights[0][0] = 2.0;
        net.weights[1][0] = 3.0;
        net.weights[2][0] = 0.5;
        let y = net.forward(&[2.0]).unwrap();
        assert!((y[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_residual_means_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = QNetwork::new(&[6, 8, 8, 4], &mut rng);
        let x = vec![1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        let q = net.forward(&x).unwrap();
        let batch = vec![TdSample {
            input: x,
            action: 2,
            target: q[2],
        }];
        let (grads, loss) = net.gradients(&batch).unwrap();
        assert_eq!(loss, 0.0);
        for layer in grads.weights.iter().chain(grads.biases.iter()) {
            assert!(layer.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..5 {
            let net = QNetwork::new(&[6, 8, 8, 4], &mut rng);
            let batch: Vec<TdSample> = (0..4)
                .map(|i| TdSample {
                    input: (0..6).map(|_| rng.random_range(0.0..1.0)).collect(),
                    action: (i + trial) % 4,
                    target: rng.random_range(-2.0..2.0),
                })
                .collect();
            let (grads, _) = net.gradients(&batch).unwrap();
            let h = 1e-5;
            let loss_of = |n: &QNetwork| -> f64 {
                batch
                    .iter()
                    .map(|s| {
                        let q = n.forward(&s.input).unwrap();
                        (q[s.action] - s.target).powi(2)
                    })
                    .sum::<f64>()
                    / batch.len() as f64
            };
            for l in 0..net.num_layers() {
                for idx in (0..net.weights[l].len()).step_by(7) {
                    let mut plus = net.clone();
                    plus.weights[l][idx] += h;
                    let mut minus = net.clone();
                    minus.weights[l][idx] -= h;
                    let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                    let an = grads.weights[l][idx];
                    let denom = fd.abs().max(an.abs()).max(1e-8);
                    assert!(
                        (fd - an).abs() / denom < 1e-4,
                        "layer {l} idx {idx}: fd {fd} vs analytic {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn residual_scaling_scales_gradients() {
        // Linear-activation region: gradients are linear in the residual.
        let mut net = QNetwork::zeros(&[2, 3, 2]);
        for w in net.weights.iter_mut().flatten() {
            *w = 0.3;
        }
        for b in net.biases.iter_mut().flatten() {
            *b = 0.1;
        }
        let x = vec![1.0, 2.0];
        let q = net.forward(&x).unwrap();
        let mk = |c: f64| {
            vec![TdSample {
                input: x.clone(),
                action: 0,
                target: q[0] - c,
            }]
        };
        let (g1, _) = net.gradients(&mk(1.0)).unwrap();
        let (g3, _) = net.gradients(&mk(3.0)).unwrap();
        for (a, b) in g1.weights.iter().flatten().zip(g3.weights.iter().flatten()) {
            assert!((3.0 * a - b).abs() < 1e-9);
        }
    }
}
