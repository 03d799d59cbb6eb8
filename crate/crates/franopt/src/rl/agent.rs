//! Epsilon-greedy DQN agent with target network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rl::adam::{adam_step, AdamState};
use crate::rl::net::{QNetwork, TdSample};
use crate::rl::replay::{ReplayMemory, Transition};

/// Linear annealing from `start` to `end` over `anneal_steps`, then flat.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub anneal_steps: u64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.01,
            anneal_steps: 3000,
        }
    }
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        let frac = step.min(self.anneal_steps) as f64 / self.anneal_steps as f64;
        self.start - (self.start - self.end) * frac
    }
}

/// Argmax with ties broken toward the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy action selection over the network's output head.
pub fn select_action(
    net: &QNetwork,
    state_vec: &[f64],
    step: u64,
    sched: &EpsilonSchedule,
    rng: &mut impl Rng,
) -> Result<usize> {
    let eps = sched.value(step);
    if rng.random::<f64>() < eps {
        Ok(rng.random_range(0..net.output_dim()))
    } else {
        Ok(argmax(&net.forward(state_vec)?))
    }
}

/// TD targets: r for terminal samples, r + gamma * max_a' Q_target(s', a')
/// otherwise. With `literal_action_target` the bootstrap reuses the stored
/// action instead of the max (for comparison only).
pub fn td_targets(
    batch: &[&Transition],
    target_net: &QNetwork,
    gamma: f64,
    literal_action_target: bool,
) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                Ok(t.reward)
            } else {
                let q_next = target_net.forward(&t.next_state_vec)?;
                let boot = if literal_action_target {
                    q_next[t.action_index]
                } else {
                    q_next[argmax(&q_next)]
                };
                Ok(t.reward + gamma * boot)
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub net: QNetwork,
    pub target: QNetwork,
    pub opt: AdamState,
    pub sched: EpsilonSchedule,
    pub gamma: f64,
    /// Bootstrap with the stored action instead of the max.
    pub literal_action_target: bool,
}

impl DqnAgent {
    pub fn new(layer_dims: &[usize], learning_rate: f64, gamma: f64, rng: &mut impl Rng) -> Self {
        let net = QNetwork::new(layer_dims, rng);
        Self::from_net(net, learning_rate, gamma)
    }

    /// Wrap an existing network (transfer learning: fresh optimizer and
    /// target copy around loaded weights).
    pub fn from_net(net: QNetwork, learning_rate: f64, gamma: f64) -> Self {
        let target = net.clone();
        let opt = AdamState::new(&net, learning_rate);
        Self {
            net,
            target,
            opt,
            sched: EpsilonSchedule::default(),
            gamma,
            literal_action_target: false,
        }
    }

    /// One mini-batch update: sample uniformly without replacement, form TD
    /// targets from the target network, apply a single Adam step. Returns
    /// the mean squared TD error before the update.
    pub fn train_step(
        &mut self,
        memory: &ReplayMemory,
        batch_size: usize,
        rng: &mut impl Rng,
    ) -> Result<f64> {
        let batch = memory.sample(batch_size, rng)?;
        let targets = td_targets(&batch, &self.target, self.gamma, self.literal_action_target)?;
        let samples: Vec<TdSample> = batch
            .iter()
            .zip(&targets)
            .map(|(t, &target)| TdSample {
                input: t.state_vec.clone(),
                action: t.action_index,
                target,
            })
            .collect();
        let (grads, loss) = self.net.gradients(&samples)?;
        adam_step(&mut self.net, &grads, &mut self.opt);
        Ok(loss)
    }

    /// Copy online parameters into the target network.
    pub fn sync_target(&mut self) {
        self.target = self.net.clone();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn epsilon_schedule_values() {
        let s = EpsilonSchedule::default();
        assert_eq!(s.value(0), 1.0);
        assert!((s.value(1500) - 0.505).abs() < 1e-12);
        assert!((s.value(3000) - 0.01).abs() < 1e-12);
        assert!((s.value(1_000_000) - 0.01).abs() < 1e-12);
        for t in 0..3100 {
            assert!(s.value(t + 1) <= s.value(t) + 1e-15);
        }
    }

    #[test]
    fn greedy_selection_and_tie_break() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = QNetwork::zeros(&[4, 96]);
        let sched = EpsilonSchedule {
            start: 0.0,
            end: 0.0,
            anneal_steps: 1,
        };
        // All-equal outputs: lowest index wins.
        let a = select_action(&net, &[0.0; 4], 0, &sched, &mut rng).unwrap();
        assert_eq!(a, 0);
        // Unique max at 42.
        net.biases[0][42] = 1.0;
        let a = select_action(&net, &[0.0; 4], 0, &sched, &mut rng).unwrap();
        assert_eq!(a, 42);
    }

    #[test]
    fn uniform_exploration_histogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = QNetwork::zeros(&[4, 96]);
        let sched = EpsilonSchedule {
            start: 1.0,
            end: 1.0,
            anneal_steps: 1,
        };
        let draws = 100_000;
        let mut hist = vec![0usize; 96];
        for _ in 0..draws {
            hist[select_action(&net, &[0.0; 4], 0, &sched, &mut rng).unwrap()] += 1;
        }
        let expect = draws as f64 / 96.0;
        let sigma = (draws as f64 * (1.0 / 96.0) * (1.0 - 1.0 / 96.0)).sqrt();
        for (i, &count) in hist.iter().enumerate() {
            assert!(
                (count as f64 - expect).abs() < 3.0 * sigma + 1.0,
                "action {i}: {count} vs {expect}"
            );
        }
    }

    #[test]
    fn greedy_invariant_to_constant_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut net = QNetwork::new(&[6, 8, 8, 5], &mut rng);
        let x = vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let before = argmax(&net.forward(&x).unwrap());
        for b in net.biases.last_mut().unwrap().iter_mut() {
            *b += 123.456;
        }
        assert_eq!(before, argmax(&net.forward(&x).unwrap()));
    }

    #[test]
    fn td_target_examples() {
        let net = QNetwork::zeros(&[2, 3]);
        let terminal = Transition {
            state_vec: vec![0.0, 0.0],
            action_index: 1,
            reward: -8.0,
            next_state_vec: vec![0.0, 0.0],
            terminal: true,
        };
        let nonterminal = Transition {
            terminal: false,
            ..terminal.clone()
        };
        // Terminal: target = r.
        let t = td_targets(&[&terminal], &net, 0.99, false).unwrap();
        assert_eq!(t[0], -8.0);
        // Gamma = 0: target = r always.
        let t = td_targets(&[&nonterminal], &net, 0.0, false).unwrap();
        assert_eq!(t[0], -8.0);
        // Max next Q of -700 with gamma 0.99: -8 + 0.99 * -700 = -701.
        let mut net = QNetwork::zeros(&[2, 3]);
        for b in net.biases[0].iter_mut() {
            *b = -700.0;
        }
        let t = td_targets(&[&nonterminal], &net, 0.99, false).unwrap();
        assert!((t[0] + 701.0).abs() < 1e-9);
    }

    #[test]
    fn train_step_zero_loss_on_consistent_memory() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut agent = DqnAgent::from_net(QNetwork::zeros(&[4, 8, 8, 6]), 1e-4, 0.99);
        let mut mem = ReplayMemory::new(100);
        for _ in 0..40 {
            mem.push(Transition {
                state_vec: vec![0.0; 4],
                action_index: 3,
                reward: 0.0,
                next_state_vec: vec![0.0; 4],
                terminal: true,
            });
        }
        let before = agent.net.clone();
        let loss = agent.train_step(&mem, 32, &mut rng).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(agent.net.weights, before.weights);
    }

    #[test]
    fn train_step_loss_matches_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut agent = DqnAgent::new(&[4, 8, 8, 6], 1e-4, 0.99, &mut rng);
        let mut mem = ReplayMemory::new(100);
        for i in 0..50 {
            mem.push(Transition {
                state_vec: (0..4).map(|j| ((i + j) % 2) as f64).collect(),
                action_index: i % 6,
                reward: -(i as f64 % 9.0),
                next_state_vec: (0..4).map(|j| ((i + j + 1) % 2) as f64).collect(),
                terminal: i % 10 == 9,
            });
        }
        // Recompute with an identical RNG stream: same batch, same targets.
        let mut rng_copy = rng.clone();
        let net_before = agent.net.clone();
        let target_before = agent.target.clone();
        let loss = agent.train_step(&mem, 32, &mut rng).unwrap();

        let batch = mem.sample(32, &mut rng_copy).unwrap();
        let targets = td_targets(&batch, &target_before, 0.99, false).unwrap();
        let manual: f64 = batch
            .iter()
            .zip(&targets)
            .map(|(t, &tgt)| {
                let q = net_before.forward(&t.state_vec).unwrap();
                (q[t.action_index] - tgt).powi(2)
            })
            .sum::<f64>()
            / 32.0;
        assert!((loss - manual).abs() < 1e-12);
    }

    #[test]
    fn sync_target_copies_and_freezes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut agent = DqnAgent::new(&[4, 8, 8, 6], 1e-2, 0.99, &mut rng);
        let x = vec![1.0, 0.0, 0.0, 1.0];
        agent.net.biases[2][0] += 1.0;
        assert_ne!(
            agent.net.forward(&x).unwrap(),
            agent.target.forward(&x).unwrap()
        );
        agent.sync_target();
        assert_eq!(
            agent.net.forward(&x).unwrap(),
            agent.target.forward(&x).unwrap()
        );
        // Between syncs the target stays constant.
        let frozen = agent.target.clone();
        agent.net.biases[2][1] += 5.0;
        assert_eq!(frozen.weights, agent.target.weights);
        assert_eq!(frozen.biases, agent.target.biases);
    }
}
