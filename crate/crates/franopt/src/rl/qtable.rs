//! Tabular Q-learning baseline over bit-packed state keys.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rl::agent::EpsilonSchedule;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QTable {
    pub num_actions: usize,
    pub alpha: f64,
    pub gamma: f64,
    values: HashMap<(u64, u16), f64>,
}

impl QTable {
    pub fn new(num_actions: usize, alpha: f64, gamma: f64) -> Self {
        Self {
            num_actions,
            alpha,
            gamma,
            values: HashMap::new(),
        }
    }

    pub fn q(&self, state_key: u64, action: usize) -> f64 {
        *self.values.get(&(state_key, action as u16)).unwrap_or(&0.0)
    }

    pub fn max_q(&self, state_key: u64) -> f64 {
        (0..self.num_actions)
            .map(|a| self.q(state_key, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn greedy_action(&self, state_key: u64) -> usize {
        let mut best = 0;
        for a in 1..self.num_actions {
            if self.q(state_key, a) > self.q(state_key, best) {
                best = a;
            }
        }
        best
    }

    pub fn select_action(
        &self,
        state_key: u64,
        step: u64,
        sched: &EpsilonSchedule,
        rng: &mut impl Rng,
    ) -> usize {
        if rng.random::<f64>() < sched.value(step) {
            rng.random_range(0..self.num_actions)
        } else {
            self.greedy_action(state_key)
        }
    }

    /// Q(s,a) <- (1 - alpha) Q(s,a) + alpha [r + gamma max_a' Q(s',a')],
    /// with the bootstrap dropped on terminal transitions.
    pub fn update(&mut self, state_key: u64, action: usize, reward: f64, next_key: u64, terminal: bool) {
        let boot = if terminal { 0.0 } else { self.gamma * self.max_q(next_key) };
        let old = self.q(state_key, action);
        let new = (1.0 - self.alpha) * old + self.alpha * (reward + boot);
        self.values.insert((state_key, action as u16), new);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_table_first_update() {
        let mut q = QTable::new(96, 0.1, 0.99);
        assert_eq!(q.q(0, 0), 0.0);
        // Empty table: max_q(next) = 0, so Q becomes alpha * r = -0.8.
        q.update(0, 5, -8.0, 1, false);
        assert!((q.q(0, 5) + 0.8).abs() < 1e-12);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn terminal_update_drops_bootstrap() {
        let mut q = QTable::new(4, 0.5, 0.99);
        q.update(7, 0, 100.0, 7, false); // seed next-state value
        let mut q2 = q.clone();
        q.update(3, 1, -8.0, 7, true);
        q2.update(3, 1, -8.0, 7, false);
        assert!((q.q(3, 1) + 4.0).abs() < 1e-12);
        assert!(q2.q(3, 1) > q.q(3, 1));
    }

    #[test]
    fn converges_to_fixed_point() {
        // Single state, single action, constant reward r: Q* = r / (1 - gamma).
        let mut q = QTable::new(1, 0.1, 0.99);
        for _ in 0..20_000 {
            q.update(0, 0, -8.0, 0, false);
        }
        let fixed = -8.0 / (1.0 - 0.99);
        assert!((q.q(0, 0) - fixed).abs() < 1e-6 * fixed.abs());
    }

    #[test]
    fn greedy_prefers_higher_value() {
        let mut q = QTable::new(3, 1.0, 0.0);
        q.update(0, 0, -5.0, 0, true);
        q.update(0, 1, -2.0, 0, true);
        q.update(0, 2, -9.0, 0, true);
        assert_eq!(q.greedy_action(0), 1);
    }
}
