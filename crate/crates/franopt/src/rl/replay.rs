//! FIFO replay memory with uniform mini-batch sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One stored interaction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transition {
    pub state_vec: Vec<f64>,
    pub action_index: usize,
    pub reward: f64,
    pub next_state_vec: Vec<f64>,
    pub terminal: bool,
}

/// Ring buffer: when full, insertion evicts the oldest record.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    ring: Vec<Transition>,
    cursor: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            capacity,
            ring: Vec::with_capacity(capacity),
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.ring.len() < self.capacity {
            self.ring.push(t);
        } else {
            self.ring[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Uniform sample without replacement.
    pub fn sample<'a>(
        &'a self,
        batch_size: usize,
        rng: &mut impl Rng,
    ) -> Result<Vec<&'a Transition>> {
        if self.ring.len() < batch_size {
            return Err(Error::BatchTooLarge {
                have: self.ring.len(),
                need: batch_size,
            });
        }
        let idx = rand::seq::index::sample(rng, self.ring.len(), batch_size);
        Ok(idx.into_iter().map(|i| &self.ring[i]).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.ring.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(i: usize) -> Transition {
        Transition {
            state_vec: vec![i as f64],
            action_index: i,
            reward: -(i as f64),
            next_state_vec: vec![i as f64 + 1.0],
            terminal: false,
        }
    }

    #[test]
    fn fifo_eviction_keeps_most_recent() {
        let mut mem = ReplayMemory::new(5);
        for i in 0..12 {
            mem.push(t(i));
        }
        assert_eq!(mem.len(), 5);
        let mut kept: Vec<usize> = mem.iter().map(|x| x.action_index).collect();
        kept.sort_unstable();
        assert_eq!(kept, vec![7, 8, 9, 10, 11]);
    }

    #[test]
    fn sampling_without_replacement() {
        let mut mem = ReplayMemory::new(100);
        for i in 0..50 {
            mem.push(t(i));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = mem.sample(32, &mut rng).unwrap();
        let mut ids: Vec<usize> = batch.iter().map(|x| x.action_index).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 32);

        assert!(mem.sample(51, &mut rng).is_err());
    }
}
