//! Fixed-capacity experience store with oldest-first eviction.

use rand::Rng;

use crate::error::{Error, Result};

/// One transition `(s, a, r, s')`.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// States are held as `f32` to keep long-running buffers small.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    dim: usize,
    states: Vec<f32>,
    next_states: Vec<f32>,
    actions: Vec<u32>,
    rewards: Vec<f64>,
    cursor: usize,
    len: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("replay capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            dim: state_dim,
            states: Vec::new(),
            next_states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            cursor: 0,
            len: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, state: &[f64], action: usize, reward: f64, next_state: &[f64]) -> Result<()> {
        if state.len() != self.dim || next_state.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: if state.len() != self.dim {
                    state.len()
                } else {
                    next_state.len()
                },
            });
        }
        let s = state.iter().map(|&v| v as f32);
        let n = next_state.iter().map(|&v| v as f32);
        if self.len < self.capacity {
            self.states.extend(s);
            self.next_states.extend(n);
            self.actions.push(action as u32);
            self.rewards.push(reward);
            self.len += 1;
        } else {
            let at = self.cursor * self.dim;
            for (dst, v) in self.states[at..at + self.dim].iter_mut().zip(s) {
                *dst = v;
            }
            for (dst, v) in self.next_states[at..at + self.dim].iter_mut().zip(n) {
                *dst = v;
            }
            self.actions[self.cursor] = action as u32;
            self.rewards[self.cursor] = reward;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    pub fn get(&self, index: usize) -> Result<Experience> {
        if index >= self.len {
            return Err(Error::IndexOutOfRange {
                what: "replay entry",
                index,
                len: self.len,
            });
        }
        let at = index * self.dim;
        Ok(Experience {
            state: self.states[at..at + self.dim].iter().map(|&v| v as f64).collect(),
            action: self.actions[index] as usize,
            reward: self.rewards[index],
            next_state: self.next_states[at..at + self.dim]
                .iter()
                .map(|&v| v as f64)
                .collect(),
        })
    }

    /// Uniform mini-batch drawn without replacement.
    pub fn sample<R: Rng>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<Experience>> {
        if batch_size == 0 || self.len < batch_size {
            return Err(Error::InsufficientSamples {
                stored: self.len,
                requested: batch_size,
            });
        }
        rand::seq::index::sample(rng, self.len, batch_size)
            .into_iter()
            .map(|i| self.get(i))
            .collect()
    }
}
