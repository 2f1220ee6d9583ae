//! Tabular Q-learning and a value-iteration reference for small MDPs.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub num_states: usize,
    pub num_actions: usize,
    pub values: Vec<f64>,
}

impl QTable {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            values: vec![0.0; num_states * num_actions],
        }
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.num_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn greedy(&self, s: usize) -> usize {
        super::argmax_masked(self.row(s), None)
    }

    pub fn max_abs_diff(&self, other: &QTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `Q(s,a) += α·[r + γ·max_a' Q(s',a') − Q(s,a)]`.
pub fn tabular_q_update(
    table: &mut QTable,
    s: usize,
    a: usize,
    r: f64,
    s_next: usize,
    alpha: f64,
    gamma: f64,
) -> Result<()> {
    for (what, index, len) in [
        ("state", s, table.num_states),
        ("state", s_next, table.num_states),
        ("action", a, table.num_actions),
    ] {
        if index >= len {
            return Err(Error::IndexOutOfRange { what, index, len });
        }
    }
    let target = r + gamma * table.max_value(s_next);
    let i = s * table.num_actions + a;
    table.values[i] += alpha * (target - table.values[i]);
    Ok(())
}

/// Finite MDP with deterministic transitions `next[s][a]` and rewards `reward[s][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    pub num_states: usize,
    pub num_actions: usize,
    pub next: Vec<usize>,
    pub reward: Vec<f64>,
}

impl FiniteMdp {
    pub fn random<R: Rng>(rng: &mut R, max_states: usize, max_actions: usize) -> Self {
        let num_states = rng.gen_range(1..=max_states);
        let num_actions = rng.gen_range(1..=max_actions);
        let n = num_states * num_actions;
        Self {
            num_states,
            num_actions,
            next: (0..n).map(|_| rng.gen_range(0..num_states)).collect(),
            reward: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            reward: self.reward.iter().map(|r| r + c).collect(),
            ..self.clone()
        }
    }
}

/// Bellman optimality fixed point by repeated backups until the update falls
/// below `tol`.
pub fn value_iteration(mdp: &FiniteMdp, gamma: f64, tol: f64) -> QTable {
    let mut q = QTable::zeros(mdp.num_states, mdp.num_actions);
    loop {
        let v: Vec<f64> = (0..mdp.num_states).map(|s| q.max_value(s)).collect();
        let mut delta = 0.0f64;
        for i in 0..q.values.len() {
            let new = mdp.reward[i] + gamma * v[mdp.next[i]];
            delta = delta.max((new - q.values[i]).abs());
            q.values[i] = new;
        }
        if delta < tol {
            return q;
        }
    }
}

/// Q-learning from uniformly drawn `(s, a)` pairs.
pub fn q_learning<R: Rng>(
    mdp: &FiniteMdp,
    alpha: f64,
    gamma: f64,
    updates: usize,
    rng: &mut R,
) -> QTable {
    let mut q = QTable::zeros(mdp.num_states, mdp.num_actions);
    for _ in 0..updates {
        let s = rng.gen_range(0..mdp.num_states);
        let a = rng.gen_range(0..mdp.num_actions);
        let i = s * mdp.num_actions + a;
        tabular_q_update(&mut q, s, a, mdp.reward[i], mdp.next[i], alpha, gamma)
            .expect("indices drawn in range");
    }
    q
}
