//! Deep Q-learning engine: network, replay, TD loss, exploration, the tabular
//! reference update and the episodic training loop.

pub mod checkpoint;
pub mod network;
pub mod replay;
pub mod tabular;
pub mod train;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scenario::{stream_rng, StreamTag};

pub use network::{Activations, Gradients, Layer, QNetwork};
pub use replay::{Experience, ReplayBuffer};
pub use train::{evaluate, train, ActionPolicy, EventCounts, IndependentPolicy, PolicyEvent, RunRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Q-learning rate of the tabular update.
    pub learning_rate_q: f64,
    /// Gradient step size.
    pub weight_step: f64,
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    /// Multiplicative decay applied after every episode.
    pub epsilon_decay: f64,
    pub batch_size: usize,
    pub episodes: usize,
    pub steps_per_episode: usize,
    /// Gradient steps between target refreshes; 0 bootstraps from the online network.
    pub target_sync_period: usize,
    pub replay_capacity: usize,
    pub hidden_layers: Vec<usize>,
    /// Mini-batch updates per agent at the end of each episode.
    pub updates_per_episode: usize,
    /// Factor applied to rewards before they enter the replay buffer.
    pub reward_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate_q: 0.02,
            weight_step: 1e-3,
            discount: 0.95,
            epsilon_start: 1.0,
            epsilon_min: 0.05,
            epsilon_decay: 0.995,
            batch_size: 64,
            episodes: 2000,
            steps_per_episode: 200,
            target_sync_period: 100,
            replay_capacity: 50_000,
            hidden_layers: vec![250, 250, 100],
            updates_per_episode: 1,
            reward_scale: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad(format!("discount {} must lie in (0, 1)", self.discount));
        }
        if !(0.0..=1.0).contains(&self.epsilon_min)
            || !(self.epsilon_min..=1.0).contains(&self.epsilon_start)
        {
            return bad("epsilon schedule must satisfy 0 <= eps_min <= eps_start <= 1".into());
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad(format!("epsilon decay {} must lie in (0, 1]", self.epsilon_decay));
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return bad("batch size must be positive and fit in the replay buffer".into());
        }
        if self.hidden_layers.iter().any(|&h| h == 0) {
            return bad("hidden layers must be non-empty".into());
        }
        if !(self.weight_step >= 0.0 && self.weight_step.is_finite()) {
            return bad("weight step must be finite and non-negative".into());
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward scale must be positive".into());
        }
        Ok(())
    }

    /// Exploration rate for `episode` (0-based).
    pub fn epsilon_at(&self, episode: usize) -> f64 {
        (self.epsilon_start * self.epsilon_decay.powi(episode as i32)).max(self.epsilon_min)
    }

    pub fn layer_sizes(&self, state_dim: usize, num_actions: usize) -> Vec<usize> {
        let mut s = vec![state_dim];
        s.extend_from_slice(&self.hidden_layers);
        s.push(num_actions);
        s
    }
}

/// Index of the largest allowed value; ties go to the lowest index.
pub fn argmax_masked(q: &[f64], mask: Option<&[bool]>) -> usize {
    let mut best = usize::MAX;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in q.iter().enumerate() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        if best == usize::MAX || v > best_v {
            best = i;
            best_v = v;
        }
    }
    if best == usize::MAX {
        0
    } else {
        best
    }
}

/// ε-greedy choice over a Q-vector. The generator is only consulted when ε > 0.
pub fn select_from_q<R: Rng>(q: &[f64], epsilon: f64, rng: &mut R, mask: Option<&[bool]>) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return random_allowed(q.len(), rng, mask);
    }
    argmax_masked(q, mask)
}

/// Uniform draw over the allowed indices of `0..len`.
pub fn random_allowed<R: Rng>(len: usize, rng: &mut R, mask: Option<&[bool]>) -> usize {
    match mask {
        None => rng.gen_range(0..len),
        Some(m) => {
            let count = m.iter().filter(|&&b| b).count();
            if count == 0 {
                return 0;
            }
            let k = rng.gen_range(0..count);
            m.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .nth(k)
                .map(|(i, _)| i)
                .unwrap_or(0)
        }
    }
}

pub fn select_action<R: Rng>(
    net: &QNetwork,
    state: &[f64],
    epsilon: f64,
    rng: &mut R,
    mask: Option<&[bool]>,
) -> Result<usize> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let q = net.forward(state)?;
    Ok(select_from_q(&q, epsilon, rng, mask))
}

/// Reusable buffers for [`td_loss_into`].
#[derive(Debug, Default)]
pub struct TdWorkspace {
    acts: Activations,
    target_acts: Activations,
    scratch: (Vec<f64>, Vec<f64>),
    out_grad: Vec<f64>,
}

/// Mean squared TD error over `batch` and its gradient with the bootstrapped
/// target held fixed. `target = None` bootstraps from `net` itself.
pub fn td_loss(
    net: &QNetwork,
    target: Option<&QNetwork>,
    batch: &[Experience],
    gamma: f64,
) -> Result<(f64, Gradients)> {
    let mut grads = Gradients::zeros_like(net);
    let mut ws = TdWorkspace::default();
    let loss = td_loss_into(net, target, batch, gamma, &mut grads, &mut ws)?;
    Ok((loss, grads))
}

pub fn td_loss_into(
    net: &QNetwork,
    target: Option<&QNetwork>,
    batch: &[Experience],
    gamma: f64,
    grads: &mut Gradients,
    ws: &mut TdWorkspace,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("TD batch"));
    }
    grads.clear();
    let target = target.unwrap_or(net);
    let b = batch.len() as f64;
    let mut loss = 0.0;
    for e in batch {
        if e.action >= net.output_dim() {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: e.action,
                len: net.output_dim(),
            });
        }
        target.forward_cached(&e.next_state, &mut ws.target_acts)?;
        let next_max = ws
            .target_acts
            .output()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let y = e.reward + gamma * next_max;
        net.forward_cached(&e.state, &mut ws.acts)?;
        let q = ws.acts.output()[e.action];
        let td = y - q;
        loss += td * td;
        ws.out_grad.clear();
        ws.out_grad.resize(net.output_dim(), 0.0);
        ws.out_grad[e.action] = -2.0 * td / b;
        net.backward(&ws.acts, &ws.out_grad, grads, &mut ws.scratch);
    }
    Ok(loss / b)
}

/// One learner: online network, optional target copy, replay memory and its
/// own random streams.
#[derive(Debug, Clone)]
pub struct Agent {
    pub id: usize,
    pub net: QNetwork,
    pub target: Option<QNetwork>,
    pub replay: ReplayBuffer,
    pub explore_rng: ChaCha8Rng,
    pub replay_rng: ChaCha8Rng,
    pub updates: u64,
    grads: Option<Gradients>,
}

impl Agent {
    pub fn new(id: usize, sizes: &[usize], cfg: &TrainConfig, seed: u64) -> Result<Self> {
        let mut init = stream_rng(seed, StreamTag::NetInit, id as u64);
        let net = QNetwork::new(sizes, &mut init)?;
        Self::with_network(id, net, cfg, seed)
    }

    pub fn with_network(id: usize, net: QNetwork, cfg: &TrainConfig, seed: u64) -> Result<Self> {
        let target = (cfg.target_sync_period > 0).then(|| net.clone());
        Ok(Self {
            id,
            replay: ReplayBuffer::new(cfg.replay_capacity, net.input_dim())?,
            target,
            net,
            explore_rng: stream_rng(seed, StreamTag::Explore, id as u64),
            replay_rng: stream_rng(seed, StreamTag::Replay, id as u64),
            updates: 0,
            grads: None,
        })
    }

    /// One mini-batch gradient step. Returns `None` while the buffer holds
    /// fewer than `batch_size` entries.
    pub fn learn(&mut self, cfg: &TrainConfig, ws: &mut TdWorkspace) -> Result<Option<f64>> {
        if self.replay.len() < cfg.batch_size {
            return Ok(None);
        }
        let batch = self.replay.sample(cfg.batch_size, &mut self.replay_rng)?;
        let grads = self
            .grads
            .get_or_insert_with(|| Gradients::zeros_like(&self.net));
        let loss = td_loss_into(
            &self.net,
            self.target.as_ref(),
            &batch,
            cfg.discount,
            grads,
            ws,
        )?;
        self.net.sgd_step(grads, cfg.weight_step)?;
        self.updates += 1;
        if !self.net.is_finite() || !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "agent {} produced non-finite parameters at update {} (loss {loss})",
                self.id, self.updates
            )));
        }
        if cfg.target_sync_period > 0 && self.updates % cfg.target_sync_period as u64 == 0 {
            self.target = Some(self.net.clone());
        }
        Ok(Some(loss))
    }
}

/// One freshly initialized agent per link of `env`.
pub fn new_agents(env: &crate::env::Network, cfg: &TrainConfig) -> Result<Vec<Agent>> {
    cfg.validate()?;
    let sizes = cfg.layer_sizes(env.config().state_dim(), env.action_space().len());
    (0..env.num_links())
        .map(|l| Agent::new(l, &sizes, cfg, env.config().rng_seed))
        .collect()
}
