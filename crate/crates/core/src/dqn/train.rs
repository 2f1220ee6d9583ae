//! Episodic training loop and the slot-level evaluation loop shared by every
//! approach.

use super::{select_from_q, Agent, TdWorkspace, TrainConfig};
use crate::env::{Network, SlotOutcome};
use crate::error::Result;
use crate::metrics::{EpisodeMetrics, MetricsAccumulator};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub transfer: u64,
    pub coop: u64,
}

/// Logged policy event (transfer start, transfer end, cooperative decision).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvent {
    pub slot: u64,
    pub agent: usize,
    pub kind: &'static str,
    pub expert: Option<usize>,
    pub mu: f64,
}

/// Decides one action per link for the open slot.
pub trait ActionPolicy {
    /// `states[l]` is `Some` exactly for links with traffic this slot.
    fn choose(
        &mut self,
        env: &Network,
        agents: &mut [Agent],
        states: &[Option<Vec<f64>>],
        epsilon: f64,
    ) -> Result<Vec<usize>>;

    fn after_step(&mut self, _env: &Network, _agents: &[Agent], _outcome: &SlotOutcome) -> Result<()> {
        Ok(())
    }

    fn take_events(&mut self) -> EventCounts {
        EventCounts::default()
    }

    fn take_event_log(&mut self) -> Vec<PolicyEvent> {
        Vec::new()
    }

    /// State link `l` acted on in the last `choose`, when it differs from the
    /// observation passed in (e.g. extended with neighbours' announced picks).
    /// Replay stores this state so learning sees the decision inputs.
    fn decision_state(&self, _l: usize) -> Option<&[f64]> {
        None
    }

    /// Whether the policy reads agent networks (and so whether learning applies).
    fn uses_agents(&self) -> bool {
        true
    }
}

/// Every agent acts ε-greedily on its own Q-network.
#[derive(Debug, Clone, Default)]
pub struct IndependentPolicy {
    q: Vec<f64>,
}

impl IndependentPolicy {
    pub fn new() -> Self {
        Self::default()
    }
}

impl ActionPolicy for IndependentPolicy {
    fn choose(
        &mut self,
        env: &Network,
        agents: &mut [Agent],
        states: &[Option<Vec<f64>>],
        epsilon: f64,
    ) -> Result<Vec<usize>> {
        let idle = env.action_space().idle();
        let mut actions = vec![idle; env.num_links()];
        for (l, state) in states.iter().enumerate() {
            if let Some(s) = state {
                let mask = env.action_mask(l);
                let agent = &mut agents[l];
                self.q = agent.net.forward(s)?;
                actions[l] = select_from_q(&self.q, epsilon, &mut agent.explore_rng, Some(&mask));
            }
        }
        Ok(actions)
    }
}

fn demand_states(env: &Network) -> Vec<Option<Vec<f64>>> {
    (0..env.num_links())
        .map(|l| env.has_demand(l).then(|| env.state_vec(l)))
        .collect()
}

/// Plays one slot. When `store` is set, transitions of links with traffic go
/// into their agent's replay buffer with the reward multiplied by `reward_scale`.
fn play_slot(
    env: &mut Network,
    agents: &mut [Agent],
    policy: &mut dyn ActionPolicy,
    epsilon: f64,
    store: Option<f64>,
) -> Result<SlotOutcome> {
    let uses_agents = policy.uses_agents();
    let states = if uses_agents {
        demand_states(env)
    } else {
        (0..env.num_links())
            .map(|l| env.has_demand(l).then(Vec::new))
            .collect()
    };
    let actions = policy.choose(env, agents, &states, epsilon)?;
    let outcome = env.step(&actions)?;
    policy.after_step(env, agents, &outcome)?;
    if let (Some(scale), true) = (store, uses_agents) {
        for (l, s) in states.iter().enumerate() {
            if let Some(s) = s {
                let next = env.state_vec(l);
                let o = &outcome.links[l];
                let s = policy.decision_state(l).unwrap_or(s);
                agents[l].replay.push(s, o.action, o.reward * scale, &next)?;
            }
        }
    }
    Ok(outcome)
}

fn learn_all(agents: &mut [Agent], cfg: &TrainConfig, ws: &mut TdWorkspace) -> Result<()> {
    for agent in agents.iter_mut() {
        for _ in 0..cfg.updates_per_episode {
            if agent.learn(cfg, ws)?.is_none() {
                break;
            }
        }
    }
    Ok(())
}

/// Output of a training or evaluation run.
#[derive(Debug, Clone, Default)]
pub struct RunRecord {
    pub metrics: Vec<EpisodeMetrics>,
    pub events: Vec<PolicyEvent>,
}

/// Episodic training: `steps_per_episode` slots of observe / act / store, then
/// mini-batch updates for every agent, then ε decay.
pub fn train(
    env: &mut Network,
    agents: &mut [Agent],
    policy: &mut dyn ActionPolicy,
    cfg: &TrainConfig,
    progress: &mut dyn FnMut(&EpisodeMetrics),
) -> Result<RunRecord> {
    cfg.validate()?;
    let mut ws = TdWorkspace::default();
    let mut record = RunRecord::default();
    for episode in 0..cfg.episodes {
        let epsilon = cfg.epsilon_at(episode);
        let mut acc = MetricsAccumulator::default();
        for _ in 0..cfg.steps_per_episode {
            let outcome = play_slot(env, agents, policy, epsilon, Some(cfg.reward_scale))?;
            acc.record(&outcome, env.profiles());
        }
        let ev = policy.take_events();
        acc.transfer_events = ev.transfer;
        acc.coop_events = ev.coop;
        record.events.extend(policy.take_event_log());
        if policy.uses_agents() {
            learn_all(agents, cfg, &mut ws)?;
        }
        let m = acc.finish(episode as u64, epsilon);
        progress(&m);
        record.metrics.push(m);
    }
    Ok(record)
}

/// Greedy execution for `num_slots` slots, one metrics row per `window` slots.
/// With `learn` set, transitions are stored and every agent takes its
/// configured updates at the end of each window.
pub fn evaluate(
    env: &mut Network,
    agents: &mut [Agent],
    policy: &mut dyn ActionPolicy,
    num_slots: usize,
    window: usize,
    learn: Option<&TrainConfig>,
) -> Result<RunRecord> {
    let window = window.max(1);
    let mut ws = TdWorkspace::default();
    let mut record = RunRecord::default();
    let mut acc = MetricsAccumulator::default();
    let store = learn.map(|c| c.reward_scale);
    for t in 0..num_slots {
        let outcome = play_slot(env, agents, policy, 0.0, store)?;
        acc.record(&outcome, env.profiles());
        if (t + 1) % window == 0 || t + 1 == num_slots {
            let ev = policy.take_events();
            acc.transfer_events = ev.transfer;
            acc.coop_events = ev.coop;
            record.events.extend(policy.take_event_log());
            if let (Some(cfg), true) = (learn, policy.uses_agents()) {
                learn_all(agents, cfg, &mut ws)?;
            }
            record.metrics.push(acc.finish(record.metrics.len() as u64, 0.0));
            acc = MetricsAccumulator::default();
        }
    }
    Ok(record)
}
