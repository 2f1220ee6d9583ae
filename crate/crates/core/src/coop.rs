//! Cooperative execution: profile similarity and expert transfer, spatial
//! groups, group Q-value and joint action selection, and the cooperative policy
//! used both while training and at run time.

use std::collections::HashMap;

use rand::Rng;

use crate::dqn::{
    argmax_masked, random_allowed, Agent, ActionPolicy, EventCounts, PolicyEvent, QNetwork,
    TrainConfig,
};
use crate::env::{Network, SlotOutcome};
use crate::error::{Error, Result};
use crate::mdp::ActionSpace;
use crate::metrics::EpisodeMetrics;
use crate::scenario::{DeviceKind, LinkProfile, Point, Service, Topology};

/// Number of profile features.
pub const PROFILE_LEN: usize = 9;

/// Normalized description of a link used to find similar peers.
///
/// Features: device one-hot (cellular, d2d), service one-hot (urllc, normal),
/// SINR threshold (dB / 30), latency bound (s / 10 ms), latency violation
/// target (`-log10(p) / 10`, 0 for normal links), minimum normal rate
/// (bps/Hz / 10, 0 for URLLC links) and arrival rate (packets/slot). Every
/// feature is clipped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentProfile {
    pub features: Vec<f64>,
}

impl AgentProfile {
    pub fn from_link(profile: &LinkProfile) -> Self {
        let urllc = profile.service == Service::Urllc;
        let q = &profile.qos;
        let clip = |v: f64| v.clamp(0.0, 1.0);
        let features = vec![
            f64::from(u8::from(profile.kind == DeviceKind::Cellular)),
            f64::from(u8::from(profile.kind == DeviceKind::D2d)),
            f64::from(u8::from(urllc)),
            f64::from(u8::from(!urllc)),
            clip(q.sinr_min_db / 30.0),
            clip(q.latency_max_s / 10e-3),
            if urllc {
                clip(-q.p_latency_max.log10() / 10.0)
            } else {
                0.0
            },
            if urllc {
                0.0
            } else {
                clip(q.rate_min_normal / 10.0)
            },
            clip(profile.arrival_rate),
        ];
        Self { features }
    }
}

/// Squared Euclidean distance, the Bregman divergence of `½‖x‖²`.
pub fn bregman_distance(a: &AgentProfile, b: &AgentProfile) -> Result<f64> {
    if a.features.len() != b.features.len() {
        return Err(Error::DimensionMismatch {
            expected: a.features.len(),
            got: b.features.len(),
        });
    }
    Ok(a.features
        .iter()
        .zip(&b.features)
        .map(|(x, y)| (x - y) * (x - y))
        .sum())
}

/// Closest neighbor within `radius`; ties go to the lowest id.
pub fn select_expert(
    learner: &AgentProfile,
    neighbors: &[(usize, &AgentProfile)],
    radius: f64,
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &(id, p) in neighbors {
        let Ok(d) = bregman_distance(learner, p) else {
            continue;
        };
        if d > radius {
            continue;
        }
        best = match best {
            Some((bd, bid)) if bd < d || (bd == d && bid < id) => Some((bd, bid)),
            _ => Some((d, id)),
        };
    }
    best.map(|(_, id)| id)
}

/// Anything that maps a state to Q-values over the action space.
pub trait QSource {
    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>>;
}

impl QSource for QNetwork {
    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.forward(state)
    }
}

/// `μ·Q_transfer + (1 − μ)·Q_current`, blended on outputs.
#[derive(Debug, Clone, Copy)]
pub struct BlendedQ<'a> {
    pub transfer: &'a QNetwork,
    pub current: &'a QNetwork,
    pub mu: f64,
}

impl QSource for BlendedQ<'_> {
    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        let t = self.transfer.forward(state)?;
        let mut c = self.current.forward(state)?;
        for (ci, ti) in c.iter_mut().zip(&t) {
            *ci = self.mu * ti + (1.0 - self.mu) * *ci;
        }
        Ok(c)
    }
}

pub fn blend_models<'a>(transfer: &'a QNetwork, current: &'a QNetwork, mu: f64) -> Result<BlendedQ<'a>> {
    if transfer.layer_sizes() != current.layer_sizes() {
        return Err(Error::ArchitectureMismatch(
            transfer.layer_sizes(),
            current.layer_sizes(),
        ));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("transfer rate {mu} outside [0, 1]")));
    }
    Ok(BlendedQ {
        transfer,
        current,
        mu,
    })
}

pub fn decay_transfer_rate(mu: f64, kappa: f64) -> f64 {
    kappa * mu
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferConfig {
    pub radius: f64,
    pub mu0: f64,
    pub kappa: f64,
    /// A transfer ends once μ falls below this value.
    pub mu_floor: f64,
    /// QoS window level below which a slot counts as poor.
    pub poor_threshold: f64,
    /// Consecutive poor slots that trigger a transfer.
    pub poor_slots: usize,
    pub enabled: bool,
    /// Links treated as newly joined: they look for an expert immediately.
    pub new_agents: Vec<usize>,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            radius: 0.5,
            mu0: 0.8,
            kappa: 0.95,
            mu_floor: 0.01,
            poor_threshold: 0.5,
            poor_slots: 100,
            enabled: true,
            new_agents: Vec::new(),
        }
    }
}

impl TransferConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidConfig("transfer radius must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.mu0) || !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidConfig(
                "transfer rate must lie in [0, 1] and its decay in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Partition of links into spatial groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAssignment {
    pub groups: Vec<Vec<usize>>,
    pub membership: Vec<usize>,
}

impl GroupAssignment {
    pub fn singletons(num_links: usize) -> Self {
        Self {
            groups: (0..num_links).map(|l| vec![l]).collect(),
            membership: (0..num_links).collect(),
        }
    }

    pub fn is_partition_of(&self, num_links: usize) -> bool {
        let mut seen = vec![false; num_links];
        for (g, members) in self.groups.iter().enumerate() {
            for &l in members {
                if l >= num_links || seen[l] || self.membership[l] != g {
                    return false;
                }
                seen[l] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Greedy geographic clustering: the unassigned link closest to the base
/// station seeds a group, which is filled with the seed's `group_size − 1`
/// nearest unassigned links. Distance ties go to the lower link id.
pub fn partition_groups(topology: &Topology, group_size: usize) -> Result<GroupAssignment> {
    if group_size == 0 {
        return Err(Error::InvalidConfig("group size must be at least 1".into()));
    }
    let z = topology.num_links();
    let pos: Vec<Point> = (0..z).map(|l| topology.link_position(l)).collect();
    let mut assigned = vec![false; z];
    let mut groups = Vec::new();
    let mut membership = vec![0; z];
    let by = |d: f64, id: usize| (d, id);
    while let Some(seed) = (0..z)
        .filter(|&l| !assigned[l])
        .min_by(|&a, &b| {
            by(pos[a].distance(&topology.bs), a)
                .partial_cmp(&by(pos[b].distance(&topology.bs), b))
                .expect("finite distances")
        })
    {
        let mut rest: Vec<usize> = (0..z).filter(|&l| !assigned[l] && l != seed).collect();
        rest.sort_by(|&a, &b| {
            by(pos[a].distance(&pos[seed]), a)
                .partial_cmp(&by(pos[b].distance(&pos[seed]), b))
                .expect("finite distances")
        });
        let mut members = vec![seed];
        members.extend(rest.into_iter().take(group_size - 1));
        members.sort_unstable();
        for &m in &members {
            assigned[m] = true;
            membership[m] = groups.len();
        }
        groups.push(members);
    }
    Ok(GroupAssignment { groups, membership })
}

/// Summed Q-value of a group.
pub fn group_q(values: &[f64]) -> f64 {
    values.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointMode {
    SequentialGreedy,
    Exhaustive,
}

/// Inputs for one group decision. Members are listed in link-id order.
/// A subchannel picked by a member with `exclusive[i]` set (a C-device) is
/// closed to every later member; D2D picks only mark the channel busy.
pub struct GroupProblem<'a> {
    pub states: &'a [Vec<f64>],
    pub sources: &'a [&'a dyn QSource],
    pub masks: &'a [Vec<bool>],
    pub exclusive: &'a [bool],
    pub space: ActionSpace,
}

/// Member `i`'s state with the subchannels announced before it marked busy.
fn conditioned(state: &[f64], announced: &[usize]) -> Vec<f64> {
    let mut s = state.to_vec();
    for &n in announced {
        s[n] = 1.0;
    }
    s
}

fn announced_of(space: &ActionSpace, actions: &[usize]) -> Vec<usize> {
    actions.iter().filter_map(|&a| space.subchannel_of(a)).collect()
}

/// Subchannels taken by the exclusive members among the first `actions.len()`.
fn claimed_of(space: &ActionSpace, exclusive: &[bool], actions: &[usize]) -> Vec<usize> {
    actions
        .iter()
        .zip(exclusive)
        .filter(|(_, &x)| x)
        .filter_map(|(&a, _)| space.subchannel_of(a))
        .collect()
}

/// Mask of a member once `claimed` subchannels are taken inside the group.
fn exclusive_mask(space: &ActionSpace, mask: &[bool], claimed: &[usize]) -> Vec<bool> {
    let mut m = mask.to_vec();
    for &n in claimed {
        for p in 0..space.num_levels {
            m[n * space.num_levels + p] = false;
        }
    }
    m
}

/// Group objective: each member's Q-value for its action, evaluated on its
/// state conditioned on earlier members' announcements. Joint actions that
/// reuse a claimed subchannel or break a member's mask score `-inf`.
pub fn joint_value(problem: &GroupProblem, actions: &[usize]) -> Result<f64> {
    let mut values = Vec::with_capacity(actions.len());
    for (i, &a) in actions.iter().enumerate() {
        let announced = announced_of(&problem.space, &actions[..i]);
        let claimed = claimed_of(&problem.space, problem.exclusive, &actions[..i]);
        if !problem.masks[i][a]
            || problem
                .space
                .subchannel_of(a)
                .is_some_and(|n| claimed.contains(&n))
        {
            return Ok(f64::NEG_INFINITY);
        }
        let q = problem.sources[i].q_values(&conditioned(&problem.states[i], &announced))?;
        values.push(q[a]);
    }
    Ok(group_q(&values))
}

/// Every member picks its best action given earlier announcements.
pub fn sequential_greedy(problem: &GroupProblem) -> Result<Vec<usize>> {
    let mut actions: Vec<usize> = Vec::with_capacity(problem.states.len());
    for i in 0..problem.states.len() {
        let announced = announced_of(&problem.space, &actions);
        let claimed = claimed_of(&problem.space, problem.exclusive, &actions);
        let q = problem.sources[i].q_values(&conditioned(&problem.states[i], &announced))?;
        let mask = exclusive_mask(&problem.space, &problem.masks[i], &claimed);
        actions.push(argmax_masked(&q, Some(&mask)));
    }
    Ok(actions)
}

/// Every member picks its solo argmax on its unconditioned state.
pub fn independent_argmax(problem: &GroupProblem) -> Result<Vec<usize>> {
    (0..problem.states.len())
        .map(|i| {
            let q = problem.sources[i].q_values(&problem.states[i])?;
            Ok(argmax_masked(&q, Some(&problem.masks[i])))
        })
        .collect()
}

/// Enumerates every feasible joint action of a group of at most three members.
pub fn exhaustive(problem: &GroupProblem) -> Result<Vec<usize>> {
    let size = problem.states.len();
    if size > 3 {
        return Err(Error::GroupTooLarge(size));
    }
    if size == 0 {
        return Ok(Vec::new());
    }
    let space = problem.space;
    // Q-vectors per member keyed by the sorted announced set.
    let mut cache: Vec<HashMap<Vec<usize>, Vec<f64>>> = vec![HashMap::new(); size];
    let mut q_for = |i: usize, announced: &[usize]| -> Result<Vec<f64>> {
        let mut key = announced.to_vec();
        key.sort_unstable();
        if let Some(v) = cache[i].get(&key) {
            return Ok(v.clone());
        }
        let v = problem.sources[i].q_values(&conditioned(&problem.states[i], announced))?;
        cache[i].insert(key, v.clone());
        Ok(v)
    };
    let allowed = |i: usize, prefix: &[usize]| -> Vec<usize> {
        let claimed = claimed_of(&space, problem.exclusive, prefix);
        exclusive_mask(&space, &problem.masks[i], &claimed)
            .into_iter()
            .enumerate()
            .filter(|(_, ok)| *ok)
            .map(|(a, _)| a)
            .collect()
    };
    let mut best = f64::NEG_INFINITY;
    let mut best_actions: Vec<usize> = Vec::new();
    let q0 = q_for(0, &[])?;
    for a0 in allowed(0, &[]) {
        let ann0 = announced_of(&space, &[a0]);
        if size == 1 {
            if q0[a0] > best || best_actions.is_empty() {
                best = q0[a0];
                best_actions = vec![a0];
            }
            continue;
        }
        let q1 = q_for(1, &ann0)?;
        for a1 in allowed(1, &[a0]) {
            let ann1 = announced_of(&space, &[a0, a1]);
            if size == 2 {
                let v = q0[a0] + q1[a1];
                if v > best || best_actions.is_empty() {
                    best = v;
                    best_actions = vec![a0, a1];
                }
                continue;
            }
            let q2 = q_for(2, &ann1)?;
            for a2 in allowed(2, &[a0, a1]) {
                let v = q0[a0] + q1[a1] + q2[a2];
                if v > best || best_actions.is_empty() {
                    best = v;
                    best_actions = vec![a0, a1, a2];
                }
            }
        }
    }
    Ok(best_actions)
}

/// Joint action of a group: the exhaustive maximizer, or the sequential greedy
/// profile unless the independent profile scores strictly higher.
pub fn joint_action(problem: &GroupProblem, mode: JointMode) -> Result<Vec<usize>> {
    match mode {
        JointMode::Exhaustive => exhaustive(problem),
        JointMode::SequentialGreedy => {
            let seq = sequential_greedy(problem)?;
            if problem.states.len() < 2 {
                return Ok(seq);
            }
            let ind = independent_argmax(problem)?;
            if ind != seq && joint_value(problem, &ind)? > joint_value(problem, &seq)? {
                Ok(ind)
            } else {
                Ok(seq)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoopConfig {
    pub group_size: usize,
    pub mode: JointMode,
    pub transfer: TransferConfig,
}

impl Default for CoopConfig {
    fn default() -> Self {
        Self {
            group_size: 5,
            mode: JointMode::SequentialGreedy,
            transfer: TransferConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
struct ActiveTransfer {
    expert: usize,
    snapshot: QNetwork,
    mu: f64,
}

/// Transfer learning for struggling or new agents plus cooperative joint
/// action inside spatial groups.
#[derive(Debug, Clone)]
pub struct CooperativePolicy {
    config: CoopConfig,
    groups: GroupAssignment,
    profiles: Vec<AgentProfile>,
    poor_streak: Vec<usize>,
    pending_new: Vec<bool>,
    transfers: Vec<Option<ActiveTransfer>>,
    acted_by_transfer: Vec<bool>,
    decided: Vec<Option<Vec<f64>>>,
    counts: EventCounts,
    log: Vec<PolicyEvent>,
}

impl CooperativePolicy {
    pub fn new(env: &Network, config: CoopConfig) -> Result<Self> {
        config.transfer.validate()?;
        let groups = partition_groups(env.topology(), config.group_size)?;
        Self::with_groups(env, config, groups)
    }

    pub fn with_groups(env: &Network, config: CoopConfig, groups: GroupAssignment) -> Result<Self> {
        let z = env.num_links();
        if !groups.is_partition_of(z) {
            return Err(Error::InvalidConfig("groups do not partition the links".into()));
        }
        if config.mode == JointMode::Exhaustive {
            if let Some(g) = groups.groups.iter().find(|g| g.len() > 3) {
                return Err(Error::GroupTooLarge(g.len()));
            }
        }
        let mut pending_new = vec![false; z];
        for &l in &config.transfer.new_agents {
            if l < z {
                pending_new[l] = true;
            }
        }
        Ok(Self {
            profiles: env.profiles().iter().map(AgentProfile::from_link).collect(),
            poor_streak: vec![0; z],
            pending_new,
            transfers: vec![None; z],
            acted_by_transfer: vec![false; z],
            decided: vec![None; z],
            counts: EventCounts::default(),
            log: Vec::new(),
            groups,
            config,
        })
    }

    pub fn groups(&self) -> &GroupAssignment {
        &self.groups
    }

    /// Current transfer rate of `link`, if it is blending an expert.
    pub fn transfer_rate(&self, link: usize) -> Option<(usize, f64)> {
        self.transfers[link].as_ref().map(|t| (t.expert, t.mu))
    }

    fn wants_transfer(&self, l: usize) -> bool {
        self.config.transfer.enabled
            && (self.pending_new[l] || self.poor_streak[l] >= self.config.transfer.poor_slots)
    }

    fn try_start_transfer(&mut self, env: &Network, agents: &[Agent], l: usize) {
        let t = &self.config.transfer;
        let group = &self.groups.groups[self.groups.membership[l]];
        let neighbors: Vec<(usize, &AgentProfile)> = group
            .iter()
            .copied()
            .filter(|&o| {
                o != l
                    && self.transfers[o].is_none()
                    && !self.pending_new[o]
                    && env.qos_window(o) >= t.poor_threshold
            })
            .map(|o| (o, &self.profiles[o]))
            .collect();
        if let Some(expert) = select_expert(&self.profiles[l], &neighbors, t.radius) {
            self.transfers[l] = Some(ActiveTransfer {
                expert,
                snapshot: agents[expert].net.clone(),
                mu: t.mu0,
            });
            self.pending_new[l] = false;
            self.counts.transfer += 1;
            self.log.push(PolicyEvent {
                slot: env.current_slot(),
                agent: l,
                kind: "transfer_start",
                expert: Some(expert),
                mu: t.mu0,
            });
        }
    }
}

fn explore_or<R: Rng>(epsilon: f64, rng: &mut R, len: usize, mask: &[bool]) -> Option<usize> {
    (epsilon > 0.0 && rng.gen::<f64>() < epsilon).then(|| random_allowed(len, rng, Some(mask)))
}

impl ActionPolicy for CooperativePolicy {
    fn choose(
        &mut self,
        env: &Network,
        agents: &mut [Agent],
        states: &[Option<Vec<f64>>],
        epsilon: f64,
    ) -> Result<Vec<usize>> {
        let space = env.action_space();
        let z = env.num_links();
        let mut actions = vec![space.idle(); z];
        self.acted_by_transfer.iter_mut().for_each(|b| *b = false);
        self.decided.iter_mut().for_each(|d| *d = None);

        for l in 0..z {
            if states[l].is_some() && self.transfers[l].is_none() && self.wants_transfer(l) {
                self.try_start_transfer(env, agents, l);
            }
        }

        // Transfer branch: blended Q, independent action.
        for l in 0..z {
            let (Some(s), Some(tr)) = (&states[l], &self.transfers[l]) else {
                continue;
            };
            let mask = env.action_mask(l);
            let blended = blend_models(&tr.snapshot, &agents[l].net, tr.mu)?;
            let q = blended.q_values(s)?;
            let rng = &mut agents[l].explore_rng;
            actions[l] = explore_or(epsilon, rng, space.len(), &mask)
                .unwrap_or_else(|| argmax_masked(&q, Some(&mask)));
            self.acted_by_transfer[l] = true;
        }

        // Cooperative branch, group by group.
        for g in 0..self.groups.groups.len() {
            let members: Vec<usize> = self.groups.groups[g]
                .iter()
                .copied()
                .filter(|&l| states[l].is_some() && !self.acted_by_transfer[l])
                .collect();
            if members.is_empty() {
                continue;
            }
            if members.len() > 1 {
                self.counts.coop += members.len() as u64;
            }
            let base: Vec<Vec<f64>> = members
                .iter()
                .map(|&l| states[l].clone().expect("member has a state"))
                .collect();
            let masks: Vec<Vec<bool>> = members.iter().map(|&l| env.action_mask(l)).collect();
            let exclusive: Vec<bool> =
                members.iter().map(|&l| env.kind(l) == DeviceKind::Cellular).collect();

            // Turn-based pass with per-member exploration.
            let mut chosen: Vec<usize> = Vec::with_capacity(members.len());
            let mut explored = false;
            for (i, &l) in members.iter().enumerate() {
                let announced = announced_of(&space, &chosen);
                let claimed = claimed_of(&space, &exclusive, &chosen);
                let mask = exclusive_mask(&space, &masks[i], &claimed);
                let rng = &mut agents[l].explore_rng;
                if let Some(a) = explore_or(epsilon, rng, space.len(), &mask) {
                    explored = true;
                    chosen.push(a);
                    continue;
                }
                let q = agents[l].net.forward(&conditioned(&base[i], &announced))?;
                chosen.push(argmax_masked(&q, Some(&mask)));
            }
            if !explored && members.len() > 1 {
                let sources: Vec<&dyn QSource> =
                    members.iter().map(|&l| &agents[l].net as &dyn QSource).collect();
                let problem = GroupProblem {
                    states: &base,
                    sources: &sources,
                    masks: &masks,
                    exclusive: &exclusive,
                    space,
                };
                chosen = match self.config.mode {
                    JointMode::Exhaustive => exhaustive(&problem)?,
                    JointMode::SequentialGreedy => {
                        let ind = independent_argmax(&problem)?;
                        if ind != chosen
                            && joint_value(&problem, &ind)? > joint_value(&problem, &chosen)?
                        {
                            ind
                        } else {
                            chosen
                        }
                    }
                };
            }
            for (i, &l) in members.iter().enumerate() {
                actions[l] = chosen[i];
                let announced = announced_of(&space, &chosen[..i]);
                if !announced.is_empty() {
                    self.decided[l] = Some(conditioned(&base[i], &announced));
                }
            }
        }
        Ok(actions)
    }

    fn decision_state(&self, l: usize) -> Option<&[f64]> {
        self.decided.get(l)?.as_deref()
    }

    fn after_step(&mut self, env: &Network, _agents: &[Agent], _outcome: &SlotOutcome) -> Result<()> {
        let t = self.config.transfer.clone();
        for l in 0..env.num_links() {
            if env.qos_window(l) < t.poor_threshold {
                self.poor_streak[l] += 1;
            } else {
                self.poor_streak[l] = 0;
            }
            if !self.acted_by_transfer[l] {
                continue;
            }
            let finished = if let Some(tr) = self.transfers[l].as_mut() {
                tr.mu = decay_transfer_rate(tr.mu, t.kappa);
                (tr.mu < t.mu_floor).then_some((tr.expert, tr.mu))
            } else {
                None
            };
            if let Some((expert, mu)) = finished {
                self.transfers[l] = None;
                self.poor_streak[l] = 0;
                self.log.push(PolicyEvent {
                    slot: env.current_slot().saturating_sub(1),
                    agent: l,
                    kind: "transfer_end",
                    expert: Some(expert),
                    mu,
                });
            }
        }
        Ok(())
    }

    fn take_events(&mut self) -> EventCounts {
        std::mem::take(&mut self.counts)
    }

    fn take_event_log(&mut self) -> Vec<PolicyEvent> {
        std::mem::take(&mut self.log)
    }
}

/// Run-time stage: loads trained agents and executes the cooperative policy for
/// `num_slots` slots, optionally continuing to learn online.
pub fn run_implementation(
    agents: &mut [Agent],
    env: &mut Network,
    config: &CoopConfig,
    num_slots: usize,
    window: usize,
    online: Option<&TrainConfig>,
) -> Result<(Vec<EpisodeMetrics>, Vec<PolicyEvent>)> {
    let mut policy = CooperativePolicy::new(env, config.clone())?;
    let rec = crate::dqn::evaluate(env, agents, &mut policy, num_slots, window, online)?;
    Ok((rec.metrics, rec.events))
}
