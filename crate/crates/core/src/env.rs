//! Slotted multi-agent environment tying scenario, physics, URLLC bounds and
//! rewards together.
//!
//! A slot runs as: arrivals and channel are drawn when the slot opens, every
//! agent observes, all actions are applied at once in [`Network::step`], which
//! scores the slot and opens the next one. URLLC links with an empty buffer are
//! forced idle and produce no demand event. A URLLC packet is either delivered
//! in its slot or dropped. Normal links are full-buffer.

use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::mdp::{
    self, ActionSpace, AgentAction, AgentState, EnvSnapshot, QosIndicators, QosWindow,
    RewardConfig,
};
use crate::phy::{self, AssignmentMatrix};
use crate::scenario::{
    generate_topology, linear_to_db, link_profiles, sample_channel, stream_rng, ChannelState,
    DeviceKind, LinkProfile, ScenarioConfig, Service, StreamTag, Topology,
};
use crate::urllc;

/// Per-link result of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkOutcome {
    /// The link had traffic this slot (always true for normal links).
    pub demand: bool,
    pub action: usize,
    pub rate: f64,
    pub ee: f64,
    pub indicators: QosIndicators,
    pub reward: f64,
    /// The link lost its subchannel to a C-device collision.
    pub collided: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub slot: u64,
    pub network_ee: f64,
    pub links: Vec<LinkOutcome>,
    pub assignment: AssignmentMatrix,
}

impl SlotOutcome {
    /// `(successes, events)` over demand events of the selected service class.
    pub fn success_counts(&self, profiles: &[LinkProfile], class: Option<Service>) -> (u64, u64) {
        let mut ok = 0;
        let mut total = 0;
        for (l, o) in self.links.iter().enumerate() {
            if !o.demand || class.is_some_and(|c| profiles[l].service != c) {
                continue;
            }
            total += 1;
            if o.indicators.success() {
                ok += 1;
            }
        }
        (ok, total)
    }

    pub fn mean_reward(&self) -> Option<f64> {
        let (sum, n) = self
            .links
            .iter()
            .filter(|o| o.demand)
            .fold((0.0, 0usize), |(s, n), o| (s + o.reward, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    config: ScenarioConfig,
    reward: RewardConfig,
    topology: Topology,
    profiles: Vec<LinkProfile>,
    bounds: Vec<Option<f64>>,
    space: ActionSpace,
    slot: u64,
    channel: ChannelState,
    packets: Vec<u64>,
    snapshot: EnvSnapshot,
    windows: Vec<QosWindow>,
}

impl Network {
    pub fn new(config: ScenarioConfig, reward: RewardConfig) -> Result<Self> {
        config.validate()?;
        reward.validate()?;
        let topology = generate_topology(&config)?;
        let profiles = link_profiles(&config);
        let bounds = profiles
            .iter()
            .map(|p| match p.service {
                Service::Urllc => urllc::min_rate_urllc(p, &config).map(|b| Some(b.rate_min_urllc)),
                Service::Normal => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        let z = config.num_links();
        let n = config.num_subchannels;
        let space = ActionSpace::new(&config);
        let channel = sample_channel(&topology, &config, 0);
        let mut net = Self {
            snapshot: EnvSnapshot::empty(z, n),
            windows: vec![QosWindow::default(); z],
            packets: vec![0; z],
            config,
            reward,
            topology,
            profiles,
            bounds,
            space,
            slot: 0,
            channel,
        };
        net.open_slot();
        Ok(net)
    }

    /// Restarts operation at `slot_base` with fresh observation history.
    /// Channels and arrivals depend only on the slot index, so two networks
    /// reset to the same base see identical randomness.
    pub fn reset(&mut self, slot_base: u64) {
        let z = self.num_links();
        self.snapshot = EnvSnapshot::empty(z, self.config.num_subchannels);
        self.windows = vec![QosWindow::default(); z];
        self.slot = slot_base;
        self.open_slot();
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn profiles(&self) -> &[LinkProfile] {
        &self.profiles
    }

    pub fn action_space(&self) -> ActionSpace {
        self.space
    }

    pub fn num_links(&self) -> usize {
        self.profiles.len()
    }

    pub fn current_slot(&self) -> u64 {
        self.slot
    }

    pub fn channel(&self) -> &ChannelState {
        &self.channel
    }

    pub fn snapshot(&self) -> &EnvSnapshot {
        &self.snapshot
    }

    pub fn rate_bound(&self, link: usize) -> Option<f64> {
        self.bounds[link]
    }

    pub fn qos_window(&self, link: usize) -> f64 {
        self.windows[link].value()
    }

    /// Whether `link` has traffic in the open slot.
    pub fn has_demand(&self, link: usize) -> bool {
        match self.profiles[link].service {
            Service::Normal => true,
            Service::Urllc => self.packets[link] > 0,
        }
    }

    /// Largest power level index usable by `link`.
    pub fn allowed_power_levels(&self, link: usize) -> usize {
        let limit = self.config.max_power_mw(self.profiles[link].kind);
        self.config
            .power_levels_mw
            .iter()
            .filter(|&&p| p <= limit)
            .count()
    }

    /// Mask of actions `link` may take in the open slot.
    pub fn action_mask(&self, link: usize) -> Vec<bool> {
        let mut mask = vec![false; self.space.len()];
        mask[self.space.idle()] = true;
        if self.has_demand(link) {
            let levels = self.allowed_power_levels(link);
            for n in 0..self.space.num_subchannels {
                for p in 0..levels {
                    mask[n * self.space.num_levels + p] = true;
                }
            }
        }
        mask
    }

    pub fn is_allowed(&self, link: usize, action: usize) -> bool {
        if action == self.space.idle() {
            return true;
        }
        if action > self.space.idle() || !self.has_demand(link) {
            return false;
        }
        action % self.space.num_levels < self.allowed_power_levels(link)
    }

    pub fn observe(&self, link: usize) -> Result<AgentState> {
        mdp::encode_state(link, &self.snapshot, &self.profiles[link])
    }

    /// Observation as a flat vector.
    pub fn state_vec(&self, link: usize) -> Vec<f64> {
        self.observe(link).expect("link index in range").to_vec()
    }

    fn open_slot(&mut self) {
        self.channel = sample_channel(&self.topology, &self.config, self.slot);
        let mut rng = stream_rng(self.config.rng_seed, StreamTag::Traffic, self.slot);
        for (l, p) in self.profiles.iter().enumerate() {
            self.packets[l] = match p.service {
                Service::Normal => 0,
                Service::Urllc if p.arrival_rate > 0.0 => {
                    let d = Poisson::new(p.arrival_rate).expect("positive arrival rate");
                    d.sample(&mut rng) as u64
                }
                Service::Urllc => 0,
            };
        }
        for (l, p) in self.profiles.iter().enumerate() {
            self.snapshot.queued_bits[l] = match p.service {
                Service::Normal => 10.0 * p.mean_packet_bits,
                Service::Urllc => self.packets[l] as f64 * p.mean_packet_bits,
            };
            self.snapshot.qos_satisfaction[l] = self.windows[l].value();
        }
    }

    /// Turns action indices into an assignment. Disallowed actions become idle.
    /// C-devices that pick the same subchannel are all dropped from it.
    pub fn build_assignment(&self, actions: &[usize]) -> Result<(AssignmentMatrix, Vec<usize>, Vec<bool>)> {
        let z = self.num_links();
        if actions.len() != z {
            return Err(Error::DimensionMismatch {
                expected: z,
                got: actions.len(),
            });
        }
        let idle = self.space.idle();
        let effective: Vec<usize> = actions
            .iter()
            .enumerate()
            .map(|(l, &a)| if self.is_allowed(l, a) { a } else { idle })
            .collect();
        let n_sub = self.config.num_subchannels;
        let k = self.config.num_cdevices;
        let mut c_count = vec![0usize; n_sub];
        for &a in &effective[..k] {
            if let Some(n) = self.space.subchannel_of(a) {
                c_count[n] += 1;
            }
        }
        let mut collided = vec![false; z];
        let mut assignment = AssignmentMatrix::for_config(&self.config);
        for (l, &a) in effective.iter().enumerate() {
            if let AgentAction::Transmit {
                subchannel,
                power_level,
            } = self.space.decode(a)
            {
                if l < k && c_count[subchannel] > 1 {
                    collided[l] = true;
                    continue;
                }
                assignment.set(l, subchannel, self.config.power_levels_mw[power_level])?;
            }
        }
        Ok((assignment, effective, collided))
    }

    /// Applies one action per link, scores the slot and opens the next one.
    pub fn step(&mut self, actions: &[usize]) -> Result<SlotOutcome> {
        let (assignment, effective, collided) = self.build_assignment(actions)?;
        let rates = phy::link_rates(&assignment, &self.channel, &self.config);
        let network_ee = phy::network_ee(&assignment, &rates, &self.config);
        let n_sub = self.config.num_subchannels;
        let mut links = Vec::with_capacity(self.num_links());
        for l in 0..self.num_links() {
            let demand = self.has_demand(l);
            let rate = rates.rate(l);
            let used: Vec<f64> = (0..n_sub)
                .filter(|&n| assignment.rho(l, n))
                .map(|n| rates.sinr(l, n))
                .collect();
            let indicators = if demand {
                mdp::qos_indicators(&self.profiles[l], rate, &used, self.bounds[l])
            } else {
                QosIndicators::default()
            };
            let ee = mdp::per_link_ee(l, &rates, &assignment, &self.config, self.reward.ee_mode);
            let reward = mdp::reward(ee, indicators, &self.reward);
            if demand {
                self.windows[l].push(indicators.success());
            }
            links.push(LinkOutcome {
                demand,
                action: effective[l],
                rate,
                ee,
                indicators,
                reward,
                collided: collided[l],
            });
        }
        self.record_observations(&assignment);
        let outcome = SlotOutcome {
            slot: self.slot,
            network_ee,
            links,
            assignment,
        };
        self.slot += 1;
        self.open_slot();
        Ok(outcome)
    }

    /// Stores what each link measured: occupancy and, per subchannel, the SINR
    /// it would have seen at full power against the interference present.
    fn record_observations(&mut self, a: &AssignmentMatrix) {
        let n_sub = self.config.num_subchannels;
        let k = self.config.num_cdevices;
        let m = self.config.num_d2d_pairs;
        let ch = &self.channel;
        let noise = self.config.noise_power_w();
        for l in 0..self.num_links() {
            self.snapshot.previous_choice[l] = a.subchannels_of(l).next();
        }
        for n in 0..n_sub {
            let d_on: Vec<(usize, f64)> = (0..m)
                .filter(|&d| a.rho_d[d * n_sub + n])
                .map(|d| (d, a.power_d[d * n_sub + n] * 1e-3))
                .collect();
            let c_on: Vec<(usize, f64)> = (0..k)
                .filter(|&c| a.rho_c[c * n_sub + n])
                .map(|c| (c, a.power_c[c * n_sub + n] * 1e-3))
                .collect();
            let at_bs: f64 = d_on.iter().map(|&(d, p)| p * ch.g_db[d]).sum();
            for c in 0..k {
                let p_max = self.config.max_power_c_mw * 1e-3;
                let sinr = p_max * ch.h_c[c] / (at_bs + noise);
                self.snapshot.quality_db[c * n_sub + n] = linear_to_db(sinr);
            }
            for d in 0..m {
                let from_c: f64 = c_on.iter().map(|&(c, p)| p * ch.g_cd(c, d)).sum();
                let from_d: f64 = d_on
                    .iter()
                    .filter(|&&(o, _)| o != d)
                    .map(|&(o, p)| p * ch.g_dd(o, d))
                    .sum();
                let p_max = self.config.max_power_d_mw * 1e-3;
                let sinr = p_max * ch.h_d[d] / (from_c + from_d + noise);
                self.snapshot.quality_db[(k + d) * n_sub + n] = linear_to_db(sinr);
            }
        }
    }

    /// Kind of link `l`.
    pub fn kind(&self, l: usize) -> DeviceKind {
        self.profiles[l].kind
    }
}
