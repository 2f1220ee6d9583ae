//! Per-agent observation encoding, discrete action space and QoS-aware reward.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::phy::{AssignmentMatrix, LinkRates};
use crate::scenario::{LinkProfile, ScenarioConfig, Service};

/// SINR range (dB) mapped onto `[0, 1]` in the quality features.
pub const QUALITY_DB_RANGE: (f64, f64) = (-20.0, 40.0);

/// Length of the success window behind `qos_satisfaction`.
pub const QOS_WINDOW: usize = 50;

/// One decision of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentAction {
    Idle,
    Transmit { subchannel: usize, power_level: usize },
}

impl AgentAction {
    /// Transmit actions occupy `n * P + p`; idle is the last index `N * P`.
    pub fn to_index(self, num_subchannels: usize, num_levels: usize) -> usize {
        match self {
            AgentAction::Idle => num_subchannels * num_levels,
            AgentAction::Transmit {
                subchannel,
                power_level,
            } => subchannel * num_levels + power_level,
        }
    }

    pub fn from_index(index: usize, num_subchannels: usize, num_levels: usize) -> Result<Self> {
        let idle = num_subchannels * num_levels;
        if index == idle {
            Ok(AgentAction::Idle)
        } else if index < idle {
            Ok(AgentAction::Transmit {
                subchannel: index / num_levels,
                power_level: index % num_levels,
            })
        } else {
            Err(Error::IndexOutOfRange {
                what: "action",
                index,
                len: idle + 1,
            })
        }
    }

    pub fn subchannel(self) -> Option<usize> {
        match self {
            AgentAction::Idle => None,
            AgentAction::Transmit { subchannel, .. } => Some(subchannel),
        }
    }
}

/// Index helpers bound to a scenario's action layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionSpace {
    pub num_subchannels: usize,
    pub num_levels: usize,
}

impl ActionSpace {
    pub fn new(config: &ScenarioConfig) -> Self {
        Self {
            num_subchannels: config.num_subchannels,
            num_levels: config.power_levels_mw.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.num_subchannels * self.num_levels + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn idle(&self) -> usize {
        self.num_subchannels * self.num_levels
    }

    pub fn decode(&self, index: usize) -> AgentAction {
        AgentAction::from_index(index, self.num_subchannels, self.num_levels)
            .expect("action index within action space")
    }

    pub fn encode(&self, action: AgentAction) -> usize {
        action.to_index(self.num_subchannels, self.num_levels)
    }

    /// Subchannel used by an action index, if any.
    pub fn subchannel_of(&self, index: usize) -> Option<usize> {
        (index < self.idle()).then(|| index / self.num_levels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EeMode {
    PerLink,
    Network,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardConfig {
    pub c1: f64,
    pub c2: f64,
    pub ee_mode: EeMode,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 2.0,
            ee_mode: EeMode::PerLink,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "reward weights must be positive, got c1 = {}, c2 = {}",
                self.c1, self.c2
            )));
        }
        Ok(())
    }
}

/// Observation vector of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub channel_busy: Vec<f64>,
    pub channel_quality: Vec<f64>,
    pub traffic_load: f64,
    pub qos_satisfaction: f64,
}

impl AgentState {
    pub fn dim(&self) -> usize {
        self.channel_busy.len() + self.channel_quality.len() + 2
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        self.write_into(&mut v);
        v
    }

    pub fn write_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.channel_busy);
        out.extend_from_slice(&self.channel_quality);
        out.push(self.traffic_load);
        out.push(self.qos_satisfaction);
    }
}

/// Sliding success fraction over the last `capacity` demand events; reads 1
/// before any event is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct QosWindow {
    capacity: usize,
    events: VecDeque<bool>,
    successes: usize,
}

impl QosWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            events: VecDeque::with_capacity(capacity.max(1)),
            successes: 0,
        }
    }

    pub fn push(&mut self, success: bool) {
        if self.events.len() == self.capacity {
            if let Some(true) = self.events.pop_front() {
                self.successes -= 1;
            }
        }
        self.events.push_back(success);
        if success {
            self.successes += 1;
        }
    }

    pub fn value(&self) -> f64 {
        if self.events.is_empty() {
            1.0
        } else {
            self.successes as f64 / self.events.len() as f64
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

impl Default for QosWindow {
    fn default() -> Self {
        Self::new(QOS_WINDOW)
    }
}

/// What each link observed at the end of the previous slot.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSnapshot {
    pub num_subchannels: usize,
    /// Subchannel used by each link in the previous slot.
    pub previous_choice: Vec<Option<usize>>,
    /// Measured SINR in dB per `[link * N + n]`; `-inf` when nothing was measured.
    pub quality_db: Vec<f64>,
    /// Bits waiting at each link at decision time.
    pub queued_bits: Vec<f64>,
    pub qos_satisfaction: Vec<f64>,
}

impl EnvSnapshot {
    /// State of a network before any slot has been played.
    pub fn empty(num_links: usize, num_subchannels: usize) -> Self {
        Self {
            num_subchannels,
            previous_choice: vec![None; num_links],
            quality_db: vec![f64::NEG_INFINITY; num_links * num_subchannels],
            queued_bits: vec![0.0; num_links],
            qos_satisfaction: vec![1.0; num_links],
        }
    }

    pub fn num_links(&self) -> usize {
        self.previous_choice.len()
    }
}

/// Maps a dB value affinely from [`QUALITY_DB_RANGE`] into `[0, 1]` with clipping.
pub fn quality_feature(sinr_db: f64) -> f64 {
    let (lo, hi) = QUALITY_DB_RANGE;
    if sinr_db.is_nan() {
        return 0.0;
    }
    ((sinr_db - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Observation of `link_id`. Traffic load is queued bits over `10·L̄`.
pub fn encode_state(
    link_id: usize,
    snapshot: &EnvSnapshot,
    profile: &LinkProfile,
) -> Result<AgentState> {
    let z = snapshot.num_links();
    if link_id >= z {
        return Err(Error::IndexOutOfRange {
            what: "link",
            index: link_id,
            len: z,
        });
    }
    let n_sub = snapshot.num_subchannels;
    let mut busy = vec![0.0; n_sub];
    for (other, choice) in snapshot.previous_choice.iter().enumerate() {
        if other != link_id {
            if let Some(n) = *choice {
                busy[n] = 1.0;
            }
        }
    }
    let quality = snapshot.quality_db[link_id * n_sub..(link_id + 1) * n_sub]
        .iter()
        .map(|&db| quality_feature(db))
        .collect();
    let traffic_load =
        (snapshot.queued_bits[link_id] / (10.0 * profile.mean_packet_bits)).clamp(0.0, 1.0);
    Ok(AgentState {
        channel_busy: busy,
        channel_quality: quality,
        traffic_load,
        qos_satisfaction: snapshot.qos_satisfaction[link_id].clamp(0.0, 1.0),
    })
}

/// Failure indicators of one link in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QosIndicators {
    pub urllc: bool,
    pub normal: bool,
}

impl QosIndicators {
    pub fn success(&self) -> bool {
        !self.urllc && !self.normal
    }
}

/// URLLC links fail on a rate below the latency bound or any used subchannel
/// below the SINR threshold; normal links fail on a rate below `R_min`.
pub fn qos_indicators(
    profile: &LinkProfile,
    rate: f64,
    used_sinrs: &[f64],
    rate_min_urllc: Option<f64>,
) -> QosIndicators {
    match profile.service {
        Service::Urllc => {
            let bound = rate_min_urllc.unwrap_or(0.0);
            let sinr_min = profile.qos.sinr_min_linear();
            let outage = used_sinrs.iter().any(|&s| s < sinr_min);
            QosIndicators {
                urllc: rate < bound || outage || used_sinrs.is_empty(),
                normal: false,
            }
        }
        Service::Normal => QosIndicators {
            urllc: false,
            normal: rate < profile.qos.rate_min_normal,
        },
    }
}

pub fn reward(ee_value: f64, indicators: QosIndicators, config: &RewardConfig) -> f64 {
    ee_value
        - config.c1 * f64::from(u8::from(indicators.urllc))
        - config.c2 * f64::from(u8::from(indicators.normal))
}

/// `η_i`: own rate over own transmit power plus circuit power, or the network
/// EE shared by every link.
pub fn per_link_ee(
    link: usize,
    rates: &LinkRates,
    assignment: &AssignmentMatrix,
    config: &ScenarioConfig,
    mode: EeMode,
) -> f64 {
    match mode {
        EeMode::PerLink => {
            let p = assignment.link_power_mw(link) * 1e-3;
            rates.rate(link) / (p + config.circuit_power_w())
        }
        EeMode::Network => crate::phy::network_ee(assignment, rates, config),
    }
}
