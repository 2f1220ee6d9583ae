//! Per-episode / per-window summaries of slot outcomes.

use crate::env::SlotOutcome;
use crate::scenario::{LinkProfile, Service};

/// One row of a metrics file.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub index: u64,
    /// Mean network EE over the slots, bps/Hz/W.
    pub mean_ee: f64,
    pub success: f64,
    pub success_urllc: f64,
    pub success_normal: f64,
    pub mean_reward: f64,
    pub epsilon: f64,
    pub transfer_events: u64,
    pub coop_events: u64,
}

/// Success and failure counts for one service class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub ok: u64,
    pub total: u64,
}

impl Tally {
    pub fn add(&mut self, (ok, total): (u64, u64)) {
        self.ok += ok;
        self.total += total;
    }

    /// Fraction of successful events; a window without events counts as 1.
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.ok as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    ee_sum: f64,
    slots: u64,
    pub all: Tally,
    pub urllc: Tally,
    pub normal: Tally,
    reward_sum: f64,
    reward_n: u64,
    pub transfer_events: u64,
    pub coop_events: u64,
}

impl MetricsAccumulator {
    pub fn record(&mut self, outcome: &SlotOutcome, profiles: &[LinkProfile]) {
        self.ee_sum += outcome.network_ee;
        self.slots += 1;
        self.all.add(outcome.success_counts(profiles, None));
        self.urllc.add(outcome.success_counts(profiles, Some(Service::Urllc)));
        self.normal.add(outcome.success_counts(profiles, Some(Service::Normal)));
        for o in outcome.links.iter().filter(|o| o.demand) {
            self.reward_sum += o.reward;
            self.reward_n += 1;
        }
    }

    pub fn slots(&self) -> u64 {
        self.slots
    }

    pub fn finish(&self, index: u64, epsilon: f64) -> EpisodeMetrics {
        EpisodeMetrics {
            index,
            mean_ee: if self.slots == 0 {
                0.0
            } else {
                self.ee_sum / self.slots as f64
            },
            success: self.all.fraction(),
            success_urllc: self.urllc.fraction(),
            success_normal: self.normal.fraction(),
            mean_reward: if self.reward_n == 0 {
                0.0
            } else {
                self.reward_sum / self.reward_n as f64
            },
            epsilon,
            transfer_events: self.transfer_events,
            coop_events: self.coop_events,
        }
    }
}
