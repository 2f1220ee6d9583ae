//! Network scenario: radio constants, device placement and per-slot channel gains.
//!
//! Links are indexed `0..K` for C-devices followed by `K..K+M` for D2D pairs.
//! Every random draw comes from a ChaCha stream derived from `(rng_seed, purpose,
//! index)`, so topologies and channel realizations are pure functions of the
//! configuration and the slot index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Purpose tags used to derive independent random streams from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Topology = 1,
    Channel = 2,
    Traffic = 3,
    NetInit = 4,
    Explore = 5,
    Replay = 6,
    Oracle = 7,
    Baseline = 8,
}

/// Deterministic generator for `(seed, tag, stream)`.
pub fn stream_rng(seed: u64, tag: StreamTag, stream: u64) -> ChaCha8Rng {
    let mixed = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((tag as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    let mut rng = ChaCha8Rng::seed_from_u64(mixed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceKind {
    Cellular,
    D2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Service {
    Urllc,
    Normal,
}

/// Per-link QoS targets.
#[derive(Debug, Clone, PartialEq)]
pub struct QosThresholds {
    pub sinr_min_db: f64,
    pub latency_max_s: f64,
    pub p_latency_max: f64,
    pub p_outage_max: f64,
    /// Minimum spectral rate for normal links, bps/Hz.
    pub rate_min_normal: f64,
    pub t_pc_s: f64,
}

impl Default for QosThresholds {
    fn default() -> Self {
        Self {
            sinr_min_db: 5.0,
            latency_max_s: 10e-3,
            p_latency_max: 1e-5,
            p_outage_max: 1e-5,
            rate_min_normal: 3.5,
            t_pc_s: 0.3e-3,
        }
    }
}

impl QosThresholds {
    /// Sets both violation probabilities from a reliability target `r` as `1 - r`.
    pub fn set_reliability(&mut self, reliability: f64) {
        self.p_latency_max = 1.0 - reliability;
        self.p_outage_max = 1.0 - reliability;
    }

    pub fn sinr_min_linear(&self) -> f64 {
        db_to_linear(self.sinr_min_db)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_latency_max", self.p_latency_max),
            ("p_outage_max", self.p_outage_max),
        ] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} = {p} must lie in (0, 1)")));
            }
        }
        if !(self.t_pc_s >= 0.0 && self.latency_max_s > self.t_pc_s) {
            return Err(Error::InvalidConfig(format!(
                "latency_max ({} s) must exceed t_pc ({} s) >= 0",
                self.latency_max_s, self.t_pc_s
            )));
        }
        if !(self.rate_min_normal >= 0.0) || !self.sinr_min_db.is_finite() {
            return Err(Error::InvalidConfig("rate/SINR thresholds must be finite".into()));
        }
        Ok(())
    }
}

/// Log-distance path loss with optional unit-mean exponential fading.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub pathloss_exponent_cellular: f64,
    pub pathloss_exponent_d2d: f64,
    /// Loss at the reference distance, dB.
    pub reference_loss_cellular_db: f64,
    pub reference_loss_d2d_db: f64,
    pub reference_distance_m: f64,
    pub fading: bool,
}

impl Default for ChannelModel {
    fn default() -> Self {
        // 128.1 + 37.6 log10(d_km) and 148 + 40 log10(d_km) rewritten around d0 = 1 m.
        Self {
            pathloss_exponent_cellular: 3.76,
            pathloss_exponent_d2d: 4.0,
            reference_loss_cellular_db: 15.3,
            reference_loss_d2d_db: 28.0,
            reference_distance_m: 1.0,
            fading: true,
        }
    }
}

/// Traffic mix: which share of links carries normal (min-rate) service and the
/// URLLC packet process.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub normal_fraction: f64,
    /// Poisson arrival rate of URLLC packets, packets per slot.
    pub arrival_rate: f64,
    pub urllc_packet_bits: f64,
    pub normal_packet_bits: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            normal_fraction: 0.2,
            arrival_rate: 0.03,
            urllc_packet_bits: 8192.0,
            normal_packet_bits: 8192.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub num_cdevices: usize,
    pub num_d2d_pairs: usize,
    pub num_subchannels: usize,
    pub subchannel_bandwidth_hz: f64,
    pub max_d2d_distance_m: f64,
    pub noise_power_dbm: f64,
    pub max_power_c_mw: f64,
    pub max_power_d_mw: f64,
    pub circuit_power_mw: f64,
    pub power_levels_mw: Vec<f64>,
    pub carrier_frequency_hz: f64,
    pub slot_duration_s: f64,
    pub rng_seed: u64,
    pub channel: ChannelModel,
    pub traffic: TrafficConfig,
    pub qos: QosThresholds,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 500.0,
            num_cdevices: 20,
            num_d2d_pairs: 10,
            num_subchannels: 16,
            subchannel_bandwidth_hz: 1e6,
            max_d2d_distance_m: 75.0,
            noise_power_dbm: -114.0,
            max_power_c_mw: 500.0,
            max_power_d_mw: 500.0,
            circuit_power_mw: 50.0,
            power_levels_mw: vec![50.0, 150.0, 300.0, 500.0],
            carrier_frequency_hz: 2e9,
            slot_duration_s: 1e-3,
            rng_seed: 1,
            channel: ChannelModel::default(),
            traffic: TrafficConfig::default(),
            qos: QosThresholds::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn num_links(&self) -> usize {
        self.num_cdevices + self.num_d2d_pairs
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_w(self.noise_power_dbm)
    }

    pub fn circuit_power_w(&self) -> f64 {
        self.circuit_power_mw * 1e-3
    }

    pub fn max_power_mw(&self, kind: DeviceKind) -> f64 {
        match kind {
            DeviceKind::Cellular => self.max_power_c_mw,
            DeviceKind::D2d => self.max_power_d_mw,
        }
    }

    pub fn link_kind(&self, link: usize) -> DeviceKind {
        if link < self.num_cdevices {
            DeviceKind::Cellular
        } else {
            DeviceKind::D2d
        }
    }

    /// Number of discrete actions: one per (subchannel, power level) plus idle.
    pub fn num_actions(&self) -> usize {
        self.num_subchannels * self.power_levels_mw.len() + 1
    }

    /// Length of the per-agent observation vector.
    pub fn state_dim(&self) -> usize {
        2 * self.num_subchannels + 2
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_subchannels == 0 {
            return bad("num_subchannels must be at least 1".into());
        }
        if self.num_links() == 0 {
            return bad("at least one link (C-device or D2D pair) is required".into());
        }
        if !(self.cell_radius_m > 0.0) {
            return bad(format!("cell_radius = {} must be positive", self.cell_radius_m));
        }
        if !(self.max_d2d_distance_m > 0.0) {
            return bad(format!(
                "max_d2d_distance = {} must be positive",
                self.max_d2d_distance_m
            ));
        }
        if self.max_d2d_distance_m >= self.cell_radius_m {
            return bad(format!(
                "max_d2d_distance ({}) must be smaller than cell_radius ({})",
                self.max_d2d_distance_m, self.cell_radius_m
            ));
        }
        if self.power_levels_mw.is_empty() {
            return bad("power_levels must not be empty".into());
        }
        if self.power_levels_mw.windows(2).any(|w| w[0] >= w[1]) {
            return bad("power_levels must be strictly increasing".into());
        }
        let top = self.max_power_c_mw.max(self.max_power_d_mw);
        if self.power_levels_mw.iter().any(|&p| !(p > 0.0) || p > top) {
            return bad(format!("power levels must lie in (0, {top}] mW"));
        }
        if self.num_cdevices > 0 && self.power_levels_mw[0] > self.max_power_c_mw {
            return bad("no power level is usable by C-devices".into());
        }
        if self.num_d2d_pairs > 0 && self.power_levels_mw[0] > self.max_power_d_mw {
            return bad("no power level is usable by D2D pairs".into());
        }
        if !(self.subchannel_bandwidth_hz > 0.0 && self.slot_duration_s > 0.0) {
            return bad("bandwidth and slot duration must be positive".into());
        }
        if !(self.circuit_power_mw > 0.0) {
            return bad("circuit power must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.traffic.normal_fraction) {
            return bad("normal_fraction must lie in [0, 1]".into());
        }
        if !(self.traffic.arrival_rate >= 0.0) {
            return bad("arrival_rate must be non-negative".into());
        }
        if !(self.traffic.urllc_packet_bits > 0.0 && self.traffic.normal_packet_bits > 0.0) {
            return bad("packet sizes must be positive".into());
        }
        let ch = &self.channel;
        if !(ch.reference_distance_m > 0.0
            && ch.pathloss_exponent_cellular > 0.0
            && ch.pathloss_exponent_d2d > 0.0)
        {
            return bad("path-loss exponents and reference distance must be positive".into());
        }
        self.qos.validate()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Static per-link traffic and QoS description.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkProfile {
    pub link_id: usize,
    pub kind: DeviceKind,
    pub service: Service,
    /// Packets per slot.
    pub arrival_rate: f64,
    pub mean_packet_bits: f64,
    pub qos: QosThresholds,
}

/// Assigns services: the first `round(normal_fraction * K)` C-devices and the
/// first `round(normal_fraction * M)` D2D pairs carry normal service, the rest
/// URLLC. Positions are i.i.d., so taking the leading indices is an unbiased pick.
pub fn link_profiles(config: &ScenarioConfig) -> Vec<LinkProfile> {
    let k = config.num_cdevices;
    let m = config.num_d2d_pairs;
    let normal_c = (config.traffic.normal_fraction * k as f64).round() as usize;
    let normal_d = (config.traffic.normal_fraction * m as f64).round() as usize;
    (0..k + m)
        .map(|link_id| {
            let kind = config.link_kind(link_id);
            let class_index = if link_id < k { link_id } else { link_id - k };
            let normal = match kind {
                DeviceKind::Cellular => class_index < normal_c,
                DeviceKind::D2d => class_index < normal_d,
            };
            let (service, arrival_rate, mean_packet_bits) = if normal {
                (Service::Normal, 0.0, config.traffic.normal_packet_bits)
            } else {
                (
                    Service::Urllc,
                    config.traffic.arrival_rate,
                    config.traffic.urllc_packet_bits,
                )
            };
            LinkProfile {
                link_id,
                kind,
                service,
                arrival_rate,
                mean_packet_bits,
                qos: config.qos.clone(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Device positions. The base station sits at the origin; D2D transmitter `m`
/// is paired with receiver `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub bs: Point,
    pub cdevices: Vec<Point>,
    pub d2d_tx: Vec<Point>,
    pub d2d_rx: Vec<Point>,
}

impl Topology {
    pub fn num_links(&self) -> usize {
        self.cdevices.len() + self.d2d_tx.len()
    }

    /// Representative location of a link: the C-device itself, or the midpoint
    /// of a D2D pair.
    pub fn link_position(&self, link: usize) -> Point {
        let k = self.cdevices.len();
        if link < k {
            self.cdevices[link]
        } else {
            let tx = self.d2d_tx[link - k];
            let rx = self.d2d_rx[link - k];
            Point {
                x: 0.5 * (tx.x + rx.x),
                y: 0.5 * (tx.y + rx.y),
            }
        }
    }
}

fn uniform_in_disc<R: Rng>(rng: &mut R, radius: f64) -> Point {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    Point {
        x: r * theta.cos(),
        y: r * theta.sin(),
    }
}

/// Places devices uniformly over the cell; each D2D receiver lies uniformly in
/// the ring `[1 m, max_d2d_distance]` around its transmitter and inside the cell.
pub fn generate_topology(config: &ScenarioConfig) -> Result<Topology> {
    config.validate()?;
    let mut rng = stream_rng(config.rng_seed, StreamTag::Topology, 0);
    let radius = config.cell_radius_m;
    let cdevices = (0..config.num_cdevices)
        .map(|_| uniform_in_disc(&mut rng, radius))
        .collect();

    let inner = 1.0f64.min(config.max_d2d_distance_m);
    let outer = config.max_d2d_distance_m;
    let mut d2d_tx = Vec::with_capacity(config.num_d2d_pairs);
    let mut d2d_rx = Vec::with_capacity(config.num_d2d_pairs);
    for _ in 0..config.num_d2d_pairs {
        let tx = uniform_in_disc(&mut rng, radius);
        let rx = loop {
            let r = (inner * inner + rng.gen::<f64>() * (outer * outer - inner * inner)).sqrt();
            let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let candidate = Point {
                x: tx.x + r * theta.cos(),
                y: tx.y + r * theta.sin(),
            };
            if candidate.norm() <= radius {
                break candidate;
            }
        };
        d2d_tx.push(tx);
        d2d_rx.push(rx);
    }
    Ok(Topology {
        bs: Point::ORIGIN,
        cdevices,
        d2d_tx,
        d2d_rx,
    })
}

/// Linear path gain `10^(-PL/10)` with `PL = PL0 + 10 η log10(d / d0)`;
/// distances below `d0` are clamped to `d0`.
pub fn pathloss_gain(distance_m: f64, exponent: f64, reference_loss_db: f64, d0: f64) -> f64 {
    let d = distance_m.max(d0);
    let loss_db = reference_loss_db + 10.0 * exponent * (d / d0).log10();
    db_to_linear(-loss_db)
}

/// Channel gains for one slot (linear power gains).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub num_c: usize,
    pub num_d: usize,
    /// C-device `k` to BS.
    pub h_c: Vec<f64>,
    /// D2D transmitter `m` to its receiver.
    pub h_d: Vec<f64>,
    /// C-device `k` to D2D receiver `m`, row-major `[k * M + m]`.
    pub g_cd: Vec<f64>,
    /// D2D transmitter `m` to BS.
    pub g_db: Vec<f64>,
    /// D2D transmitter `src` to D2D receiver `dst`, `[src * M + dst]`;
    /// the diagonal repeats `h_d`.
    pub g_dd: Vec<f64>,
}

impl ChannelState {
    pub fn g_cd(&self, k: usize, m: usize) -> f64 {
        self.g_cd[k * self.num_d + m]
    }

    pub fn g_dd(&self, src: usize, dst: usize) -> f64 {
        self.g_dd[src * self.num_d + dst]
    }
}

/// Block-fading channel realization for `slot_index`. Identical inputs always
/// produce identical gains.
pub fn sample_channel(topology: &Topology, config: &ScenarioConfig, slot_index: u64) -> ChannelState {
    let ch = &config.channel;
    let mut rng = stream_rng(config.rng_seed, StreamTag::Channel, slot_index);
    let mut fade = || -> f64 {
        if ch.fading {
            Exp1.sample(&mut rng)
        } else {
            1.0
        }
    };
    let cell = |d: f64| {
        pathloss_gain(
            d,
            ch.pathloss_exponent_cellular,
            ch.reference_loss_cellular_db,
            ch.reference_distance_m,
        )
    };
    let d2d = |d: f64| {
        pathloss_gain(
            d,
            ch.pathloss_exponent_d2d,
            ch.reference_loss_d2d_db,
            ch.reference_distance_m,
        )
    };

    let k_n = topology.cdevices.len();
    let m_n = topology.d2d_tx.len();
    let bs = topology.bs;

    let h_c: Vec<f64> = topology
        .cdevices
        .iter()
        .map(|p| cell(p.distance(&bs)) * fade())
        .collect();
    let h_d: Vec<f64> = (0..m_n)
        .map(|m| d2d(topology.d2d_tx[m].distance(&topology.d2d_rx[m])) * fade())
        .collect();
    let mut g_cd = Vec::with_capacity(k_n * m_n);
    for c in &topology.cdevices {
        for rx in &topology.d2d_rx {
            // C-device to D2D receiver is a device-to-device path.
            g_cd.push(d2d(c.distance(rx)) * fade());
        }
    }
    let g_db: Vec<f64> = topology
        .d2d_tx
        .iter()
        .map(|tx| cell(tx.distance(&bs)) * fade())
        .collect();
    let mut g_dd = Vec::with_capacity(m_n * m_n);
    for src in 0..m_n {
        for dst in 0..m_n {
            if src == dst {
                g_dd.push(h_d[src]);
            } else {
                g_dd.push(d2d(topology.d2d_tx[src].distance(&topology.d2d_rx[dst])) * fade());
            }
        }
    }
    ChannelState {
        num_c: k_n,
        num_d: m_n,
        h_c,
        h_d,
        g_cd,
        g_db,
        g_dd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_gives_same_topology() {
        let cfg = ScenarioConfig {
            rng_seed: 42,
            ..Default::default()
        };
        assert_eq!(generate_topology(&cfg).unwrap(), generate_topology(&cfg).unwrap());
    }

    #[test]
    fn single_d2d_pair_without_cdevices() {
        let cfg = ScenarioConfig {
            num_cdevices: 0,
            num_d2d_pairs: 1,
            ..Default::default()
        };
        let topo = generate_topology(&cfg).unwrap();
        assert!(topo.cdevices.is_empty());
        assert_eq!(topo.d2d_tx.len(), 1);
        assert_eq!(topo.d2d_rx.len(), 1);
    }

    #[test]
    fn rejects_non_positive_d2d_range() {
        for d in [0.0, -5.0] {
            let cfg = ScenarioConfig {
                max_d2d_distance_m: d,
                ..Default::default()
            };
            assert!(matches!(generate_topology(&cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn rejects_d2d_range_beyond_cell() {
        let cfg = ScenarioConfig {
            max_d2d_distance_m: 600.0,
            ..Default::default()
        };
        assert!(generate_topology(&cfg).is_err());
    }

    #[test]
    fn d2d_pairs_respect_range_over_many_samples() {
        let cfg = ScenarioConfig {
            num_cdevices: 0,
            num_d2d_pairs: 10_000,
            ..Default::default()
        };
        let topo = generate_topology(&cfg).unwrap();
        let max = topo
            .d2d_tx
            .iter()
            .zip(&topo.d2d_rx)
            .map(|(t, r)| t.distance(r))
            .fold(0.0f64, f64::max);
        assert!(max <= 75.0, "max pair distance {max}");
        assert!(topo
            .d2d_tx
            .iter()
            .chain(&topo.d2d_rx)
            .all(|p| p.norm() <= cfg.cell_radius_m));
    }

    #[test]
    fn doubling_distance_scales_gain_by_power_law() {
        let eta = 3.76;
        let g1 = pathloss_gain(120.0, eta, 15.3, 1.0);
        let g2 = pathloss_gain(240.0, eta, 15.3, 1.0);
        assert!((g2 / g1 - 2f64.powf(-eta)).abs() < 1e-12);
    }

    #[test]
    fn channel_is_reproducible_per_slot() {
        let cfg = ScenarioConfig::default();
        let topo = generate_topology(&cfg).unwrap();
        let a = sample_channel(&topo, &cfg, 17);
        let b = sample_channel(&topo, &cfg, 17);
        assert_eq!(a, b);
        let c = sample_channel(&topo, &cfg, 18);
        assert_ne!(a, c);
        assert!(a.h_c.iter().chain(&a.g_cd).chain(&a.g_dd).all(|&g| g > 0.0));
        assert_eq!(a.g_cd.len(), cfg.num_cdevices * cfg.num_d2d_pairs);
        assert_eq!(a.g_dd.len(), cfg.num_d2d_pairs * cfg.num_d2d_pairs);
    }

    #[test]
    fn gains_decrease_with_distance_without_fading() {
        let mut cfg = ScenarioConfig::default();
        cfg.channel.fading = false;
        let topo = generate_topology(&cfg).unwrap();
        let ch = sample_channel(&topo, &cfg, 0);
        let mut pairs: Vec<(f64, f64)> = topo
            .cdevices
            .iter()
            .zip(&ch.h_c)
            .map(|(p, &g)| (p.norm().max(1.0), g))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn rayleigh_power_fading_has_unit_mean() {
        let mut rng = stream_rng(9, StreamTag::Channel, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| -> f64 { Exp1.sample(&mut rng) }).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() <= 0.01, "mean {mean}");
    }

    #[test]
    fn service_mix_follows_normal_fraction() {
        let cfg = ScenarioConfig::default();
        let profiles = link_profiles(&cfg);
        let normal = profiles.iter().filter(|p| p.service == Service::Normal).count();
        assert_eq!(normal, 6);
        assert!(profiles
            .iter()
            .filter(|p| p.service == Service::Urllc)
            .all(|p| p.arrival_rate == cfg.traffic.arrival_rate));
    }
}
