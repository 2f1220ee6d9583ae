//! Flat `key = value` experiment configuration files.
//!
//! Every key is optional and falls back to the built-in default; unknown keys
//! are rejected. Physical quantities carry their unit in the key name
//! (`_m`, `_hz`, `_dbm`, `_mw`, `_s`, `_db`). `reliability` is a shorthand that
//! sets both the latency-violation and the outage targets to `1 - reliability`.
//!
//! ```toml
//! num_cdevices = 20
//! arrival_rate = 0.03
//! latency_max_s = 0.01
//! reliability = 0.99999
//! c1 = 100.0
//! hidden_layers = [64, 64]
//! seeds = [1, 2, 3, 4, 5]
//! ```

use std::path::Path;

use toml::{Table, Value};

use crate::baselines::GmaCsi;
use crate::coop::{CoopConfig, JointMode};
use crate::dqn::TrainConfig;
use crate::error::{Error, Result};
use crate::mdp::{EeMode, RewardConfig};
use crate::scenario::ScenarioConfig;

/// Everything an experiment needs besides the approach and sweep choice.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub reward: RewardConfig,
    pub train: TrainConfig,
    pub coop: CoopConfig,
    pub gma_csi: GmaCsi,
    pub gma_group_size: usize,
    pub gma_max_sweeps: usize,
    /// Greedy slots per evaluation cell.
    pub eval_slots: usize,
    /// Slots per metrics row during evaluation.
    pub eval_window: usize,
    /// Keep learning while evaluating.
    pub eval_learning: bool,
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            reward: RewardConfig::default(),
            train: TrainConfig::default(),
            coop: CoopConfig::default(),
            gma_csi: GmaCsi::LargeScale,
            gma_group_size: 5,
            gma_max_sweeps: 10,
            eval_slots: 2000,
            eval_window: 200,
            eval_learning: false,
            seeds: vec![1, 2, 3, 4, 5],
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.reward.validate()?;
        self.train.validate()?;
        self.coop.transfer.validate()?;
        if self.coop.group_size == 0 || self.gma_group_size == 0 {
            return Err(Error::InvalidConfig("group sizes must be at least 1".into()));
        }
        if self.eval_window == 0 {
            return Err(Error::InvalidConfig("eval_window must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        Ok(())
    }
}

fn bad(key: &str, what: &str) -> Error {
    Error::InvalidConfig(format!("key `{key}`: expected {what}"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(key, "a number")),
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(bad(key, "a non-negative integer")),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    as_u64(key, v).map(|x| x as usize)
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    v.as_bool().ok_or_else(|| bad(key, "true or false"))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| bad(key, "a string"))
}

fn as_list<T>(key: &str, v: &Value, item: fn(&str, &Value) -> Result<T>) -> Result<Vec<T>> {
    v.as_array()
        .ok_or_else(|| bad(key, "an array"))?
        .iter()
        .map(|x| item(key, x))
        .collect()
}

pub fn ee_mode_name(m: EeMode) -> &'static str {
    match m {
        EeMode::PerLink => "per_link",
        EeMode::Network => "network",
    }
}

pub fn joint_mode_name(m: JointMode) -> &'static str {
    match m {
        JointMode::SequentialGreedy => "sequential_greedy",
        JointMode::Exhaustive => "exhaustive",
    }
}

pub fn gma_csi_name(c: GmaCsi) -> &'static str {
    match c {
        GmaCsi::LargeScale => "large_scale",
        GmaCsi::Instantaneous => "instantaneous",
    }
}

fn set(cfg: &mut ExperimentConfig, key: &str, v: &Value) -> Result<()> {
    let s = &mut cfg.scenario;
    let t = &mut cfg.train;
    let tr = &mut cfg.coop.transfer;
    match key {
        "cell_radius_m" => s.cell_radius_m = as_f64(key, v)?,
        "num_cdevices" => s.num_cdevices = as_usize(key, v)?,
        "num_d2d_pairs" => s.num_d2d_pairs = as_usize(key, v)?,
        "num_subchannels" => s.num_subchannels = as_usize(key, v)?,
        "subchannel_bandwidth_hz" => s.subchannel_bandwidth_hz = as_f64(key, v)?,
        "max_d2d_distance_m" => s.max_d2d_distance_m = as_f64(key, v)?,
        "noise_power_dbm" => s.noise_power_dbm = as_f64(key, v)?,
        "max_power_c_mw" => s.max_power_c_mw = as_f64(key, v)?,
        "max_power_d_mw" => s.max_power_d_mw = as_f64(key, v)?,
        "circuit_power_mw" => s.circuit_power_mw = as_f64(key, v)?,
        "power_levels_mw" => s.power_levels_mw = as_list(key, v, as_f64)?,
        "carrier_frequency_hz" => s.carrier_frequency_hz = as_f64(key, v)?,
        "slot_duration_s" => s.slot_duration_s = as_f64(key, v)?,
        "pathloss_exponent_cellular" => s.channel.pathloss_exponent_cellular = as_f64(key, v)?,
        "pathloss_exponent_d2d" => s.channel.pathloss_exponent_d2d = as_f64(key, v)?,
        "reference_loss_cellular_db" => s.channel.reference_loss_cellular_db = as_f64(key, v)?,
        "reference_loss_d2d_db" => s.channel.reference_loss_d2d_db = as_f64(key, v)?,
        "reference_distance_m" => s.channel.reference_distance_m = as_f64(key, v)?,
        "fading" => s.channel.fading = as_bool(key, v)?,
        "normal_fraction" => s.traffic.normal_fraction = as_f64(key, v)?,
        "arrival_rate" => s.traffic.arrival_rate = as_f64(key, v)?,
        "urllc_packet_bits" => s.traffic.urllc_packet_bits = as_f64(key, v)?,
        "normal_packet_bits" => s.traffic.normal_packet_bits = as_f64(key, v)?,
        "sinr_min_db" => s.qos.sinr_min_db = as_f64(key, v)?,
        "latency_max_s" => s.qos.latency_max_s = as_f64(key, v)?,
        "p_latency_max" => s.qos.p_latency_max = as_f64(key, v)?,
        "p_outage_max" => s.qos.p_outage_max = as_f64(key, v)?,
        "reliability" => s.qos.set_reliability(as_f64(key, v)?),
        "rate_min_normal" => s.qos.rate_min_normal = as_f64(key, v)?,
        "t_pc_s" => s.qos.t_pc_s = as_f64(key, v)?,
        "c1" => cfg.reward.c1 = as_f64(key, v)?,
        "c2" => cfg.reward.c2 = as_f64(key, v)?,
        "ee_mode" => {
            cfg.reward.ee_mode = match as_str(key, v)? {
                "per_link" => EeMode::PerLink,
                "network" => EeMode::Network,
                _ => return Err(bad(key, "\"per_link\" or \"network\"")),
            }
        }
        "learning_rate_q" => t.learning_rate_q = as_f64(key, v)?,
        "weight_step" => t.weight_step = as_f64(key, v)?,
        "discount" => t.discount = as_f64(key, v)?,
        "epsilon_start" => t.epsilon_start = as_f64(key, v)?,
        "epsilon_min" => t.epsilon_min = as_f64(key, v)?,
        "epsilon_decay" => t.epsilon_decay = as_f64(key, v)?,
        "batch_size" => t.batch_size = as_usize(key, v)?,
        "episodes" => t.episodes = as_usize(key, v)?,
        "steps_per_episode" => t.steps_per_episode = as_usize(key, v)?,
        "target_sync_period" => t.target_sync_period = as_usize(key, v)?,
        "replay_capacity" => t.replay_capacity = as_usize(key, v)?,
        "hidden_layers" => t.hidden_layers = as_list(key, v, as_usize)?,
        "updates_per_episode" => t.updates_per_episode = as_usize(key, v)?,
        "reward_scale" => t.reward_scale = as_f64(key, v)?,
        "group_size" => cfg.coop.group_size = as_usize(key, v)?,
        "joint_mode" => {
            cfg.coop.mode = match as_str(key, v)? {
                "sequential_greedy" => JointMode::SequentialGreedy,
                "exhaustive" => JointMode::Exhaustive,
                _ => return Err(bad(key, "\"sequential_greedy\" or \"exhaustive\"")),
            }
        }
        "transfer_enabled" => tr.enabled = as_bool(key, v)?,
        "transfer_radius" => tr.radius = as_f64(key, v)?,
        "transfer_mu0" => tr.mu0 = as_f64(key, v)?,
        "transfer_kappa" => tr.kappa = as_f64(key, v)?,
        "transfer_mu_floor" => tr.mu_floor = as_f64(key, v)?,
        "poor_threshold" => tr.poor_threshold = as_f64(key, v)?,
        "poor_slots" => tr.poor_slots = as_usize(key, v)?,
        "new_agents" => tr.new_agents = as_list(key, v, as_usize)?,
        "gma_csi" => {
            cfg.gma_csi = match as_str(key, v)? {
                "large_scale" => GmaCsi::LargeScale,
                "instantaneous" => GmaCsi::Instantaneous,
                _ => return Err(bad(key, "\"large_scale\" or \"instantaneous\"")),
            }
        }
        "gma_group_size" => cfg.gma_group_size = as_usize(key, v)?,
        "gma_max_sweeps" => cfg.gma_max_sweeps = as_usize(key, v)?,
        "eval_slots" => cfg.eval_slots = as_usize(key, v)?,
        "eval_window" => cfg.eval_window = as_usize(key, v)?,
        "eval_learning" => cfg.eval_learning = as_bool(key, v)?,
        "seeds" => cfg.seeds = as_list(key, v, as_u64)?,
        "seed" => cfg.scenario.rng_seed = as_u64(key, v)?,
        _ => return Err(Error::InvalidConfig(format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Parses a configuration on top of the defaults and validates the result.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
    let mut cfg = ExperimentConfig::default();
    // `reliability` first so explicit probabilities win.
    if let Some(v) = table.get("reliability") {
        set(&mut cfg, "reliability", v)?;
    }
    for (k, v) in &table {
        if k != "reliability" {
            set(&mut cfg, k, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Float(x)).collect())
}

fn ints<T: Copy + TryInto<i64>>(v: &[T]) -> Value {
    Value::Array(
        v.iter()
            .map(|&x| Value::Integer(x.try_into().unwrap_or(i64::MAX)))
            .collect(),
    )
}

/// Fully resolved configuration, every key spelled out, in file syntax.
pub fn dump_config(cfg: &ExperimentConfig) -> String {
    let s = &cfg.scenario;
    let t = &cfg.train;
    let tr = &cfg.coop.transfer;
    let f = Value::Float;
    let i = |x: usize| Value::Integer(x as i64);
    let entries: Vec<(&str, Value)> = vec![
        ("cell_radius_m", f(s.cell_radius_m)),
        ("num_cdevices", i(s.num_cdevices)),
        ("num_d2d_pairs", i(s.num_d2d_pairs)),
        ("num_subchannels", i(s.num_subchannels)),
        ("subchannel_bandwidth_hz", f(s.subchannel_bandwidth_hz)),
        ("max_d2d_distance_m", f(s.max_d2d_distance_m)),
        ("noise_power_dbm", f(s.noise_power_dbm)),
        ("max_power_c_mw", f(s.max_power_c_mw)),
        ("max_power_d_mw", f(s.max_power_d_mw)),
        ("circuit_power_mw", f(s.circuit_power_mw)),
        ("power_levels_mw", floats(&s.power_levels_mw)),
        ("carrier_frequency_hz", f(s.carrier_frequency_hz)),
        ("slot_duration_s", f(s.slot_duration_s)),
        ("seed", Value::Integer(s.rng_seed as i64)),
        ("pathloss_exponent_cellular", f(s.channel.pathloss_exponent_cellular)),
        ("pathloss_exponent_d2d", f(s.channel.pathloss_exponent_d2d)),
        ("reference_loss_cellular_db", f(s.channel.reference_loss_cellular_db)),
        ("reference_loss_d2d_db", f(s.channel.reference_loss_d2d_db)),
        ("reference_distance_m", f(s.channel.reference_distance_m)),
        ("fading", Value::Boolean(s.channel.fading)),
        ("normal_fraction", f(s.traffic.normal_fraction)),
        ("arrival_rate", f(s.traffic.arrival_rate)),
        ("urllc_packet_bits", f(s.traffic.urllc_packet_bits)),
        ("normal_packet_bits", f(s.traffic.normal_packet_bits)),
        ("sinr_min_db", f(s.qos.sinr_min_db)),
        ("latency_max_s", f(s.qos.latency_max_s)),
        ("p_latency_max", f(s.qos.p_latency_max)),
        ("p_outage_max", f(s.qos.p_outage_max)),
        ("rate_min_normal", f(s.qos.rate_min_normal)),
        ("t_pc_s", f(s.qos.t_pc_s)),
        ("c1", f(cfg.reward.c1)),
        ("c2", f(cfg.reward.c2)),
        ("ee_mode", Value::String(ee_mode_name(cfg.reward.ee_mode).into())),
        ("learning_rate_q", f(t.learning_rate_q)),
        ("weight_step", f(t.weight_step)),
        ("discount", f(t.discount)),
        ("epsilon_start", f(t.epsilon_start)),
        ("epsilon_min", f(t.epsilon_min)),
        ("epsilon_decay", f(t.epsilon_decay)),
        ("batch_size", i(t.batch_size)),
        ("episodes", i(t.episodes)),
        ("steps_per_episode", i(t.steps_per_episode)),
        ("target_sync_period", i(t.target_sync_period)),
        ("replay_capacity", i(t.replay_capacity)),
        ("hidden_layers", ints(&t.hidden_layers)),
        ("updates_per_episode", i(t.updates_per_episode)),
        ("reward_scale", f(t.reward_scale)),
        ("group_size", i(cfg.coop.group_size)),
        ("joint_mode", Value::String(joint_mode_name(cfg.coop.mode).into())),
        ("transfer_enabled", Value::Boolean(tr.enabled)),
        ("transfer_radius", f(tr.radius)),
        ("transfer_mu0", f(tr.mu0)),
        ("transfer_kappa", f(tr.kappa)),
        ("transfer_mu_floor", f(tr.mu_floor)),
        ("poor_threshold", f(tr.poor_threshold)),
        ("poor_slots", i(tr.poor_slots)),
        ("new_agents", ints(&tr.new_agents)),
        ("gma_csi", Value::String(gma_csi_name(cfg.gma_csi).into())),
        ("gma_group_size", i(cfg.gma_group_size)),
        ("gma_max_sweeps", i(cfg.gma_max_sweeps)),
        ("eval_slots", i(cfg.eval_slots)),
        ("eval_window", i(cfg.eval_window)),
        ("eval_learning", Value::Boolean(cfg.eval_learning)),
        ("seeds", ints(&cfg.seeds)),
    ];
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}
