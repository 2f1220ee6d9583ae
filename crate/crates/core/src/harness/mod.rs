//! Experiment orchestration: training and evaluation cells, CSV output,
//! across-seed aggregation and plot-ready figure tables.
//!
//! File layout inside the output directory:
//!
//! - `{approach}__train__seed{n}.csv` / `{approach}__train__aggregate.csv`
//! - `{approach}__{sweep}-{value}__seed{n}.csv` (plus `__events.csv`)
//! - `{approach}__{sweep}-{value}__aggregate.csv`
//! - `{approach}__{sweep}__summary.csv`, one row per sweep value
//! - `resolved_config.toml`
//!
//! Without a sweep the evaluation cell is named `{approach}__eval`.

pub mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::{GmaPolicy, RandomPolicy};
use crate::coop::CooperativePolicy;
use crate::dqn::{self, ActionPolicy, Agent, IndependentPolicy, PolicyEvent, TrainConfig};
use crate::env::{Network, SlotOutcome};
use crate::error::{Error, Result};
use crate::metrics::EpisodeMetrics;
use crate::scenario::{LinkProfile, ScenarioConfig, Service};

pub use config::{dump_config, load_config, parse_config, ExperimentConfig};

/// Header shared by every per-cell metrics file.
pub const METRICS_HEADER: [&str; 9] = [
    "index",
    "mean_ee",
    "success",
    "success_urllc",
    "success_normal",
    "mean_reward",
    "epsilon",
    "transfer_events",
    "coop_events",
];

/// Metric columns that are averaged across seeds.
const VALUE_COLUMNS: [&str; 8] = [
    "mean_ee",
    "success",
    "success_urllc",
    "success_normal",
    "mean_reward",
    "epsilon",
    "transfer_events",
    "coop_events",
];

/// Evaluation slots start here so they never replay training slots.
pub const EVAL_SLOT_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Approach {
    Proposed,
    FullyDistributed,
    CentralizedGma,
    Random,
}

impl Approach {
    pub const ALL: [Approach; 4] = [
        Approach::Proposed,
        Approach::FullyDistributed,
        Approach::CentralizedGma,
        Approach::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Approach::Proposed => "proposed",
            Approach::FullyDistributed => "fully_distributed",
            Approach::CentralizedGma => "centralized_g_ma",
            Approach::Random => "random",
        }
    }

    /// Whether the approach trains Q-networks.
    pub fn learns(self) -> bool {
        matches!(self, Approach::Proposed | Approach::FullyDistributed)
    }

    /// Fresh policy object for `env`.
    pub fn policy(self, env: &Network, cfg: &ExperimentConfig) -> Result<Box<dyn ActionPolicy>> {
        Ok(match self {
            Approach::Proposed => Box::new(CooperativePolicy::new(env, cfg.coop.clone())?),
            Approach::FullyDistributed => Box::new(IndependentPolicy::new()),
            Approach::CentralizedGma => {
                let mut p = GmaPolicy::new(env, cfg.gma_group_size, cfg.gma_csi)?;
                p.max_sweeps = cfg.gma_max_sweeps;
                Box::new(p)
            }
            Approach::Random => Box::new(RandomPolicy::new(env.config().rng_seed)),
        })
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Approach::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown approach `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    None,
    /// Reliability target as a fraction, e.g. 0.99999.
    Reliability,
    /// Latency bound in milliseconds.
    Latency,
    /// Packets per slot per URLLC link.
    ArrivalRate,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::None => "none",
            SweepVar::Reliability => "reliability",
            SweepVar::Latency => "latency",
            SweepVar::ArrivalRate => "arrival_rate",
        }
    }

    pub fn check_value(self, v: f64) -> Result<()> {
        let ok = match self {
            SweepVar::None => true,
            SweepVar::Reliability => v > 0.0 && v < 1.0,
            SweepVar::Latency => v > 0.0 && v.is_finite(),
            SweepVar::ArrivalRate => v >= 0.0 && v.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "{} sweep value {v} out of range",
                self.name()
            )))
        }
    }

    pub fn apply(self, scenario: &mut ScenarioConfig, v: f64) -> Result<()> {
        self.check_value(v)?;
        match self {
            SweepVar::None => {}
            SweepVar::Reliability => scenario.qos.set_reliability(v),
            SweepVar::Latency => scenario.qos.latency_max_s = v * 1e-3,
            SweepVar::ArrivalRate => scenario.traffic.arrival_rate = v,
        }
        Ok(())
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepVar::None,
            SweepVar::Reliability,
            SweepVar::Latency,
            SweepVar::ArrivalRate,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown sweep variable `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub config: ExperimentConfig,
    pub approaches: Vec<Approach>,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    /// Overrides `config.seeds` when non-empty.
    pub seeds: Vec<u64>,
    /// Run the training stage (for every approach, learned or not).
    pub train: bool,
}

impl ExperimentSpec {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            approaches: Approach::ALL.to_vec(),
            sweep: SweepVar::None,
            values: Vec::new(),
            seeds: Vec::new(),
            train: true,
        }
    }

    pub fn seeds(&self) -> &[u64] {
        if self.seeds.is_empty() {
            &self.config.seeds
        } else {
            &self.seeds
        }
    }

    /// Sweep points; a spec without a sweep has the single point `None`.
    pub fn points(&self) -> Vec<Option<f64>> {
        if self.sweep == SweepVar::None {
            vec![None]
        } else {
            self.values.iter().copied().map(Some).collect()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.approaches.is_empty() {
            return Err(Error::InvalidConfig("no approach selected".into()));
        }
        if self.sweep != SweepVar::None && self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep without values".into()));
        }
        for &v in &self.values {
            let mut s = self.config.scenario.clone();
            self.sweep.apply(&mut s, v)?;
            s.validate()?;
        }
        Ok(())
    }
}

pub fn cell_name(approach: Approach, sweep: SweepVar, value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{}__{}-{}", approach.name(), sweep.name(), v),
        None => format!("{}__eval", approach.name()),
    }
}

pub fn write_metrics(path: &Path, rows: &[EpisodeMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(METRICS_HEADER).map_err(|e| Error::csv(path, e))?;
    for m in rows {
        w.write_record([
            m.index.to_string(),
            m.mean_ee.to_string(),
            m.success.to_string(),
            m.success_urllc.to_string(),
            m.success_normal.to_string(),
            m.mean_reward.to_string(),
            m.epsilon.to_string(),
            m.transfer_events.to_string(),
            m.coop_events.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_field<T: FromStr>(path: &Path, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::InvalidConfig(format!("{}: bad value `{s}`", path.display())))
}

pub fn read_metrics(path: &Path) -> Result<Vec<EpisodeMetrics>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    if header.iter().ne(METRICS_HEADER) {
        return Err(Error::InvalidConfig(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        out.push(EpisodeMetrics {
            index: parse_field(path, &rec[0])?,
            mean_ee: parse_field(path, &rec[1])?,
            success: parse_field(path, &rec[2])?,
            success_urllc: parse_field(path, &rec[3])?,
            success_normal: parse_field(path, &rec[4])?,
            mean_reward: parse_field(path, &rec[5])?,
            epsilon: parse_field(path, &rec[6])?,
            transfer_events: parse_field(path, &rec[7])?,
            coop_events: parse_field(path, &rec[8])?,
        });
    }
    Ok(out)
}

fn values_of(m: &EpisodeMetrics) -> [f64; 8] {
    [
        m.mean_ee,
        m.success,
        m.success_urllc,
        m.success_normal,
        m.mean_reward,
        m.epsilon,
        m.transfer_events as f64,
        m.coop_events as f64,
    ]
}

/// Mean and standard error of the mean (zero for a single sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Row-wise across-seed aggregate: `index` then `{col}` and `{col}_stderr`
/// for every metric column.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub index: u64,
    pub mean: [f64; 8],
    pub stderr: [f64; 8],
}

pub fn aggregate(per_seed: &[Vec<EpisodeMetrics>]) -> Result<Vec<AggregateRow>> {
    let Some(first) = per_seed.first() else {
        return Err(Error::EmptyInput("no per-seed metrics to aggregate"));
    };
    if per_seed.iter().any(|r| r.len() != first.len()) {
        return Err(Error::InvalidConfig("per-seed files differ in length".into()));
    }
    Ok((0..first.len())
        .map(|i| {
            let mut mean = [0.0; 8];
            let mut stderr = [0.0; 8];
            for c in 0..8 {
                let xs: Vec<f64> = per_seed.iter().map(|r| values_of(&r[i])[c]).collect();
                (mean[c], stderr[c]) = mean_stderr(&xs);
            }
            AggregateRow {
                index: first[i].index,
                mean,
                stderr,
            }
        })
        .collect())
}

fn aggregate_header(first: &str) -> Vec<String> {
    let mut h = vec![first.to_string()];
    for c in VALUE_COLUMNS {
        h.push(c.to_string());
        h.push(format!("{c}_stderr"));
    }
    h
}

fn write_rows(path: &Path, header: &[String], rows: &[(String, [f64; 8], [f64; 8])]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for (key, mean, se) in rows {
        let mut rec = vec![key.clone()];
        for c in 0..8 {
            rec.push(mean[c].to_string());
            rec.push(se[c].to_string());
        }
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let rows: Vec<_> = rows
        .iter()
        .map(|r| (r.index.to_string(), r.mean, r.stderr))
        .collect();
    write_rows(path, &aggregate_header("index"), &rows)
}

fn write_events(path: &Path, events: &[PolicyEvent]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["slot", "agent", "kind", "expert", "mu"])
        .map_err(|e| Error::csv(path, e))?;
    for e in events {
        w.write_record([
            e.slot.to_string(),
            e.agent.to_string(),
            e.kind.to_string(),
            e.expert.map(|x| x.to_string()).unwrap_or_default(),
            e.mu.to_string(),
        ])
        .map_err(|err| Error::csv(path, err))?;
    }
    w.flush().map_err(|err| Error::io(path, err))
}

/// Fraction of link-slot transmissions of `class` (all when `None`) whose QoS
/// indicators are both clear.
pub fn success_probability(
    records: &[SlotOutcome],
    profiles: &[LinkProfile],
    class: Option<Service>,
) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no slot records"));
    }
    let (ok, total) = records
        .iter()
        .map(|r| r.success_counts(profiles, class))
        .fold((0, 0), |(a, b), (c, d)| (a + c, b + d));
    if total == 0 {
        return Err(Error::EmptyInput("no transmissions of the requested class"));
    }
    Ok(ok as f64 / total as f64)
}

/// Per-seed results of one approach.
#[derive(Debug, Clone, Default)]
pub struct ApproachResult {
    pub training: Vec<(u64, Vec<EpisodeMetrics>)>,
    /// `(sweep value, seed, windows)`.
    pub cells: Vec<(Option<f64>, u64, Vec<EpisodeMetrics>)>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub results: Vec<(Approach, ApproachResult)>,
    pub files: Vec<PathBuf>,
}

impl ExperimentOutput {
    pub fn get(&self, a: Approach) -> Option<&ApproachResult> {
        self.results.iter().find(|(x, _)| *x == a).map(|(_, r)| r)
    }
}

/// Trains `approach` on `scenario` (learned approaches update their agents,
/// the others only run their rule) and returns the agents and episode rows.
pub fn train_cell(
    approach: Approach,
    scenario: &ScenarioConfig,
    cfg: &ExperimentConfig,
) -> Result<(Network, Vec<Agent>, Vec<EpisodeMetrics>)> {
    let mut env = Network::new(scenario.clone(), cfg.reward.clone())?;
    let mut agents = agents_for(approach, &env, &cfg.train)?;
    let mut policy = approach.policy(&env, cfg)?;
    let rec = dqn::train(&mut env, &mut agents, policy.as_mut(), &cfg.train, &mut |_| {})?;
    Ok((env, agents, rec.metrics))
}

fn agents_for(approach: Approach, env: &Network, train: &TrainConfig) -> Result<Vec<Agent>> {
    if approach.learns() {
        dqn::new_agents(env, train)
    } else {
        Ok(Vec::new())
    }
}

/// Greedy evaluation of `agents` on `scenario`, starting from the fixed
/// evaluation slot so every sweep point sees the same traffic and fading.
pub fn evaluate_cell(
    approach: Approach,
    scenario: &ScenarioConfig,
    cfg: &ExperimentConfig,
    agents: &mut [Agent],
) -> Result<(Vec<EpisodeMetrics>, Vec<PolicyEvent>)> {
    let mut env = Network::new(scenario.clone(), cfg.reward.clone())?;
    env.reset(EVAL_SLOT_BASE);
    let mut policy = approach.policy(&env, cfg)?;
    let learn = cfg.eval_learning.then_some(&cfg.train);
    let rec = dqn::evaluate(
        &mut env,
        agents,
        policy.as_mut(),
        cfg.eval_slots,
        cfg.eval_window,
        learn,
    )?;
    Ok((rec.metrics, rec.events))
}

fn summary_row(windows: &[EpisodeMetrics]) -> [f64; 8] {
    let mut acc = [0.0; 8];
    for m in windows {
        for (a, v) in acc.iter_mut().zip(values_of(m)) {
            *a += v;
        }
    }
    acc.map(|a| a / windows.len().max(1) as f64)
}

/// Runs every (approach, seed) pair: one training stage, then one evaluation
/// per sweep point from a copy of the trained agents. Writes per-cell,
/// aggregate and summary CSVs plus the resolved configuration.
pub fn run_experiment(
    spec: &ExperimentSpec,
    out_dir: &Path,
    log: &mut dyn FnMut(&str),
) -> Result<ExperimentOutput> {
    spec.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut output = ExperimentOutput::default();
    let cfg_path = out_dir.join("resolved_config.toml");
    std::fs::write(&cfg_path, dump_config(&spec.config)).map_err(|e| Error::io(&cfg_path, e))?;
    output.files.push(cfg_path);
    let points = spec.points();

    for &approach in &spec.approaches {
        let mut result = ApproachResult::default();
        for &seed in spec.seeds() {
            let mut scenario = spec.config.scenario.clone();
            scenario.rng_seed = seed;
            let mut agents = if spec.train {
                log(&format!("train {approach} seed {seed}"));
                let (_, agents, rows) = train_cell(approach, &scenario, &spec.config)?;
                let path = out_dir.join(format!("{}__train__seed{seed}.csv", approach.name()));
                write_metrics(&path, &rows)?;
                output.files.push(path);
                result.training.push((seed, rows));
                agents
            } else {
                let env = Network::new(scenario.clone(), spec.config.reward.clone())?;
                agents_for(approach, &env, &spec.config.train)?
            };
            for &point in &points {
                let mut s = scenario.clone();
                if let Some(v) = point {
                    spec.sweep.apply(&mut s, v)?;
                }
                let name = cell_name(approach, spec.sweep, point);
                log(&format!("evaluate {name} seed {seed}"));
                let mut cell_agents = if spec.config.eval_learning {
                    agents.clone()
                } else {
                    std::mem::take(&mut agents)
                };
                let (rows, events) = evaluate_cell(approach, &s, &spec.config, &mut cell_agents)?;
                if !spec.config.eval_learning {
                    agents = cell_agents;
                }
                let path = out_dir.join(format!("{name}__seed{seed}.csv"));
                write_metrics(&path, &rows)?;
                output.files.push(path);
                let path = out_dir.join(format!("{name}__seed{seed}__events.csv"));
                write_events(&path, &events)?;
                output.files.push(path);
                result.cells.push((point, seed, rows));
            }
        }

        if spec.train {
            let runs: Vec<_> = result.training.iter().map(|(_, r)| r.clone()).collect();
            let path = out_dir.join(format!("{}__train__aggregate.csv", approach.name()));
            write_aggregate(&path, &aggregate(&runs)?)?;
            output.files.push(path);
        }
        let mut summary = Vec::new();
        for &point in &points {
            let runs: Vec<Vec<EpisodeMetrics>> = result
                .cells
                .iter()
                .filter(|(p, _, _)| *p == point)
                .map(|(_, _, r)| r.clone())
                .collect();
            let name = cell_name(approach, spec.sweep, point);
            let path = out_dir.join(format!("{name}__aggregate.csv"));
            write_aggregate(&path, &aggregate(&runs)?)?;
            output.files.push(path);
            let per_seed: Vec<[f64; 8]> = runs.iter().map(|r| summary_row(r)).collect();
            let mut mean = [0.0; 8];
            let mut se = [0.0; 8];
            for c in 0..8 {
                let xs: Vec<f64> = per_seed.iter().map(|r| r[c]).collect();
                (mean[c], se[c]) = mean_stderr(&xs);
            }
            summary.push((point.map(|v| v.to_string()).unwrap_or_default(), mean, se));
        }
        if spec.sweep != SweepVar::None {
            let path = out_dir.join(format!("{}__{}__summary.csv", approach.name(), spec.sweep.name()));
            write_rows(&path, &aggregate_header("value"), &summary)?;
            output.files.push(path);
        }
        output.results.push((approach, result));
    }
    Ok(output)
}

/// Plot-ready table: named columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(&self.columns).map_err(|e| Error::csv(path, e))?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string()))
                .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Reads a summary or aggregate file: first column as key, then named columns.
fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        rows.push(
            rec.iter()
                .map(|s| parse_field::<f64>(path, s))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok((header, rows))
}

fn col(header: &[String], name: &str, path: &Path) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::InvalidConfig(format!("{}: missing column {name}", path.display())))
}

/// Builds the table of figure 4 (episode vs EE), 5 (reliability), 6 (latency,
/// ms) or 7 (arrival rate) from the files in `dir`. Sweep figures carry one EE
/// and one success column per approach.
pub fn figure_tables(dir: &Path, figure: u8) -> Result<FigureTable> {
    let (suffix, sweep) = match figure {
        4 => ("train__aggregate".to_string(), None),
        5 => ("reliability__summary".to_string(), Some(SweepVar::Reliability)),
        6 => ("latency__summary".to_string(), Some(SweepVar::Latency)),
        7 => ("arrival_rate__summary".to_string(), Some(SweepVar::ArrivalRate)),
        _ => {
            return Err(Error::InvalidConfig(format!(
                "figure {figure} is not one of 4, 5, 6, 7"
            )))
        }
    };
    let paths: Vec<(Approach, PathBuf)> = Approach::ALL
        .iter()
        .map(|&a| (a, dir.join(format!("{}__{suffix}.csv", a.name()))))
        .collect();
    let missing: Vec<String> = paths
        .iter()
        .filter(|(_, p)| !p.is_file())
        .map(|(a, p)| format!("{a} ({})", p.display()))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingInputs { figure, missing });
    }
    let x_name = match sweep {
        None => "episode",
        Some(s) => s.name(),
    };
    let mut columns = vec![x_name.to_string()];
    let mut xs: Option<Vec<f64>> = None;
    let mut data: Vec<Vec<f64>> = Vec::new();
    for (a, path) in &paths {
        let (header, rows) = read_table(path)?;
        let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        match &xs {
            None => xs = Some(x.clone()),
            Some(prev) if sweep.is_some() && prev != &x => {
                return Err(Error::InvalidConfig(format!(
                    "{}: sweep values differ from the other approaches",
                    path.display()
                )))
            }
            Some(prev) if prev.len() > x.len() => xs = Some(x.clone()),
            _ => {}
        }
        let ee = col(&header, "mean_ee", path)?;
        columns.push(format!("ee_{}", a.name()));
        data.push(rows.iter().map(|r| r[ee]).collect());
        if sweep.is_some() {
            let s = col(&header, "success", path)?;
            columns.push(format!("success_{}", a.name()));
            data.push(rows.iter().map(|r| r[s]).collect());
        }
    }
    let xs = xs.unwrap_or_default();
    let rows = (0..xs.len())
        .map(|i| {
            let mut r = vec![xs[i]];
            r.extend(data.iter().map(|c| c[i]));
            r
        })
        .collect();
    Ok(FigureTable { columns, rows })
}
