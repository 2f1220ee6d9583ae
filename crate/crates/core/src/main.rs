use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use urllc_access::dqn::checkpoint;
use urllc_access::harness::{
    self, dump_config, load_config, Approach, ExperimentConfig, ExperimentSpec, SweepVar,
};
use urllc_access::{Error, Result};

/// Multi-agent resource allocation simulator for URLLC massive access.
///
/// Every flag can also be given through an environment variable with the
/// `URLLC_ACCESS_` prefix, e.g. `URLLC_ACCESS_SEED=3`.
#[derive(Parser)]
#[command(name = "urllc-access", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file (flat key = value); defaults apply when omitted.
    #[arg(long, env = "URLLC_ACCESS_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "URLLC_ACCESS_OUT", default_value = "out")]
    out: PathBuf,
    /// Training episodes (overrides the config).
    #[arg(long, env = "URLLC_ACCESS_EPISODES")]
    episodes: Option<usize>,
    /// Evaluation slots (overrides the config).
    #[arg(long, env = "URLLC_ACCESS_SLOTS")]
    slots: Option<usize>,
    /// Bootstrap from the online network instead of a synced target copy.
    #[arg(long, env = "URLLC_ACCESS_FAITHFUL_LOSS")]
    faithful_loss: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Train one approach for one seed and save its models.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, env = "URLLC_ACCESS_APPROACH", default_value = "proposed")]
        approach: Approach,
        #[arg(long, env = "URLLC_ACCESS_SEED", default_value_t = 1)]
        seed: u64,
    },
    /// Run one approach greedily, loading models saved by `train`.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, env = "URLLC_ACCESS_APPROACH", default_value = "proposed")]
        approach: Approach,
        #[arg(long, env = "URLLC_ACCESS_SEED", default_value_t = 1)]
        seed: u64,
        /// Model directory; defaults to `<out>/models/<approach>/seed<n>`.
        #[arg(long, env = "URLLC_ACCESS_MODELS")]
        models: Option<PathBuf>,
    },
    /// Train and evaluate approaches over seeds and sweep values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Approaches to run (repeatable); all when omitted.
        #[arg(long, env = "URLLC_ACCESS_APPROACH", value_delimiter = ',')]
        approach: Vec<Approach>,
        /// Seeds (repeatable); the config's seeds when omitted.
        #[arg(long, env = "URLLC_ACCESS_SEED", value_delimiter = ',')]
        seed: Vec<u64>,
        /// none, reliability, latency (ms) or arrival_rate (packets/slot).
        #[arg(long, env = "URLLC_ACCESS_SWEEP", default_value = "none")]
        sweep: SweepVar,
        /// Comma-separated sweep values.
        #[arg(long, env = "URLLC_ACCESS_VALUES", value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Build a plot-ready table (figure 4, 5, 6 or 7) from sweep outputs.
    Figure {
        /// Directory holding the sweep outputs; the table is written there.
        #[arg(long, env = "URLLC_ACCESS_OUT", default_value = "out")]
        out: PathBuf,
        #[arg(long, env = "URLLC_ACCESS_FIGURE")]
        figure: u8,
    },
}

fn resolve(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(e) = common.episodes {
        cfg.train.episodes = e;
    }
    if let Some(s) = common.slots {
        cfg.eval_slots = s;
    }
    if common.faithful_loss {
        cfg.train.target_sync_period = 0;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_out(out: &Path, cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let p = out.join("resolved_config.toml");
    std::fs::write(&p, dump_config(cfg)).map_err(|e| Error::io(&p, e))
}

fn model_dir(out: &Path, approach: Approach, seed: u64) -> PathBuf {
    out.join("models").join(approach.name()).join(format!("seed{seed}"))
}

fn model_path(dir: &Path, agent: usize) -> PathBuf {
    dir.join(format!("agent{agent:03}.uaqn"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            common,
            approach,
            seed,
        } => {
            let cfg = resolve(&common)?;
            prepare_out(&common.out, &cfg)?;
            let mut scenario = cfg.scenario.clone();
            scenario.rng_seed = seed;
            let (_, agents, rows) = harness::train_cell(approach, &scenario, &cfg)?;
            let csv = common.out.join(format!("{}__train__seed{seed}.csv", approach.name()));
            harness::write_metrics(&csv, &rows)?;
            eprintln!("wrote {}", csv.display());
            if !agents.is_empty() {
                let dir = model_dir(&common.out, approach, seed);
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                for a in &agents {
                    checkpoint::save(&a.net, &model_path(&dir, a.id))?;
                }
                eprintln!("saved {} models to {}", agents.len(), dir.display());
            }
            if let Some(last) = rows.last() {
                println!(
                    "episode {} mean_ee {:.4} success {:.4}",
                    last.index, last.mean_ee, last.success
                );
            }
        }
        Command::Evaluate {
            common,
            approach,
            seed,
            models,
        } => {
            let cfg = resolve(&common)?;
            prepare_out(&common.out, &cfg)?;
            let mut scenario = cfg.scenario.clone();
            scenario.rng_seed = seed;
            let env = urllc_access::env::Network::new(scenario.clone(), cfg.reward.clone())?;
            let mut agents = Vec::new();
            if approach.learns() {
                let dir = models.unwrap_or_else(|| model_dir(&common.out, approach, seed));
                let sizes = cfg
                    .train
                    .layer_sizes(scenario.state_dim(), env.action_space().len());
                for l in 0..env.num_links() {
                    let net = checkpoint::load_expecting(&model_path(&dir, l), &sizes)?;
                    agents.push(urllc_access::dqn::Agent::with_network(l, net, &cfg.train, seed)?);
                }
            }
            let (rows, events) = harness::evaluate_cell(approach, &scenario, &cfg, &mut agents)?;
            let csv = common.out.join(format!("{}__eval__seed{seed}.csv", approach.name()));
            harness::write_metrics(&csv, &rows)?;
            eprintln!("wrote {} ({} events)", csv.display(), events.len());
            let n = rows.len().max(1) as f64;
            println!(
                "mean_ee {:.4} success {:.4}",
                rows.iter().map(|r| r.mean_ee).sum::<f64>() / n,
                rows.iter().map(|r| r.success).sum::<f64>() / n
            );
        }
        Command::Sweep {
            common,
            approach,
            seed,
            sweep,
            values,
        } => {
            let cfg = resolve(&common)?;
            let mut spec = ExperimentSpec::new(cfg);
            if !approach.is_empty() {
                spec.approaches = approach;
            }
            spec.seeds = seed;
            spec.sweep = sweep;
            spec.values = values;
            let out = harness::run_experiment(&spec, &common.out, &mut |m| eprintln!("{m}"))?;
            println!("wrote {} files to {}", out.files.len(), common.out.display());
        }
        Command::Figure { out, figure } => {
            let table = harness::figure_tables(&out, figure)?;
            let path = out.join(format!("figure{figure}.csv"));
            table.write(&path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
