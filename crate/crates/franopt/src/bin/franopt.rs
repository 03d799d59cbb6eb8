//! Thin command-line front end over the library: training, evaluation,
//! caching-probability sweeps, transfer runs, and a value-iteration
//! cross-check on the reduced scenario.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use franopt::harness::{
    emit_metrics, episodes_csv, run_evaluation, run_sweep, run_training, run_transfer,
    write_manifest, RunConfig, Seeds,
};
use franopt::oracle;
use franopt::policies::Policy;
use franopt::rl::checkpoint::{config_fingerprint, Checkpoint};
use franopt::{Env, Result};

#[derive(Parser)]
#[command(name = "franopt", about = "Fog-RAN mode-selection and power-control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a DQN controller and write metrics + checkpoint.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed; expands to topology/channel/training/evaluation streams.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the epoch count from the config.
        #[arg(long)]
        episodes: Option<u64>,
    },
    /// Evaluate a trained checkpoint with the greedy policy.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
    },
    /// Train and evaluate one model per cache-availability value.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated uniform rho values, e.g. 0.6,0.75,0.9.
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
    },
    /// Continue training from a source checkpoint in a new environment.
    Transfer {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Uniform rho for the target environment.
        #[arg(long, value_delimiter = ',')]
        rho: Vec<f64>,
        #[arg(long)]
        episodes: Option<u64>,
    },
    /// Exact value iteration on the reduced scenario, dumped as CSV.
    ViCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load_run(config: &Option<PathBuf>, seed: Option<u64>) -> Result<RunConfig> {
    let mut run = match config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = seed {
        run.seeds = Seeds::from_master(seed);
    }
    Ok(run)
}

fn prepare_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn save_outputs(run: &RunConfig, out: &Path, tag: &str, result: &franopt::harness::TrainOutput) -> Result<()> {
    emit_metrics(&result.metrics, &out.join(format!("{tag}_metrics.csv")))?;
    let ckpt = Checkpoint::from_parts(
        &result.net,
        Some(&result.agent.opt),
        &run.scenario,
        result.global_step,
        run.epochs,
    )?;
    ckpt.save(&out.join(format!("{tag}_checkpoint.json")))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train { config, seed, out, episodes } => {
            let mut run = load_run(&config, seed)?;
            if let Some(e) = episodes {
                run.epochs = e;
            }
            prepare_out(&out)?;
            write_manifest(&run, &out.join("manifest.json"))?;
            let result = run_training(&run)?;
            save_outputs(&run, &out, "train", &result)?;
            let last = result.metrics.last().unwrap();
            println!(
                "trained {} epochs; final discounted reward {:.3}, mean power {:.3} W",
                run.epochs, last.discounted_reward, last.mean_power_w
            );
        }
        Command::Eval { checkpoint, config, seed, out, episodes } => {
            let run = load_run(&config, seed)?;
            prepare_out(&out)?;
            let ckpt = Checkpoint::load(&checkpoint)?;
            if ckpt.config_fingerprint != config_fingerprint(&run.scenario)? {
                eprintln!("warning: checkpoint was produced under a different scenario config");
            }
            let env = Env::new(run.scenario.clone(), run.seeds.topology, run.seeds.channel)?;
            let policy = Policy::Drl(ckpt.to_network()?);
            let summary = run_evaluation(&env, &run, &policy, episodes)?;
            std::fs::write(out.join("eval_episodes.csv"), episodes_csv(&summary))?;
            println!(
                "mean discounted reward {:.4} +- {:.4} (stderr), mean power {:.4} W over {} epochs",
                summary.mean_discounted_reward,
                summary.stderr_discounted_reward,
                summary.mean_power_w,
                episodes
            );
        }
        Command::Sweep { config, seed, out, rho, episodes } => {
            let run = load_run(&config, seed)?;
            prepare_out(&out)?;
            let entries = run_sweep(&run, &rho, episodes)?;
            let mut table = String::from("rho,mean_discounted_reward,stderr,mean_power_w\n");
            for entry in &entries {
                table.push_str(&format!(
                    "{},{},{},{}\n",
                    entry.rho,
                    entry.eval.mean_discounted_reward,
                    entry.eval.stderr_discounted_reward,
                    entry.eval.mean_power_w
                ));
                let sub = RunConfig {
                    scenario: run.scenario.clone().with_uniform_rho(entry.rho),
                    ..run.clone()
                };
                save_outputs(&sub, &out, &format!("rho_{}", entry.rho), &entry.train)?;
            }
            std::fs::write(out.join("sweep.csv"), &table)?;
            print!("{table}");
        }
        Command::Transfer { checkpoint, config, seed, out, rho, episodes } => {
            let mut run = load_run(&config, seed)?;
            if let Some(&r) = rho.first() {
                run.scenario = run.scenario.with_uniform_rho(r);
            }
            if let Some(e) = episodes {
                run.epochs = e;
            }
            prepare_out(&out)?;
            write_manifest(&run, &out.join("manifest.json"))?;
            let source = Checkpoint::load(&checkpoint)?.to_network()?;
            let result = run_transfer(&source, &run)?;
            save_outputs(&run, &out, "transfer", &result)?;
            let last = result.metrics.last().unwrap();
            println!(
                "transferred and trained {} epochs; final discounted reward {:.3}",
                run.epochs, last.discounted_reward
            );
        }
        Command::ViCheck { config, seed, out } => {
            let mut run = load_run(&config, seed)?;
            if config.is_none() {
                run.scenario = franopt::ScenarioConfig::reduced();
            }
            prepare_out(&out)?;
            let env = Env::new(run.scenario.clone(), run.seeds.topology, run.seeds.channel)?;
            let mdp = oracle::build_tabular_mdp(&env, 4096)?;
            let (vf, policy) = oracle::value_iteration(&mdp, run.gamma, 1e-8)?;
            oracle::dump_csv(&vf, &policy, &out.join("value_iteration.csv"))?;
            let s0 = franopt::SystemState::initial(&run.scenario).key() as usize;
            println!(
                "value iteration converged in {} sweeps (residual {:.2e}); V(s0) = {:.4}",
                vf.iterations, vf.residual, vf.v[s0]
            );
        }
    }
    Ok(())
}
