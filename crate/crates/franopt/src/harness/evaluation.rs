//! Greedy-policy evaluation over many epochs, parallel with a pre-split
//! seed stream per epoch, and caching-probability sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::state::SystemState;
use crate::env::Env;
use crate::error::Result;
use crate::harness::training::{train_in_env, ActionHead, TrainOutput};
use crate::harness::RunConfig;
use crate::policies::Policy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode: u64,
    pub discounted_reward: f64,
    pub mean_power_w: f64,
    pub protections: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: usize,
    pub mean_discounted_reward: f64,
    pub stderr_discounted_reward: f64,
    pub mean_power_w: f64,
    pub stderr_power_w: f64,
    pub per_episode: Vec<EpisodeResult>,
}

impl EvalSummary {
    /// 95% confidence interval for the mean discounted reward.
    pub fn reward_ci95(&self) -> (f64, f64) {
        let half = 1.96 * self.stderr_discounted_reward;
        (
            self.mean_discounted_reward - half,
            self.mean_discounted_reward + half,
        )
    }

    pub fn power_ci95(&self) -> (f64, f64) {
        let half = 1.96 * self.stderr_power_w;
        (self.mean_power_w - half, self.mean_power_w + half)
    }
}

fn episode_seed(base: u64, episode: u64) -> u64 {
    base.wrapping_add(episode.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Roll out `episodes` greedy epochs from the canonical initial state.
/// Epochs run in parallel on independent seed streams; the merge is a
/// sequential sum over episode index, so results do not depend on
/// scheduling order.
pub fn run_evaluation(
    env: &Env,
    run: &RunConfig,
    policy: &Policy,
    episodes: usize,
) -> Result<EvalSummary> {
    let t_steps = run.scenario.steps_per_epoch;
    let per_episode: Vec<EpisodeResult> = (0..episodes as u64)
        .into_par_iter()
        .map(|ep| -> Result<EpisodeResult> {
            let mut rng =
                ChaCha8Rng::seed_from_u64(episode_seed(run.seeds.evaluation, ep));
            let mut state = SystemState::initial(&run.scenario);
            let mut discounted = 0.0;
            let mut power_sum = 0.0;
            let mut protections = 0u64;
            for t in 0..t_steps {
                let action = policy.action(
                    &run.scenario,
                    &state.encode(),
                    state.key(),
                    t as u64,
                    &mut rng,
                )?;
                let outcome = env.step(&state, &action, &mut rng)?;
                discounted += run.gamma.powi(t as i32) * outcome.reward;
                power_sum += outcome.energy.total_w;
                if outcome.energy.protecting_triggered {
                    protections += 1;
                }
                state = outcome.next;
            }
            Ok(EpisodeResult {
                episode: ep,
                discounted_reward: discounted,
                mean_power_w: power_sum / t_steps as f64,
                protections,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rewards: Vec<f64> = per_episode.iter().map(|e| e.discounted_reward).collect();
    let powers: Vec<f64> = per_episode.iter().map(|e| e.mean_power_w).collect();
    let (mean_r, se_r) = mean_stderr(&rewards);
    let (mean_p, se_p) = mean_stderr(&powers);
    Ok(EvalSummary {
        episodes,
        mean_discounted_reward: mean_r,
        stderr_discounted_reward: se_r,
        mean_power_w: mean_p,
        stderr_power_w: se_p,
        per_episode,
    })
}

pub fn episodes_csv(summary: &EvalSummary) -> String {
    let mut out = String::from("episode,discounted_reward,mean_power_w,protections\n");
    for e in &summary.per_episode {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.episode, e.discounted_reward, e.mean_power_w, e.protections
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub rho: f64,
    pub train: TrainOutput,
    pub eval: EvalSummary,
}

/// Train and evaluate one model per uniform rho value. Topology and
/// channel seeds are shared across entries, isolating the caching effect;
/// the precoding cache is shared too since the channels are identical.
pub fn run_sweep(base: &RunConfig, rhos: &[f64], eval_episodes: usize) -> Result<Vec<SweepEntry>> {
    assert!(rhos.len() >= 2, "a sweep needs at least two rho values");
    let mut shared: Option<Env> = None;
    let mut entries = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let run = RunConfig {
            scenario: base.scenario.clone().with_uniform_rho(rho),
            ..base.clone()
        };
        run.validate()?;
        let mut env = Env::new(run.scenario.clone(), run.seeds.topology, run.seeds.channel)?;
        if let Some(prev) = &shared {
            env = env.with_shared_cache(prev);
        }
        let train = train_in_env(&mut env, &run, None, ActionHead::Full)?;
        let eval = run_evaluation(&env, &run, &Policy::Drl(train.net.clone()), eval_episodes)?;
        shared.get_or_insert(env);
        entries.push(SweepEntry { rho, train, eval });
    }
    Ok(entries)
}
