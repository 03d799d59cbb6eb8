//! Run orchestration: configuration, the training loop, evaluation
//! fan-out, caching-probability sweeps, transfer runs, and metrics files.

pub mod evaluation;
pub mod metrics;
pub mod training;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::rl::EpsilonSchedule;

pub use evaluation::{episodes_csv, run_evaluation, run_sweep, EpisodeResult, EvalSummary, SweepEntry};
pub use metrics::{emit_metrics, load_metrics, smooth, MetricsRow, METRICS_HEADER};
pub use training::{
    greedy_epoch_return, run_q_learning, run_training, run_transfer, train_in_env, ActionHead,
    TrainOutput,
};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Seeds {
    pub topology: u64,
    pub channel: u64,
    pub training: u64,
    pub evaluation: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            topology: 1,
            channel: 2,
            training: 3,
            evaluation: 4,
        }
    }
}

impl Seeds {
    /// Derive all four streams from one master seed.
    pub fn from_master(seed: u64) -> Self {
        Self {
            topology: seed.wrapping_mul(4).wrapping_add(1),
            channel: seed.wrapping_mul(4).wrapping_add(2),
            training: seed.wrapping_mul(4).wrapping_add(3),
            evaluation: seed.wrapping_mul(4).wrapping_add(4),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub epochs: u64,
    pub warmup_steps: u64,
    pub train_every: u64,
    pub target_sync_every: u64,
    pub batch_size: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub hidden_dims: Vec<usize>,
    pub replay_capacity: usize,
    pub epsilon: EpsilonSchedule,
    pub seeds: Seeds,
    /// Bootstrap TD targets with the stored action instead of the max.
    pub literal_action_target: bool,
    /// Record wall-clock seconds per epoch. Off by default so identical
    /// runs emit byte-identical metrics files.
    pub record_timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            epochs: 32_000,
            warmup_steps: 1000,
            train_every: 3,
            target_sync_every: 480,
            batch_size: 32,
            gamma: 0.99,
            learning_rate: 1e-4,
            hidden_dims: vec![24, 24],
            replay_capacity: 5000,
            epsilon: EpsilonSchedule::default(),
            seeds: Seeds::default(),
            literal_action_target: false,
            record_timing: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.warmup_steps < self.batch_size as u64 {
            return Err(Error::Config(format!(
                "warmup_steps {} must cover batch_size {}",
                self.warmup_steps, self.batch_size
            )));
        }
        if self.train_every == 0 || self.target_sync_every == 0 || self.epochs == 0 {
            return Err(Error::Config("cadences and epochs must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::BadDiscount(self.gamma));
        }
        if self.learning_rate <= 0.0 || self.replay_capacity < self.batch_size {
            return Err(Error::Config("bad optimizer/replay settings".into()));
        }
        Ok(())
    }

    /// Layer widths for the full-action DQN.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.scenario.state_dim()];
        dims.extend(&self.hidden_dims);
        dims.push(self.scenario.num_actions());
        dims
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let run: Self = serde_json::from_str(&text)?;
        run.validate()?;
        Ok(run)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub run: RunConfig,
}

pub fn write_manifest(run: &RunConfig, path: &Path) -> Result<()> {
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        run: run.clone(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_config_is_valid() {
        let run = RunConfig::default();
        run.validate().unwrap();
        assert_eq!(run.layer_dims(), vec![14, 24, 24, 96]);
    }

    #[test]
    fn warmup_must_cover_batch() {
        let run = RunConfig {
            warmup_steps: 10,
            ..RunConfig::default()
        };
        assert!(run.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let run = RunConfig::default();
        let text = serde_json::to_string(&run).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.epochs, 32_000);
        assert_eq!(back.seeds.training, run.seeds.training);
    }

    #[test]
    fn manifest_written_and_parsable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        write_manifest(&RunConfig::default(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let m: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(m.version, env!("CARGO_PKG_VERSION"));
    }
}
