//! Versioned JSON checkpoints for network weights and optimizer state.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::rl::adam::AdamState;
use crate::rl::net::QNetwork;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub optimizer: Option<AdamState>,
    pub config_fingerprint: String,
    pub global_step: u64,
    pub epochs_trained: u64,
}

/// SHA-256 over the canonical JSON form of the scenario config.
pub fn config_fingerprint(cfg: &ScenarioConfig) -> Result<String> {
    let json = serde_json::to_string(cfg)?;
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl Checkpoint {
    pub fn from_parts(
        net: &QNetwork,
        optimizer: Option<&AdamState>,
        cfg: &ScenarioConfig,
        global_step: u64,
        epochs_trained: u64,
    ) -> Result<Self> {
        Ok(Self {
            version: CHECKPOINT_VERSION,
            layer_dims: net.layer_dims.clone(),
            weights: net.weights.clone(),
            biases: net.biases.clone(),
            optimizer: optimizer.cloned(),
            config_fingerprint: config_fingerprint(cfg)?,
            global_step,
            epochs_trained,
        })
    }

    pub fn to_network(&self) -> Result<QNetwork> {
        let net = QNetwork {
            layer_dims: self.layer_dims.clone(),
            weights: self.weights.clone(),
            biases: self.biases.clone(),
        };
        net.check_shapes()?;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| {
            Error::Checkpoint(format!("{}: {e}", path.display()))
        })?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {}",
                ckpt.version
            )));
        }
        ckpt.to_network()?;
        Ok(ckpt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = QNetwork::new(&[14, 24, 24, 96], &mut rng);
        let opt = AdamState::new(&net, 1e-4);
        let cfg = ScenarioConfig::default();
        let ckpt = Checkpoint::from_parts(&net, Some(&opt), &cfg, 1234, 56).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        ckpt.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();

        let net2 = loaded.to_network().unwrap();
        assert_eq!(net.weights, net2.weights);
        assert_eq!(net.biases, net2.biases);
        assert_eq!(loaded.global_step, 1234);
        assert_eq!(loaded.epochs_trained, 56);
        let opt2 = loaded.optimizer.unwrap();
        assert_eq!(opt.m_weights, opt2.m_weights);
        assert_eq!(opt.v_weights, opt2.v_weights);
        assert_eq!(loaded.config_fingerprint, config_fingerprint(&cfg).unwrap());
    }

    #[test]
    fn truncated_file_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let net = QNetwork::new(&[4, 8, 3], &mut rng);
        let cfg = ScenarioConfig::default();
        let ckpt = Checkpoint::from_parts(&net, None, &cfg, 0, 0).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        ckpt.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn fingerprint_tracks_config_changes() {
        let a = config_fingerprint(&ScenarioConfig::default()).unwrap();
        let b = config_fingerprint(&ScenarioConfig::reduced()).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, config_fingerprint(&ScenarioConfig::default()).unwrap());
    }
}
