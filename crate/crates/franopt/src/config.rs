//! Scenario configuration.
//!
//! All physical and algorithmic constants of the downlink F-RAN scenario live
//! here. Defaults reproduce the reference simulation setup: 3 RRHs with 2
//! antennas each 800 m apart, 4 single-antenna UEs in a 100 m disk, 6
//! heterogeneous cloud processors, a 5 dB SINR target, and unit-bandwidth
//! rates in bits/s/Hz.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Number of RRHs (K).
    pub num_rrh: usize,
    /// Antennas per RRH (L).
    pub antennas_per_rrh: usize,
    /// Number of UEs (M), each with a paired D2D transmitter.
    pub num_ue: usize,
    /// Number of cloud processors (N).
    pub num_processors: usize,
    /// Pairwise RRH spacing in meters.
    pub rrh_spacing: f64,
    /// UEs are dropped uniformly in a disk of this radius around the RRH centroid.
    pub ue_disk_radius: f64,
    /// Maximum distance from a UE to its paired D2D transmitter, meters.
    pub d2d_max_distance: f64,
    /// Noise power sigma^2 in watts.
    pub noise_power: f64,
    /// Per-RRH transmit power cap, watts.
    pub p_max: f64,
    /// Fixed D2D transmitter power, watts.
    pub p_d2d: f64,
    /// Per-UE SINR target in dB.
    pub sinr_target_db: f64,
    /// RRH power-amplifier efficiency eta_1 (wireless power = ||v||^2 / eta_1).
    pub eta_rrh: f64,
    /// UE power-amplifier efficiency eta_2.
    pub eta_ue: f64,
    /// Fronthaul power per C-RAN UE, watts.
    pub p_fronthaul: f64,
    /// Per-processor power draw when on, watts. Length N.
    pub processor_power: Vec<f64>,
    /// Per-processor computing capacity D_n in MOPTS. Length N.
    pub processor_capacity: Vec<f64>,
    /// Computing cost per unit rate (MOPTS per bits/s/Hz).
    pub beta: f64,
    /// Computing cost per nonzero precoding coefficient (MOPTS each).
    pub alpha: f64,
    /// Per-UE cache-availability probability rho_m. Length M.
    pub rho: Vec<f64>,
    /// Decision steps per epoch (T).
    pub steps_per_epoch: usize,
    /// Log-normal shadow fading standard deviation, dB.
    pub shadow_std_db: f64,
    /// Reweighting offset and coefficient zeroing threshold xi.
    pub xi: f64,
    /// Reward magnitude charged when precoding stays infeasible after protection, watts.
    pub penalty_w: f64,
    /// Redraw channel fading at every epoch reset instead of freezing it per run.
    pub redraw_channels_each_epoch: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_rrh: 3,
            antennas_per_rrh: 2,
            num_ue: 4,
            num_processors: 6,
            rrh_spacing: 800.0,
            ue_disk_radius: 100.0,
            d2d_max_distance: 20.0,
            noise_power: 1e-13,
            p_max: 1.5,
            p_d2d: 0.1,
            sinr_target_db: 5.0,
            eta_rrh: 1.0 / 40.0,
            eta_ue: 1.0 / 20.0,
            p_fronthaul: 5.0,
            processor_power: vec![21.6, 6.4, 5.0, 8.0, 12.5, 12.5],
            processor_capacity: vec![6.0, 4.0, 1.0, 2.0, 5.0, 5.0],
            beta: 1.0,
            alpha: 0.5,
            rho: vec![0.9; 4],
            steps_per_epoch: 30,
            shadow_std_db: 8.0,
            xi: 1e-6,
            penalty_w: 200.0,
            redraw_channels_each_epoch: false,
        }
    }
}

impl ScenarioConfig {
    /// A reduced instance small enough for exact value iteration
    /// (2 processors, 2 UEs: 64 states, 16 actions).
    pub fn reduced() -> Self {
        Self {
            num_ue: 2,
            num_processors: 2,
            processor_power: vec![21.6, 6.4],
            processor_capacity: vec![6.0, 4.0],
            rho: vec![0.8; 2],
            ..Self::default()
        }
    }

    pub fn with_uniform_rho(mut self, rho: f64) -> Self {
        self.rho = vec![rho; self.num_ue];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(msg));
        if self.num_rrh * self.antennas_per_rrh < 1 {
            return err("need at least one RRH antenna".into());
        }
        if self.num_ue < 1 {
            return err("need at least one UE".into());
        }
        if self.num_processors < 1 {
            return err("need at least one processor".into());
        }
        if self.processor_power.len() != self.num_processors
            || self.processor_capacity.len() != self.num_processors
        {
            return err(format!(
                "processor_power/processor_capacity must have length {}",
                self.num_processors
            ));
        }
        if self.rho.len() != self.num_ue {
            return err(format!("rho must have length {}", self.num_ue));
        }
        for &r in &self.rho {
            if !(0.0..=1.0).contains(&r) {
                return err(format!("rho entries must lie in [0,1], got {r}"));
            }
        }
        let positives: [(&str, f64); 8] = [
            ("noise_power", self.noise_power),
            ("p_max", self.p_max),
            ("eta_rrh", self.eta_rrh),
            ("eta_ue", self.eta_ue),
            ("beta", self.beta),
            ("alpha", self.alpha),
            ("xi", self.xi),
            ("penalty_w", self.penalty_w),
        ];
        for (name, v) in positives {
            if v <= 0.0 || !v.is_finite() {
                return err(format!("{name} must be strictly positive, got {v}"));
            }
        }
        for &p in &self.processor_power {
            if p <= 0.0 {
                return err(format!("processor powers must be positive, got {p}"));
            }
        }
        for &d in &self.processor_capacity {
            if d <= 0.0 {
                return err(format!("processor capacities must be positive, got {d}"));
            }
        }
        if self.p_d2d < 0.0 || self.p_fronthaul < 0.0 {
            return err("p_d2d and p_fronthaul must be nonnegative".into());
        }
        if self.steps_per_epoch == 0 {
            return err("steps_per_epoch must be positive".into());
        }
        Ok(())
    }

    /// SINR target as a linear power ratio.
    pub fn sinr_target_linear(&self) -> f64 {
        10f64.powf(self.sinr_target_db / 10.0)
    }

    /// Minimum per-UE rate implied by the SINR target, bits/s/Hz.
    pub fn rate_min(&self) -> f64 {
        (1.0 + self.sinr_target_linear()).log2()
    }

    /// Total computing capacity of the processors flagged on.
    pub fn active_capacity(&self, processor_on: &[bool]) -> f64 {
        processor_on
            .iter()
            .zip(&self.processor_capacity)
            .filter(|&(&on, _)| on)
            .map(|(_, &d)| d)
            .sum()
    }

    /// Number of flat-encoded control actions: 2N * 2M.
    pub fn num_actions(&self) -> usize {
        4 * self.num_processors * self.num_ue
    }

    /// DQN input width: N + 2M.
    pub fn state_dim(&self) -> usize {
        self.num_processors + 2 * self.num_ue
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ScenarioConfig::default().validate().unwrap();
        ScenarioConfig::reduced().validate().unwrap();
    }

    #[test]
    fn rejects_bad_rho() {
        let cfg = ScenarioConfig::default().with_uniform_rho(1.5);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_mismatched_processor_tables() {
        let mut cfg = ScenarioConfig::default();
        cfg.processor_power.pop();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sinr_target_is_five_db() {
        let cfg = ScenarioConfig::default();
        assert!((cfg.sinr_target_linear() - 10f64.powf(0.5)).abs() < 1e-12);
        assert!((cfg.rate_min() - (1.0 + 10f64.powf(0.5)).log2()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let cfg = ScenarioConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg.num_actions(), back.num_actions());
        assert_eq!(cfg.rho, back.rho);
    }
}
