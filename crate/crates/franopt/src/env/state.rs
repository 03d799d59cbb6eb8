//! System state and control actions.
//!
//! The MDP state is the triple (processor on/off bits, UE mode bits, cache
//! bits); its network encoding is the flat binary vector of length N + 2M.
//! A control action retargets exactly one processor and one UE per step.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

/// Binary system state: processor on/off, UE communication modes, cache states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemState {
    /// s_n^processor, true = on.
    pub processor_on: Vec<bool>,
    /// s_m^mode, true = D2D, false = C-RAN.
    pub ue_mode: Vec<bool>,
    /// s_m^cache, true = content available at the paired transmitter.
    pub cache: Vec<bool>,
}

impl SystemState {
    /// The per-epoch initial state: all UEs in C-RAN mode, all processors on,
    /// all caches False.
    pub fn initial(cfg: &ScenarioConfig) -> Self {
        Self {
            processor_on: vec![true; cfg.num_processors],
            ue_mode: vec![false; cfg.num_ue],
            cache: vec![false; cfg.num_ue],
        }
    }

    /// Flat binary encoding: processor bits, then mode bits, then cache bits.
    pub fn encode(&self) -> Vec<f64> {
        self.processor_on
            .iter()
            .chain(&self.ue_mode)
            .chain(&self.cache)
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn decode(bits: &[f64], cfg: &ScenarioConfig) -> Result<Self> {
        if bits.len() != cfg.state_dim() {
            return Err(Error::DimensionMismatch {
                expected: cfg.state_dim(),
                got: bits.len(),
            });
        }
        let n = cfg.num_processors;
        let m = cfg.num_ue;
        let to_bool = |x: f64| x != 0.0;
        Ok(Self {
            processor_on: bits[..n].iter().copied().map(to_bool).collect(),
            ue_mode: bits[n..n + m].iter().copied().map(to_bool).collect(),
            cache: bits[n + m..].iter().copied().map(to_bool).collect(),
        })
    }

    /// Compact integer key (same bit order as `encode`), for tabular methods
    /// and the precoder memo. Requires N + 2M <= 64.
    pub fn key(&self) -> u64 {
        let mut k = 0u64;
        for (i, &b) in self
            .processor_on
            .iter()
            .chain(&self.ue_mode)
            .chain(&self.cache)
            .enumerate()
        {
            if b {
                k |= 1 << i;
            }
        }
        k
    }

    pub fn from_key(key: u64, cfg: &ScenarioConfig) -> Self {
        let bits: Vec<f64> = (0..cfg.state_dim())
            .map(|i| ((key >> i) & 1) as f64)
            .collect();
        Self::decode(&bits, cfg).expect("state_dim bits always decode")
    }

    /// Indices of UEs currently in C-RAN mode.
    pub fn cran_set(&self) -> Vec<usize> {
        (0..self.ue_mode.len())
            .filter(|&m| !self.ue_mode[m])
            .collect()
    }

    /// Key over (processor, mode) bits only; cache does not affect precoding.
    pub fn precoding_key(&self) -> u64 {
        let mut k = 0u64;
        for (i, &b) in self.processor_on.iter().chain(&self.ue_mode).enumerate() {
            if b {
                k |= 1 << i;
            }
        }
        k
    }
}

/// One control decision: retarget one processor and one UE.
///
/// Setting a component to its current value is a legal no-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlAction {
    pub processor_index: usize,
    /// true = turn on.
    pub processor_target: bool,
    pub ue_index: usize,
    /// true = D2D.
    pub ue_target_mode: bool,
}

impl ControlAction {
    /// Flat-index encoding ((n*2 + b) * 2M + (m*2 + c)), a bijection onto
    /// 0..2N*2M.
    pub fn to_flat(&self, cfg: &ScenarioConfig) -> usize {
        let b = self.processor_target as usize;
        let c = self.ue_target_mode as usize;
        (self.processor_index * 2 + b) * 2 * cfg.num_ue + (self.ue_index * 2 + c)
    }

    pub fn from_flat(index: usize, cfg: &ScenarioConfig) -> Result<Self> {
        if index >= cfg.num_actions() {
            return Err(Error::IndexOutOfRange(format!(
                "action index {index} out of 0..{}",
                cfg.num_actions()
            )));
        }
        let ue_part = index % (2 * cfg.num_ue);
        let proc_part = index / (2 * cfg.num_ue);
        Ok(Self {
            processor_index: proc_part / 2,
            processor_target: proc_part % 2 == 1,
            ue_index: ue_part / 2,
            ue_target_mode: ue_part % 2 == 1,
        })
    }
}

/// Apply a control action: only the targeted processor and UE bits change,
/// cache bits are untouched (cache evolves separately).
pub fn apply_action(state: &SystemState, action: &ControlAction) -> Result<SystemState> {
    if action.processor_index >= state.processor_on.len() {
        return Err(Error::IndexOutOfRange(format!(
            "processor index {}",
            action.processor_index
        )));
    }
    if action.ue_index >= state.ue_mode.len() {
        return Err(Error::IndexOutOfRange(format!("ue index {}", action.ue_index)));
    }
    let mut next = state.clone();
    next.processor_on[action.processor_index] = action.processor_target;
    next.ue_mode[action.ue_index] = action.ue_target_mode;
    Ok(next)
}
