//! Rate, computing-load, energy, and QoS models.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::env::channel::ChannelSet;
use crate::env::state::SystemState;
use crate::error::{Error, Result};
use crate::precoder::{PrecodingSolution, SolveStatus};

/// Inner product h^H v over the stacked antenna dimension.
pub fn beam_gain(h: &[Complex64], v: &[Complex64]) -> Complex64 {
    h.iter().zip(v).map(|(hj, vj)| hj.conj() * vj).sum()
}

/// SINR of C-RAN UE m under precoding `v` (network-wide vectors, one per UE,
/// zero for UEs not in C-RAN mode).
pub fn cran_sinr(
    m: usize,
    state: &SystemState,
    v: &[Vec<Complex64>],
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> f64 {
    let desired = beam_gain(ch.h_ue(m), &v[m]).norm_sqr();
    let mut interference = 0.0;
    for mp in 0..cfg.num_ue {
        if mp != m && !state.ue_mode[mp] {
            interference += beam_gain(ch.h_ue(m), &v[mp]).norm_sqr();
        }
    }
    desired / (interference + cfg.noise_power)
}

/// Achievable rate of C-RAN UE m, bits/s/Hz.
pub fn cran_rate(
    m: usize,
    state: &SystemState,
    sol: &PrecodingSolution,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<f64> {
    if state.ue_mode[m] {
        return Err(Error::WrongMode {
            ue: m,
            expected: "C-RAN",
            actual: "D2D",
        });
    }
    Ok((1.0 + cran_sinr(m, state, &sol.v, ch, cfg)).log2())
}

/// SINR of D2D UE m: fixed-power link over the paired gain, interfered only
/// by transmitters of other UEs currently in D2D mode.
pub fn d2d_sinr(m: usize, state: &SystemState, ch: &ChannelSet, cfg: &ScenarioConfig) -> f64 {
    let mut interference = 0.0;
    for mp in 0..cfg.num_ue {
        if mp != m && state.ue_mode[mp] {
            interference += cfg.p_d2d * ch.g_cross[m][mp];
        }
    }
    cfg.p_d2d * ch.g_d2d[m] / (interference + cfg.noise_power)
}

/// Achievable rate of D2D UE m, bits/s/Hz.
pub fn d2d_rate(m: usize, state: &SystemState, ch: &ChannelSet, cfg: &ScenarioConfig) -> Result<f64> {
    if !state.ue_mode[m] {
        return Err(Error::WrongMode {
            ue: m,
            expected: "D2D",
            actual: "C-RAN",
        });
    }
    Ok((1.0 + d2d_sinr(m, state, ch, cfg)).log2())
}

/// Cloud computing load in MOPTS: beta * sum of C-RAN rates plus alpha per
/// nonzero precoding coefficient (|v| >= xi counts as nonzero).
pub fn computing_load(state: &SystemState, sol: &PrecodingSolution, cfg: &ScenarioConfig) -> f64 {
    let mut rate_sum = 0.0;
    let mut nnz = 0usize;
    for m in 0..cfg.num_ue {
        if state.ue_mode[m] {
            continue;
        }
        rate_sum += sol.rates[m];
        nnz += sol.v[m].iter().filter(|c| c.norm() >= cfg.xi).count();
    }
    cfg.beta * rate_sum + cfg.alpha * nnz as f64
}

/// Per-step energy accounting, watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub processor_w: f64,
    pub fronthaul_w: f64,
    pub wireless_w: f64,
    pub total_w: f64,
    pub protecting_triggered: bool,
}

pub fn system_energy(
    state: &SystemState,
    sol: &PrecodingSolution,
    cfg: &ScenarioConfig,
) -> EnergyBreakdown {
    let processor_w: f64 = state
        .processor_on
        .iter()
        .zip(&cfg.processor_power)
        .filter(|&(&on, _)| on)
        .map(|(_, &p)| p)
        .sum();

    let mut fronthaul_w = 0.0;
    let mut wireless_w = 0.0;
    for m in 0..cfg.num_ue {
        if state.ue_mode[m] {
            wireless_w += cfg.p_d2d / cfg.eta_ue;
        } else {
            fronthaul_w += cfg.p_fronthaul;
            let tx: f64 = sol.v[m].iter().map(|c| c.norm_sqr()).sum();
            wireless_w += tx / cfg.eta_rrh;
        }
    }

    EnergyBreakdown {
        processor_w,
        fronthaul_w,
        wireless_w,
        total_w: processor_w + fronthaul_w + wireless_w,
        protecting_triggered: false,
    }
}

/// Each cache bit independently becomes True with probability rho_m; the
/// next cache state does not depend on the current one.
pub fn transition_cache(
    state: &SystemState,
    cfg: &ScenarioConfig,
    rng: &mut impl Rng,
) -> SystemState {
    let mut next = state.clone();
    for (bit, &rho) in next.cache.iter_mut().zip(&cfg.rho) {
        *bit = rng.random::<f64>() < rho;
    }
    next
}

/// UEs whose QoS is violated in the current configuration.
///
/// A D2D UE violates when its cache went False or its SINR falls below the
/// target (boundary inclusive: SINR exactly at target satisfies). C-RAN UEs
/// violate collectively when no feasible precoding exists.
pub fn check_qos(
    state: &SystemState,
    sol: &PrecodingSolution,
    ch: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Vec<usize> {
    let target = cfg.sinr_target_linear();
    let mut violators = Vec::new();
    for m in 0..cfg.num_ue {
        if state.ue_mode[m] {
            if !state.cache[m] || d2d_sinr(m, state, ch, cfg) < target {
                violators.push(m);
            }
        } else if sol.status != SolveStatus::Optimal {
            violators.push(m);
        }
    }
    violators
}

/// Protecting operation: reactivate every processor and move each violating
/// D2D UE back to C-RAN mode. Cache bits are untouched. The caller must
/// re-optimize precoding afterwards.
pub fn protecting_operation(state: &SystemState, violators: &[usize]) -> SystemState {
    let mut next = state.clone();
    for bit in next.processor_on.iter_mut() {
        *bit = true;
    }
    for &m in violators {
        if next.ue_mode[m] {
            next.ue_mode[m] = false;
        }
    }
    next
}
