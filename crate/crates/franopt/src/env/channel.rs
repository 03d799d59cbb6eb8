//! Channel model.
//!
//! RRH-antenna-to-UE links combine distance^-2 path loss, log-normal shadow
//! fading (per UE-RRH pair), and unit-variance circularly symmetric complex
//! small-scale fading (per antenna). Links among devices carry pure
//! distance^-2 power gains with no fading. Channels are drawn once per run
//! and held fixed unless the config asks for a per-epoch redraw.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::env::topology::Topology;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSet {
    /// h[m][k*L + l]: complex gain from antenna l of RRH k to UE m.
    pub h: Vec<Vec<Complex64>>,
    /// |h_m|^2 power gain from UE m's paired D2D transmitter.
    pub g_d2d: Vec<f64>,
    /// g_cross[m][m']: power gain from UE m''s transmitter to UE m
    /// (diagonal unused, stored as 0).
    pub g_cross: Vec<Vec<f64>>,
}

impl ChannelSet {
    /// Stacked channel vector from all RRH antennas to UE m.
    pub fn h_ue(&self, m: usize) -> &[Complex64] {
        &self.h[m]
    }
}

pub fn sample_channels(topo: &Topology, cfg: &ScenarioConfig, seed: u64) -> Result<ChannelSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shadow = Normal::new(0.0, cfg.shadow_std_db)
        .map_err(|e| Error::Config(format!("bad shadow_std_db: {e}")))?;
    let l = cfg.antennas_per_rrh;

    let mut h = Vec::with_capacity(cfg.num_ue);
    for ue in &topo.ue_positions {
        let mut row = Vec::with_capacity(cfg.num_rrh * l);
        for rrh in &topo.rrh_positions {
            let d = rrh.distance(ue);
            if d == 0.0 {
                return Err(Error::ZeroDistance);
            }
            let shadow_db: f64 = shadow.sample(&mut rng);
            // |h|^2 = d^-2 * 10^(X/10) * |r|^2, so amplitude d^-1 * 10^(X/20).
            let amp = 10f64.powf(shadow_db / 20.0) / d;
            for _ in 0..l {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                // CN(0,1): each component has variance 1/2.
                let r = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
                row.push(r * amp);
            }
        }
        h.push(row);
    }

    let mut g_d2d = Vec::with_capacity(cfg.num_ue);
    for (ue, tx) in topo.ue_positions.iter().zip(&topo.d2d_tx_positions) {
        let d = ue.distance(tx);
        if d == 0.0 {
            return Err(Error::ZeroDistance);
        }
        g_d2d.push(d.powi(-2));
    }

    let mut g_cross = vec![vec![0.0; cfg.num_ue]; cfg.num_ue];
    for m in 0..cfg.num_ue {
        for mp in 0..cfg.num_ue {
            if m == mp {
                continue;
            }
            let d = topo.ue_positions[m].distance(&topo.d2d_tx_positions[mp]);
            if d == 0.0 {
                return Err(Error::ZeroDistance);
            }
            g_cross[m][mp] = d.powi(-2);
        }
    }

    Ok(ChannelSet { h, g_d2d, g_cross })
}
