//! Scenario geometry.
//!
//! RRHs sit on a regular polygon with the configured pairwise spacing
//! (equilateral triangle for the default 3 RRHs). UEs are dropped uniformly
//! in a disk around the RRH centroid and each UE gets a paired D2D
//! transmitter within `d2d_max_distance`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub rrh_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    /// One paired D2D transmitter per UE.
    pub d2d_tx_positions: Vec<Point>,
}

/// Uniform sample in a disk of radius `r` around `center`.
fn sample_disk(rng: &mut impl Rng, center: Point, r: f64) -> Point {
    let radius = r * rng.random::<f64>().sqrt();
    let angle = rng.random::<f64>() * std::f64::consts::TAU;
    Point {
        x: center.x + radius * angle.cos(),
        y: center.y + radius * angle.sin(),
    }
}

pub fn generate_topology(cfg: &ScenarioConfig, seed: u64) -> Topology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = cfg.num_rrh;

    // Regular k-gon with side length rrh_spacing, centered at the origin.
    // For k = 1 the single RRH sits at the origin.
    let rrh_positions: Vec<Point> = if k == 1 {
        vec![Point { x: 0.0, y: 0.0 }]
    } else {
        let circumradius = cfg.rrh_spacing / (2.0 * (std::f64::consts::PI / k as f64).sin());
        (0..k)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / k as f64;
                Point {
                    x: circumradius * a.cos(),
                    y: circumradius * a.sin(),
                }
            })
            .collect()
    };
    let center = Point { x: 0.0, y: 0.0 };

    let mut ue_positions = Vec::with_capacity(cfg.num_ue);
    let mut d2d_tx_positions = Vec::with_capacity(cfg.num_ue);
    for _ in 0..cfg.num_ue {
        // Reject drops that collide with an RRH or another UE so that every
        // pairwise distance used by the channel model is nonzero.
        let ue = loop {
            let p = sample_disk(&mut rng, center, cfg.ue_disk_radius);
            let clear = rrh_positions.iter().all(|r| r.distance(&p) > 0.0)
                && ue_positions.iter().all(|u: &Point| u.distance(&p) > 0.0);
            if clear {
                break p;
            }
        };
        let tx = sample_disk(&mut rng, ue, cfg.d2d_max_distance);
        ue_positions.push(ue);
        d2d_tx_positions.push(tx);
    }

    Topology {
        rrh_positions,
        ue_positions,
        d2d_tx_positions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rrh_pairwise_spacing() {
        let cfg = ScenarioConfig::default();
        let topo = generate_topology(&cfg, 7);
        for i in 0..3 {
            for j in (i + 1)..3 {
                let d = topo.rrh_positions[i].distance(&topo.rrh_positions[j]);
                assert!((d - 800.0).abs() < 1e-9, "pair ({i},{j}) spacing {d}");
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = ScenarioConfig::default();
        let a = generate_topology(&cfg, 42);
        let b = generate_topology(&cfg, 42);
        assert_eq!(a.ue_positions, b.ue_positions);
        assert_eq!(a.d2d_tx_positions, b.d2d_tx_positions);
        let c = generate_topology(&cfg, 43);
        assert_ne!(a.ue_positions, c.ue_positions);
    }

    #[test]
    fn geometric_invariants() {
        let cfg = ScenarioConfig::default();
        let center = Point { x: 0.0, y: 0.0 };
        for seed in 0..20 {
            let topo = generate_topology(&cfg, seed);
            for (m, ue) in topo.ue_positions.iter().enumerate() {
                assert!(ue.distance(&center) <= cfg.ue_disk_radius + 1e-9);
                let d2d = ue.distance(&topo.d2d_tx_positions[m]);
                assert!(d2d <= cfg.d2d_max_distance + 1e-9);
            }
        }
    }

    #[test]
    fn zero_d2d_radius_colocates_transmitters() {
        let cfg = ScenarioConfig {
            d2d_max_distance: 0.0,
            ..ScenarioConfig::default()
        };
        let topo = generate_topology(&cfg, 3);
        for (ue, tx) in topo.ue_positions.iter().zip(&topo.d2d_tx_positions) {
            assert!(ue.distance(tx) < 1e-12);
        }
    }
}
