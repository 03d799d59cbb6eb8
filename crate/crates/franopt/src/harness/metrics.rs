//! Per-epoch training metrics and CSV emission.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "epoch,discounted_reward,mean_power_w,protections,epsilon,loss,seconds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub epoch: u64,
    /// Sum of gamma^t * reward over the epoch's steps.
    pub discounted_reward: f64,
    /// Undiscounted mean system power over the epoch, watts.
    pub mean_power_w: f64,
    /// Steps whose protecting operation fired.
    pub protections: u64,
    /// Exploration rate at epoch end.
    pub epsilon: f64,
    /// Mean squared TD error over the epoch's updates (0 if none).
    pub loss: f64,
    /// Wall-clock seconds; 0 unless timing capture is enabled, so that
    /// repeated runs stay byte-identical.
    pub seconds: f64,
}

impl MetricsRow {
    fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.epoch,
            self.discounted_reward,
            self.mean_power_w,
            self.protections,
            self.epsilon,
            self.loss,
            self.seconds
        )
    }
}

pub fn emit_metrics(rows: &[MetricsRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Config("metrics emission requires at least one row".into()));
    }
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "unexpected metrics header: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Config(format!("malformed metrics line: {line}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| Error::Config(format!("bad float {s}: {e}")))
        };
        rows.push(MetricsRow {
            epoch: f[0]
                .parse()
                .map_err(|e| Error::Config(format!("bad epoch {}: {e}", f[0])))?,
            discounted_reward: parse(f[1])?,
            mean_power_w: parse(f[2])?,
            protections: f[3]
                .parse()
                .map_err(|e| Error::Config(format!("bad count {}: {e}", f[3])))?,
            epsilon: parse(f[4])?,
            loss: parse(f[5])?,
            seconds: parse(f[6])?,
        });
    }
    Ok(rows)
}

/// Trailing moving average with the given window, used for smoothed
/// learning curves.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, &v) in values.iter().enumerate() {
        acc += v;
        if i >= w {
            acc -= values[i - w];
        }
        out.push(acc / (i.min(w - 1) + 1) as f64);
    }
    out
}
