//! Transfer learning: train in a rho = 0.9 environment, then reuse the
//! weights (fresh optimizer and replay memory) to warm-start training at
//! rho = 0.75, comparing against a from-scratch run of the same length.

use franopt::harness::{run_training, run_transfer, smooth, RunConfig, Seeds};
use franopt::ScenarioConfig;

fn main() -> franopt::Result<()> {
    let source_run = RunConfig {
        scenario: ScenarioConfig::reduced().with_uniform_rho(0.9),
        epochs: 600,
        seeds: Seeds::from_master(31),
        ..RunConfig::default()
    };
    println!("training source model at rho = 0.9 ...");
    let source = run_training(&source_run)?;

    let target_run = RunConfig {
        scenario: ScenarioConfig::reduced().with_uniform_rho(0.75),
        epochs: 200,
        ..source_run.clone()
    };
    println!("warm-started training at rho = 0.75 ...");
    let transferred = run_transfer(&source.net, &target_run)?;
    println!("from-scratch training at rho = 0.75 ...");
    let scratch = run_training(&target_run)?;

    let curve = |m: &[franopt::harness::MetricsRow]| {
        let r: Vec<f64> = m.iter().map(|x| x.discounted_reward).collect();
        smooth(&r, 50)
    };
    let (t, s) = (curve(&transferred.metrics), curve(&scratch.metrics));
    println!("epoch  transferred  from-scratch (smoothed discounted reward)");
    for i in (0..t.len()).step_by(25) {
        println!("{:5}  {:11.2}  {:12.2}", i, t[i], s[i]);
    }
    Ok(())
}
