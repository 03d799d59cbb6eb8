//! Short DQN training run on the reduced scenario (2 processors, 2 UEs)
//! with per-epoch metrics printed as a learning curve sample.

use franopt::harness::{run_training, smooth, RunConfig, Seeds};
use franopt::ScenarioConfig;

fn main() -> franopt::Result<()> {
    let run = RunConfig {
        scenario: ScenarioConfig::reduced(),
        epochs: 300,
        seeds: Seeds::from_master(17),
        ..RunConfig::default()
    };
    let out = run_training(&run)?;

    let rewards: Vec<f64> = out.metrics.iter().map(|r| r.discounted_reward).collect();
    let smoothed = smooth(&rewards, 50);
    println!("epoch  discounted  smoothed  power_w  protections  epsilon");
    for row in out.metrics.iter().step_by(30) {
        println!(
            "{:5}  {:10.2}  {:8.2}  {:7.2}  {:11}  {:.3}",
            row.epoch,
            row.discounted_reward,
            smoothed[row.epoch as usize],
            row.mean_power_w,
            row.protections,
            row.epsilon
        );
    }
    println!(
        "smoothed reward moved from {:.2} to {:.2} over {} epochs",
        smoothed[49],
        smoothed.last().unwrap(),
        run.epochs
    );
    Ok(())
}
