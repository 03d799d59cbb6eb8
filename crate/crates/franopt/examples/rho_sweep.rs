//! Train one small model per cache-availability value and compare
//! evaluated mean power. Higher rho should cost less power, since D2D
//! service succeeds more often.

use franopt::harness::{run_sweep, RunConfig, Seeds};
use franopt::ScenarioConfig;

fn main() -> franopt::Result<()> {
    let base = RunConfig {
        scenario: ScenarioConfig::reduced(),
        epochs: 400,
        seeds: Seeds::from_master(23),
        ..RunConfig::default()
    };
    let entries = run_sweep(&base, &[0.6, 0.75, 0.9], 500)?;

    println!("rho    mean reward    95% CI             mean power (W)");
    for e in &entries {
        let (lo, hi) = e.eval.reward_ci95();
        println!(
            "{:.2}  {:12.2}  [{:9.2}, {:9.2}]  {:8.3}",
            e.rho, e.eval.mean_discounted_reward, lo, hi, e.eval.mean_power_w
        );
    }
    Ok(())
}
