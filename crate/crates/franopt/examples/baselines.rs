//! Evaluate the non-learning baseline controllers side by side: the
//! round-robin all-D2D sweep, the uniform random controller, and a short
//! DQN training run, all in the same environment.

use franopt::harness::{run_evaluation, run_training, RunConfig, Seeds};
use franopt::policies::Policy;
use franopt::{Env, ScenarioConfig};

fn main() -> franopt::Result<()> {
    let run = RunConfig {
        scenario: ScenarioConfig::reduced(),
        epochs: 400,
        seeds: Seeds::from_master(5),
        ..RunConfig::default()
    };
    let env = Env::new(run.scenario.clone(), run.seeds.topology, run.seeds.channel)?;

    println!("training a small DQN for comparison ...");
    let trained = run_training(&run)?;

    let evaluate = |name: &str, policy: &Policy| -> franopt::Result<()> {
        let s = run_evaluation(&env, &run, policy, 500)?;
        println!(
            "{name:12}  mean reward {:10.2} +- {:6.2}  mean power {:7.3} W",
            s.mean_discounted_reward,
            1.96 * s.stderr_discounted_reward,
            s.mean_power_w
        );
        Ok(())
    };
    evaluate("d2d_always", &Policy::D2dAlways)?;
    evaluate("random", &Policy::Random)?;
    evaluate("dqn", &Policy::Drl(trained.net))?;
    Ok(())
}
