use franopt::config::ScenarioConfig;
use franopt::env::Env;
use franopt::harness::{run_evaluation, RunConfig, Seeds};
use franopt::policies::Policy;

fn main() {
    let mut first: Option<Env> = None;
    for rho in [0.6, 0.75, 0.9] {
        let run = RunConfig {
            scenario: ScenarioConfig::default().with_uniform_rho(rho),
            seeds: Seeds::from_master(7),
            ..RunConfig::default()
        };
        let mut env = Env::new(run.scenario.clone(), run.seeds.topology, run.seeds.channel).unwrap();
        if let Some(f) = &first {
            env = env.with_shared_cache(f);
        }
        for (name, p) in [("d2d-always", Policy::D2dAlways), ("random", Policy::Random)] {
            let eval = run_evaluation(&env, &run, &p, 2000).unwrap();
            println!(
                "rho {rho} {name}: power {:.3} +- {:.3}, reward {:.1}",
                eval.mean_power_w,
                1.96 * eval.stderr_power_w,
                eval.mean_discounted_reward
            );
        }
        first.get_or_insert(env);
    }
}
