use franopt::config::ScenarioConfig;
use franopt::env::Env;
use franopt::harness::{run_evaluation, train_in_env, ActionHead, RunConfig, Seeds};
use franopt::policies::Policy;
use franopt::rl::EpsilonSchedule;
use std::time::Instant;

fn main() {
    let a: Vec<String> = std::env::args().collect();
    let epochs: u64 = a[1].parse().unwrap();
    let master: u64 = a[2].parse().unwrap();
    let mut first: Option<Env> = None;
    for rho in [0.6, 0.75, 0.9] {
        let run = RunConfig {
            scenario: ScenarioConfig::default().with_uniform_rho(rho),
            epochs,
            learning_rate: 1e-3,
            train_every: 1,
            replay_capacity: 20000,
            hidden_dims: vec![64, 64],
            epsilon: EpsilonSchedule { start: 1.0, end: 0.01, anneal_steps: 30000 },
            seeds: Seeds::from_master(master),
            ..RunConfig::default()
        };
        let t0 = Instant::now();
        let mut env = Env::new(run.scenario.clone(), run.seeds.topology, run.seeds.channel).unwrap();
        if let Some(f) = &first {
            env = env.with_shared_cache(f);
        }
        let out = train_in_env(&mut env, &run, None, ActionHead::Full).unwrap();
        let eval = run_evaluation(&env, &run, &Policy::Drl(out.net.clone()), 1000).unwrap();
        println!(
            "master {master} rho {rho}: power {:.3} +- {:.3}, reward {:.1}, {:.0?}",
            eval.mean_power_w,
            1.96 * eval.stderr_power_w,
            eval.mean_discounted_reward,
            t0.elapsed()
        );
        first.get_or_insert(env);
    }
}
