//! Build the exact tabular MDP for the reduced scenario (64 states, 16
//! actions, rewards computed through the real precoder) and solve it by
//! value iteration.

use franopt::oracle::{build_tabular_mdp, value_iteration};
use franopt::{Env, ScenarioConfig, SystemState};

fn main() -> franopt::Result<()> {
    let cfg = ScenarioConfig::reduced();
    let env = Env::new(cfg.clone(), 1, 2)?;

    let mdp = build_tabular_mdp(&env, 4096)?;
    println!(
        "tabular MDP: {} states x {} actions",
        mdp.num_states, mdp.num_actions
    );

    let (vf, policy) = value_iteration(&mdp, 0.99, 1e-8)?;
    println!(
        "value iteration: {} sweeps, final residual {:.2e}",
        vf.iterations, vf.residual
    );

    let s0 = SystemState::initial(&cfg).key() as usize;
    println!("V(s0) = {:.4} (initial state: all on, all C-RAN)", vf.v[s0]);
    let best = vf
        .v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    println!("best state key {} with V = {:.4}", best.0, best.1);
    println!("greedy action at s0: flat index {}", policy[s0]);
    Ok(())
}
