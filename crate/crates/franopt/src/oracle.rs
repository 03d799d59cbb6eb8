//! Exact tabular solvers for reduced scenarios, used as correctness
//! oracles by tests: enumerated MDP construction through the real
//! precoder and energy model, value iteration, and a closed-form
//! single-link transmit-power minimum.

use std::path::Path;

use crate::env::state::{ControlAction, SystemState};
use crate::env::Env;
use crate::error::{Error, Result};

/// Exact finite MDP over the bit-packed state keys of a reduced scenario.
/// Transitions compose the deterministic action effect, the product
/// Bernoulli cache draw, and the protecting operation; rewards are exact
/// expectations over the 2^M cache outcomes.
#[derive(Debug, Clone)]
pub struct TabularMdp {
    pub num_states: usize,
    pub num_actions: usize,
    /// transitions[s * num_actions + a] = sparse row of (next_state, prob).
    pub transitions: Vec<Vec<(usize, f64)>>,
    /// rewards[s * num_actions + a] = expected immediate reward.
    pub rewards: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ValueFunction {
    pub v: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// residual after each sweep, for contraction checks.
    pub residual_trace: Vec<f64>,
}

/// Enumerate every (state, action, cache-outcome) triple through the
/// environment's own step logic. Errors if the state space exceeds
/// `max_states`.
pub fn build_tabular_mdp(env: &Env, max_states: usize) -> Result<TabularMdp> {
    let cfg = &env.cfg;
    let num_states = 1usize
        .checked_shl(cfg.state_dim() as u32)
        .ok_or(Error::StateSpaceTooLarge {
            states: usize::MAX,
            cap: max_states,
        })?;
    if num_states > max_states {
        return Err(Error::StateSpaceTooLarge {
            states: num_states,
            cap: max_states,
        });
    }
    let num_actions = cfg.num_actions();
    let m = cfg.num_ue;

    let mut transitions = Vec::with_capacity(num_states * num_actions);
    let mut rewards = Vec::with_capacity(num_states * num_actions);
    for s in 0..num_states {
        let state = SystemState::from_key(s as u64, cfg);
        for a in 0..num_actions {
            let action = ControlAction::from_flat(a, cfg)?;
            let mut row: Vec<(usize, f64)> = Vec::new();
            let mut expected_reward = 0.0;
            for outcome in 0..(1usize << m) {
                let bits: Vec<bool> = (0..m).map(|i| (outcome >> i) & 1 == 1).collect();
                let prob: f64 = bits
                    .iter()
                    .zip(&cfg.rho)
                    .map(|(&b, &rho)| if b { rho } else { 1.0 - rho })
                    .product();
                if prob == 0.0 {
                    continue;
                }
                let step = env.step_with_cache(&state, &action, &bits)?;
                expected_reward += prob * step.reward;
                let next = step.next.key() as usize;
                match row.iter_mut().find(|(n, _)| *n == next) {
                    Some((_, p)) => *p += prob,
                    None => row.push((next, prob)),
                }
            }
            transitions.push(row);
            rewards.push(expected_reward);
        }
    }
    Ok(TabularMdp {
        num_states,
        num_actions,
        transitions,
        rewards,
    })
}

/// Bellman backups to sup-norm residual <= tol. Ties in the greedy policy
/// break to the lowest action index.
pub fn value_iteration(
    mdp: &TabularMdp,
    gamma: f64,
    tol: f64,
) -> Result<(ValueFunction, Vec<usize>)> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::BadDiscount(gamma));
    }
    let mut v = vec![0.0; mdp.num_states];
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let mut residual = 0.0f64;
        let mut next = vec![0.0; mdp.num_states];
        for s in 0..mdp.num_states {
            let best = (0..mdp.num_actions)
                .map(|a| q_value(mdp, &v, s, a, gamma))
                .fold(f64::NEG_INFINITY, f64::max);
            residual = residual.max((best - v[s]).abs());
            next[s] = best;
        }
        v = next;
        iterations += 1;
        trace.push(residual);
        if residual <= tol || iterations > 1_000_000 {
            let policy = greedy_policy(mdp, &v, gamma);
            return Ok((
                ValueFunction {
                    v,
                    iterations,
                    residual,
                    residual_trace: trace,
                },
                policy,
            ));
        }
    }
}

fn q_value(mdp: &TabularMdp, v: &[f64], s: usize, a: usize, gamma: f64) -> f64 {
    let idx = s * mdp.num_actions + a;
    mdp.rewards[idx]
        + gamma
            * mdp.transitions[idx]
                .iter()
                .map(|&(n, p)| p * v[n])
                .sum::<f64>()
}

pub fn greedy_policy(mdp: &TabularMdp, v: &[f64], gamma: f64) -> Vec<usize> {
    (0..mdp.num_states)
        .map(|s| {
            let mut best = 0;
            let mut best_q = q_value(mdp, v, s, 0, gamma);
            for a in 1..mdp.num_actions {
                let q = q_value(mdp, v, s, a, gamma);
                if q > best_q {
                    best = a;
                    best_q = q;
                }
            }
            best
        })
        .collect()
}

/// Exact V^pi for a fixed deterministic policy, by iterative backups to
/// sup-norm residual <= tol. Used to compare a learned greedy policy
/// against the value-iteration optimum on equal footing.
pub fn policy_evaluation(
    mdp: &TabularMdp,
    policy: &[usize],
    gamma: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::BadDiscount(gamma));
    }
    let mut v = vec![0.0; mdp.num_states];
    for _ in 0..1_000_000 {
        let mut residual = 0.0f64;
        let mut next = vec![0.0; mdp.num_states];
        for s in 0..mdp.num_states {
            next[s] = q_value(mdp, &v, s, policy[s], gamma);
            residual = residual.max((next[s] - v[s]).abs());
        }
        v = next;
        if residual <= tol {
            break;
        }
    }
    Ok(v)
}

/// Minimum transmit power meeting an SINR target over a single
/// interference-free link: gamma_sinr * sigma2 / g, from the binding
/// constraint g p / sigma2 = gamma_sinr.
pub fn single_link_optimum(g: f64, gamma_sinr: f64, sigma2: f64) -> Result<f64> {
    if g <= 0.0 {
        return Err(Error::ZeroGain);
    }
    Ok(gamma_sinr * sigma2 / g)
}

/// Dump V and the greedy policy as CSV (state_key,value,greedy_action).
pub fn dump_csv(vf: &ValueFunction, policy: &[usize], path: &Path) -> Result<()> {
    let mut out = String::from("state_key,value,greedy_action\n");
    for (s, (&v, &a)) in vf.v.iter().zip(policy).enumerate() {
        out.push_str(&format!("{s},{v},{a}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}
