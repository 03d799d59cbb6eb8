//! Baseline controllers sharing the environment's action contract.

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::env::state::ControlAction;
use crate::error::Result;
use crate::rl::{select_action, EpsilonSchedule, QNetwork, QTable};

/// Round-robin sweep: step t targets processor (t mod N) off and
/// UE (t mod M) to device-to-device. Stateless, so reverted UEs are
/// re-attempted on the next pass.
pub fn d2d_always_action(cfg: &ScenarioConfig, t: u64) -> ControlAction {
    ControlAction {
        processor_index: (t as usize) % cfg.num_processors,
        processor_target: false,
        ue_index: (t as usize) % cfg.num_ue,
        ue_target_mode: true,
    }
}

/// Uniform over all 4NM flat actions.
pub fn random_action(cfg: &ScenarioConfig, rng: &mut impl Rng) -> Result<ControlAction> {
    ControlAction::from_flat(rng.random_range(0..cfg.num_actions()), cfg)
}

/// Number of actions for the processor-only head (processor index x target).
pub fn cran_only_num_actions(cfg: &ScenarioConfig) -> usize {
    2 * cfg.num_processors
}

/// Decode a processor-only head index into a full action whose UE part is a
/// no-op: UE 0 re-assigned to C-RAN.
pub fn cran_only_decode(head_index: usize, _cfg: &ScenarioConfig) -> ControlAction {
    ControlAction {
        processor_index: head_index / 2,
        processor_target: head_index % 2 == 1,
        ue_index: 0,
        ue_target_mode: false,
    }
}

/// Epsilon-greedy selection over the restricted 2N-action head. The network
/// consumes the full state encoding; only its output head is restricted.
pub fn cran_only_action(
    net: &QNetwork,
    cfg: &ScenarioConfig,
    state_vec: &[f64],
    step: u64,
    sched: &EpsilonSchedule,
    rng: &mut impl Rng,
) -> Result<(usize, ControlAction)> {
    let head = select_action(net, state_vec, step, sched, rng)?;
    Ok((head, cran_only_decode(head, cfg)))
}

/// Interchangeable controller over the full action space. The restricted
/// C-RAN-only head lives outside this enum because its action index space
/// differs.
pub enum Policy {
    Drl(QNetwork),
    /// Processor-only head; emitted actions keep every UE in C-RAN.
    CranOnly(QNetwork),
    QLearning(QTable),
    D2dAlways,
    Random,
}

impl Policy {
    /// Greedy action (no exploration) for evaluation runs.
    pub fn action(
        &self,
        cfg: &ScenarioConfig,
        state_vec: &[f64],
        state_key: u64,
        t: u64,
        rng: &mut impl Rng,
    ) -> Result<ControlAction> {
        match self {
            Policy::Drl(net) => {
                let greedy = EpsilonSchedule {
                    start: 0.0,
                    end: 0.0,
                    anneal_steps: 1,
                };
                let a = select_action(net, state_vec, t, &greedy, rng)?;
                ControlAction::from_flat(a, cfg)
            }
            Policy::CranOnly(net) => {
                let q = net.forward(state_vec)?;
                Ok(cran_only_decode(crate::rl::argmax(&q), cfg))
            }
            Policy::QLearning(table) => ControlAction::from_flat(table.greedy_action(state_key), cfg),
            Policy::D2dAlways => Ok(d2d_always_action(cfg, t)),
            Policy::Random => random_action(cfg, rng),
        }
    }
}
