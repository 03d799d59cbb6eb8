//! Deep Q-learning: network, optimizer, replay memory, agent,
//! tabular baseline, and checkpointing.

pub mod adam;
pub mod agent;
pub mod checkpoint;
pub mod net;
pub mod qtable;
pub mod replay;

pub use adam::{adam_step, AdamState};
pub use agent::{argmax, select_action, td_targets, DqnAgent, EpsilonSchedule};
pub use checkpoint::{config_fingerprint, Checkpoint};
pub use net::{Gradients, QNetwork, TdSample};
pub use qtable::QTable;
pub use replay::{ReplayMemory, Transition};
