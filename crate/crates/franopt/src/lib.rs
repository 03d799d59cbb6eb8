//! Green F-RAN control: a seedable downlink fog-RAN simulator with sparse
//! precoding optimization and deep-Q-network mode/processor control.
//!
//! The crate models a cloud of heterogeneous processors serving UEs that can
//! operate either in C-RAN mode (cooperatively precoded by the RRHs) or in
//! D2D mode (served by a cache-equipped paired device). A controller picks
//! one processor and one UE to retarget per step; precoding for the C-RAN
//! set is then re-optimized under per-UE SINR, per-RRH power, and cloud
//! computing-capacity constraints, and the negated system power is the
//! reward driving the learning algorithms.
//!
//! Modules:
//! - [`env`]: scenario generation, channels, state transitions, energy
//!   accounting, and the protecting operation.
//! - [`precoder`]: reweighted-l1 sparse precoding over an embedded SOCP
//!   solver.
//! - [`rl`]: DQN (dense net, backprop, Adam), replay memory, epsilon-greedy
//!   control, target sync, and a tabular Q-learning baseline.
//! - [`policies`]: the comparison controllers (random, D2D-always,
//!   C-RAN-only DRL, Q-learning, DRL).
//! - [`oracle`]: exact value iteration on reduced instances and closed-form
//!   precoding checks, used by tests and verification runs.
//! - [`harness`]: config-driven training, evaluation, sweep, and transfer
//!   runs with CSV metrics and checkpointing.

pub mod config;
pub mod env;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod policies;
pub mod precoder;
pub mod rl;

pub use num_complex;

pub use config::ScenarioConfig;
pub use env::{ControlAction, Env, StepOutcome, SystemState};
pub use error::{Error, Result};
