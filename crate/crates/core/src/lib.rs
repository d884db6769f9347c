#![no_std]
#![warn(missing_debug_implementations)]

//! Differential evolution whose mutation strategy is picked per parent by a
//! double deep Q-network.
//!
//! This crate is `no_std` (it needs `alloc`) and holds every algorithmic piece:
//!
//! * [`bench`]: box-constrained test functions and suite construction.
//! * [`de`]: population, the four mutation strategies, crossover, repair,
//!   selection and the step-wise run environment.
//! * [`features`]: the 99-dimensional state vector and its bookkeeping.
//! * [`rewards`]: per-application reward definitions.
//! * [`neural`]: the dense Q-network, Adam, and the checkpoint codec.
//! * [`ddqn`]: replay memory, action selection, double-Q targets, the agent.
//! * [`episode`]: drivers that run one DE run under a policy or under the
//!   learning agent.
//!
//! File IO, configuration and the command line live in the `de-ddqn` crate.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bench;
pub mod ddqn;
pub mod de;
pub mod episode;
pub mod features;
pub mod neural;
pub mod rewards;
pub mod rng;

pub use bench::{FunctionClass, ObjectiveFunction};
pub use de::{DeParams, DeRun, Population, Strategy};
pub use features::STATE_DIM;
pub use neural::{Adam, QNetwork};
pub use rewards::RewardKind;
