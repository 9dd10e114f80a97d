//! Dynamics and analysis of the three-strategy clinical AI adoption game.
//!
//! Doctors choose between genuine adoption (G), partial adoption (P) and
//! rejection (R). Systemic benefits appear only once effective adoption
//! `e = x_G + γ·x_P` passes a threshold, the disruption cost of genuine
//! adoption ratchets down while the population sits above that threshold,
//! and the fraction of gains doctors expect to keep is set by a trust game
//! with the employing organisation.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! numerics. File formats, configuration and the command line live in the
//! `adoptlab` crate.
//!
//! Modules:
//!
//! - [`model`]: parameters, simplex states and payoff functions.
//! - [`dynamics`]: replicator/cost/belief right-hand sides, the event-aware
//!   fixed-step integrator and trajectory classification.
//! - [`equilibria`]: corner stability, the tipping point, comparative
//!   statics and the technology-type bifurcation.
//! - [`basins`]: barycentric basin-of-attraction maps.
//! - [`trust`]: the organisation's reneging problem and its repeated-game
//!   threshold.
//! - [`policy`]: subsidies, seeding, excursion holds, scenarios and welfare.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basins;
pub mod dynamics;
pub mod equilibria;
pub mod model;
pub mod policy;
pub mod root;
pub mod trust;

pub use dynamics::{
    integrate, BeliefGate, DynamicsError, Environment, Flags, IntegrationConfig, Simulation,
    Trajectory, TrajectoryType,
};
pub use model::{FullState, ModelParams, ParamError, SimplexState, Strategy, TrustParams};
