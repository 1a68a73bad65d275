// SPDX-License-Identifier: Apache-2.0

//! Simulation laboratory for pneumatic muscle actuator tracking control.
//!
//! The crate models the actuator as a three-element ODE with pressure-affine
//! coefficients and closes the loop with a proxy-based sliding mode
//! controller that is compensated by a second-order nonlinear disturbance
//! observer (IDO-PSMC). Baselines (PSMC, DO-SMC, SMC), the Lyapunov
//! feasibility gate on the gains, and a constrained firefly tuner are
//! included, together with a harness that runs the standard experiment
//! families and writes CSV traces.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod disturbance;
pub mod error;
pub mod harness;
pub mod integrate;
pub mod linalg;
pub mod observer;
pub mod plant;
pub mod stability;
pub mod tuner;

pub use control::{PsmcGains, Reference, SmcGains};
pub use disturbance::DisturbanceProfile;
pub use error::{Error, Result};
pub use plant::{Direction, PlantState, PmaParams};
pub use stability::StabilityReport;
pub use tuner::{FaConfig, Firefly, StepNoise};
