// SPDX-License-Identifier: Apache-2.0

//! Reference trajectories, scenarios, metrics and experiment families.

pub mod family;
pub mod metrics;
pub mod output;
pub mod runner;
pub mod scenario;
pub mod trace;
pub mod trajectory;
pub mod tune;

pub use family::{run_family, Family, FamilyReport, FamilyRow};
pub use metrics::{metrics, MetricsReport};
pub use runner::{run_scenario, RunError, RunOutcome};
pub use scenario::{ControllerKind, Scenario};
pub use trace::{SimTrace, TraceRow};
pub use trajectory::Trajectory;
pub use tune::{GainsFile, TuneConfig};
