// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the criterion benches.

use pmalab_core::harness::Scenario;
use pmalab_core::plant::{PlantState, PressureHistory};

/// One second of the default closed loop.
pub fn short_scenario() -> Scenario {
    Scenario {
        duration: 1.0,
        window: Some([0.5, 1.0]),
        ..Scenario::default()
    }
}

/// Plant at rest with the pressure held at `p`.
pub fn resting_state(p: f64) -> PlantState {
    PlantState {
        x: 0.01,
        xdot: 0.0,
        t: 0.0,
        pressure: PressureHistory {
            p_prev: p,
            ..PressureHistory::default()
        },
    }
}
