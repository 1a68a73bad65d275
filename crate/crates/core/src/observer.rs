// SPDX-License-Identifier: Apache-2.0

//! Second-order nonlinear disturbance observer.
//!
//! Auxiliary states `p1`, `p2` are integrated from the nominal model
//! acceleration `a = f + b u`; the estimates follow from the measured
//! velocity:
//!
//! ```text
//! tau_hat    = p1 + l1 xdot,   p1' = -l1 (a + tau_hat) + taudot_hat
//! taudot_hat = p2 + l2 xdot,   p2' = -l2 (a + tau_hat)
//! ```

use crate::error::{Error, Result};
use crate::integrate::{all_finite, rk4_step};
use crate::linalg::{solve_lyapunov, Mat2, SymMatrix2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverGains {
    l1: f64,
    l2: f64,
}

impl ObserverGains {
    /// Fails unless the error matrix is Hurwitz, i.e. `l1 > 0` and `l2 > 0`.
    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(Error::invalid(
                "observer gains",
                format!("l1 = {l1}, l2 = {l2}: both must be positive for a Hurwitz error matrix"),
            ));
        }
        Ok(Self { l1, l2 })
    }

    /// Gains placing both error poles at `-rate`.
    pub fn double_pole(rate: f64) -> Result<Self> {
        Self::new(2.0 * rate, rate * rate)
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn error_matrix(&self) -> Mat2 {
        error_matrix(self.l1, self.l2)
    }

    /// Ultimate bound on the estimation error for a disturbance bound `eps`.
    pub fn error_bound(&self, q: &SymMatrix2, eps: f64) -> Result<f64> {
        let p = solve_lyapunov(&self.error_matrix(), q)?;
        Ok(estimation_error_bound(&p, q, eps))
    }
}

/// Estimation-error dynamics `[[-l1, 1], [-l2, 0]]`.
pub fn error_matrix(l1: f64, l2: f64) -> Mat2 {
    Mat2([[-l1, 1.0], [-l2, 0.0]])
}

/// `2 ||P B||_1 eps / lambda_min(Q)` with `B = [0, 1]^T`.
pub fn estimation_error_bound(p: &SymMatrix2, q: &SymMatrix2, eps: f64) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    let pb = p.mul_vec([0.0, 1.0]);
    2.0 * (pb[0].abs() + pb[1].abs()) * eps / q.min_eigenvalue()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverState {
    pub p1: f64,
    pub p2: f64,
    pub tau_hat: f64,
    pub taudot_hat: f64,
}

impl ObserverState {
    /// Zero initial estimates at the measured initial velocity.
    pub fn new(gains: &ObserverGains, xdot0: f64) -> Self {
        Self {
            p1: -gains.l1 * xdot0,
            p2: -gains.l2 * xdot0,
            tau_hat: 0.0,
            taudot_hat: 0.0,
        }
    }

    /// Recompute the estimates from a fresh velocity measurement.
    pub fn measured(&self, gains: &ObserverGains, xdot: f64) -> Self {
        Self {
            tau_hat: self.p1 + gains.l1 * xdot,
            taudot_hat: self.p2 + gains.l2 * xdot,
            ..*self
        }
    }
}

/// Integrate the auxiliary states over one step with the measured velocity
/// and the nominal acceleration `drive` held, then refresh the estimates at
/// the same velocity. Call [`ObserverState::measured`] once the next sample
/// is in.
pub fn observer_step(
    gains: &ObserverGains,
    obs: &ObserverState,
    xdot: f64,
    drive: f64,
    dt: f64,
) -> Result<ObserverState> {
    let (l1, l2) = (gains.l1, gains.l2);
    let y = rk4_step(0.0, &[obs.p1, obs.p2], dt, |_, p| {
        let tau_hat = p[0] + l1 * xdot;
        let taudot_hat = p[1] + l2 * xdot;
        [-l1 * (drive + tau_hat) + taudot_hat, -l2 * (drive + tau_hat)]
    });
    if !all_finite(&y) {
        return Err(Error::ObserverDiverged);
    }
    let next = ObserverState {
        p1: y[0],
        p2: y[1],
        ..*obs
    }
    .measured(gains, xdot);
    if !next.tau_hat.is_finite() || !next.taudot_hat.is_finite() {
        return Err(Error::ObserverDiverged);
    }
    Ok(next)
}
