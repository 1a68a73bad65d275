// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pressure {pressure} Pa outside actuator limits [{min}, {max}]")]
    PressureOutOfRange { pressure: f64, min: f64, max: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("plant integration diverged at t = {t} s")]
    IntegrationDiverged { t: f64 },

    #[error("disturbance observer diverged")]
    ObserverDiverged,

    #[error("proxy state diverged")]
    ProxyDiverged,

    #[error("control gain b(x, xdot) = {b:e} below floor {floor:e} at x = {x}, xdot = {xdot}")]
    SingularGain { x: f64, xdot: f64, b: f64, floor: f64 },

    #[error("matrix is not Hurwitz; Lyapunov equation has no positive definite solution")]
    NotHurwitz,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("infeasible gains: {0}")]
    InfeasibleGains(String),

    #[error("{0}")]
    Domain(String),

    #[error("no feasible candidate within the generation budget (best infeasible objective {best_objective})")]
    ExhaustedBudget { best_objective: f64, best: Vec<f64> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for the numerical blow-up family (plant, observer or proxy).
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            Error::IntegrationDiverged { .. } | Error::ObserverDiverged | Error::ProxyDiverged
        )
    }
}
