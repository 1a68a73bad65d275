// SPDX-License-Identifier: Apache-2.0

//! Sufficient conditions for ultimate boundedness of the proxy-plant
//! coupling error, and the asymptotic sliding-manifold bound.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::control::PsmcGains;
use crate::error::{Error, Result};
use crate::linalg::SymMatrix2;
use crate::observer::ObserverGains;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Violation {
    /// `m_p > 0`.
    ProxyMass,
    /// `K_c` positive definite.
    CouplingMatrix,
    /// `Gamma >= lambda2 (K_p + K_i + K_d)`.
    SwitchingGain,
    /// `varpi = K_p c1 - K_i - K_d c2 > 0`.
    VarpiPositivity,
    /// Observer error matrix not Hurwitz, so no observer bound exists.
    ObserverStability,
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::ProxyMass => "proxy mass",
            Violation::CouplingMatrix => "K_c positive definiteness",
            Violation::SwitchingGain => "switching gain",
            Violation::VarpiPositivity => "ϖ positivity",
            Violation::ObserverStability => "observer stability",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub feasible: bool,
    pub varpi: f64,
    pub kc_eigs: [f64; 2],
    pub km_min: f64,
    /// Coupling-error bound; absent when `lambda_min(K_m) <= 0`.
    pub lambda2: Option<f64>,
    pub gamma_required: Option<f64>,
    pub eps: f64,
    pub lambda1: f64,
    pub violations: Vec<Violation>,
}

impl StabilityReport {
    pub fn violation_names(&self) -> Vec<&'static str> {
        self.violations.iter().map(Violation::name).collect()
    }
}

pub fn varpi(g: &PsmcGains) -> f64 {
    g.kp * g.c1 - g.ki - g.kd * g.c2
}

/// Diagonal of `K_m = diag(K_i c2, varpi, K_d)`.
pub fn km_matrix(g: &PsmcGains) -> [f64; 3] {
    [g.ki * g.c2, varpi(g), g.kd]
}

pub fn km_min(g: &PsmcGains) -> f64 {
    km_matrix(g).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn kc_matrix(g: &PsmcGains) -> SymMatrix2 {
    SymMatrix2::new(g.kp * g.c2 + g.ki * g.c1, g.ki + g.kd * g.c2, g.kp + g.kd * g.c1)
}

/// `(eps + lambda1)(c1 + c2 + 1) / lambda_min(K_m)`.
pub fn lambda2(g: &PsmcGains, eps: f64, lambda1: f64) -> Result<f64> {
    let km = km_min(g);
    if !(km > 0.0) {
        return Err(Error::InfeasibleGains(format!(
            "lambda_min(K_m) = {km} is not positive"
        )));
    }
    Ok((eps + lambda1) * (g.c1 + g.c2 + 1.0) / km)
}

/// Limit of `|S_q|` as the proxy mass grows: `lambda2 (c1 + c2 + 1)`.
pub fn sq_asymptotic_bound(g: &PsmcGains, eps: f64, lambda1: f64) -> Result<f64> {
    Ok(lambda2(g, eps, lambda1)? * (g.c1 + g.c2 + 1.0))
}

pub fn check_theorem1(g: &PsmcGains, eps: f64, lambda1: f64) -> StabilityReport {
    let mut violations = Vec::new();
    if !(g.m_p > 0.0) {
        violations.push(Violation::ProxyMass);
    }
    let kc = kc_matrix(g);
    if !kc.is_positive_definite() {
        violations.push(Violation::CouplingMatrix);
    }
    let w = varpi(g);
    let km = km_min(g);
    let l2 = lambda2(g, eps, lambda1).ok();
    let gamma_required = l2.map(|l| l * (g.kp + g.ki + g.kd));
    match gamma_required {
        Some(req) if g.gamma >= req => {}
        // With varpi <= 0 the bound is undefined; that failure is reported
        // once, under varpi.
        None if !(w > 0.0) => {}
        _ => violations.push(Violation::SwitchingGain),
    }
    if !(w > 0.0) {
        violations.push(Violation::VarpiPositivity);
    }
    StabilityReport {
        feasible: violations.is_empty(),
        varpi: w,
        kc_eigs: kc.eigenvalues(),
        km_min: km,
        lambda2: l2,
        gamma_required,
        eps,
        lambda1,
        violations,
    }
}

/// Full gate: observer bound from `(l1, l2)` and `q1`, then the four
/// proxy conditions. Non-Hurwitz observer gains fail outright.
pub fn assess(g: &PsmcGains, eps: f64, q1: &SymMatrix2) -> StabilityReport {
    match ObserverGains::new(g.l1, g.l2).and_then(|o| o.error_bound(q1, eps)) {
        Ok(lambda1) => check_theorem1(g, eps, lambda1),
        Err(_) => {
            let mut report = check_theorem1(g, eps, 0.0);
            report.lambda1 = f64::NAN;
            report.violations.push(Violation::ObserverStability);
            report.feasible = false;
            report
        }
    }
}
