// SPDX-License-Identifier: Apache-2.0

//! Gain files and the gain-tuning problem on a closed-loop scenario.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::runner::run_scenario;
use super::scenario::{default_gains, Scenario, StabilityConfig};
use crate::control::{PsmcGains, ReferenceSignal};
use crate::error::{Error, Result};
use crate::stability::{assess, StabilityReport};
use crate::tuner::{self, FaConfig, FaOutcome, Problem};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Gain set plus the stability settings used to judge it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsFile {
    pub gains: PsmcGains,
    #[serde(default)]
    pub stability: StabilityConfig,
}

impl GainsFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let g: GainsFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        g.gains.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !g.stability.q1().is_positive_definite() {
            return Err(Error::Config("stability.q1 must be positive definite".into()));
        }
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read(path)?).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("gains serialize")
    }

    /// Gate with the configured bound, or the default one when `eps` is
    /// absent.
    pub fn assess(&self) -> StabilityReport {
        let eps = self.stability.eps.unwrap_or(self.stability.default_eps);
        assess(&self.gains, eps, &self.stability.q1())
    }
}

/// `[fa]` search settings and the `[scenario]` each candidate is run on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    #[serde(default)]
    pub fa: FaConfig,
    #[serde(default)]
    pub scenario: Scenario,
}

impl TuneConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: TuneConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read(path)?).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.fa.validate()?;
        if self.fa.dim() != PsmcGains::DIM {
            return Err(Error::Config(format!(
                "fa.bounds needs {} entries [gamma, c1, c2, kp, ki, kd, l1, l2], got {}",
                PsmcGains::DIM,
                self.fa.dim()
            )));
        }
        if self.fa.bounds.iter().any(|[lo, _]| !(*lo > 0.0)) {
            return Err(Error::Config("fa.bounds lower limits must be > 0".into()));
        }
        self.scenario.validate()
    }
}

/// Tracking objective of a scenario as a function of the 8 gains. The
/// proxy mass stays at the scenario's value.
pub struct TrackingProblem<'a> {
    pub scenario: &'a Scenario,
    pub lambda: f64,
}

impl TrackingProblem<'_> {
    pub fn gains(&self, s: &[f64]) -> PsmcGains {
        PsmcGains::from_vector(s, self.scenario.gains.m_p)
    }

    pub fn report(&self, s: &[f64]) -> StabilityReport {
        assess(&self.gains(s), self.scenario.eps(), &self.scenario.stability.q1())
    }
}

impl Problem for TrackingProblem<'_> {
    fn feasible(&self, s: &[f64]) -> bool {
        self.report(s).feasible
    }

    fn evaluate(&self, s: &[f64]) -> f64 {
        let mut sc = self.scenario.clone();
        sc.gains = self.gains(s);
        // The tuner has already applied the gate.
        sc.force = true;
        match run_scenario(&sc) {
            Ok(o) => tuner::objective(&o.trace, self.lambda).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    }

    /// Objective of a plant that never moves from `x = 0`.
    fn reference_objective(&self) -> f64 {
        let s = self.scenario;
        let n = s.steps();
        let (sum, max) = (0..=n)
            .map(|k| s.trajectory.at(k as f64 * s.dt).xd.abs())
            .fold((0.0, 0.0f64), |(a, m), e| (a + e, m.max(e)));
        sum / (n + 1) as f64 + self.lambda * max
    }
}

pub fn tune(config: &TuneConfig) -> Result<(FaOutcome, PsmcGains)> {
    config.validate()?;
    let problem = TrackingProblem {
        scenario: &config.scenario,
        lambda: config.fa.lambda_tradeoff,
    };
    let outcome = tuner::run(&config.fa, &problem)?;
    let gains = problem.gains(&outcome.best.s);
    Ok((outcome, gains))
}

/// Gains file for the tuned set, annotated with its objective.
pub fn best_gains_toml(config: &TuneConfig, gains: &PsmcGains, objective: f64) -> String {
    let file = GainsFile {
        gains: *gains,
        stability: StabilityConfig {
            eps: Some(config.scenario.eps()),
            ..config.scenario.stability.clone()
        },
    };
    format!(
        "# objective h = {}\n{}",
        super::trace::fmt_g(objective),
        file.to_toml_string()
    )
}

impl Default for GainsFile {
    fn default() -> Self {
        Self {
            gains: default_gains(),
            stability: StabilityConfig::default(),
        }
    }
}
