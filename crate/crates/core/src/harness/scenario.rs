// SPDX-License-Identifier: Apache-2.0

//! Scenario description, loaded from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::trajectory::Trajectory;
use crate::control::{PsmcGains, SmcGains};
use crate::disturbance::DisturbanceProfile;
use crate::error::{Error, Result};
use crate::linalg::SymMatrix2;
use crate::plant::PmaParams;

/// Environment variable overriding every configured output directory.
pub const OUTPUT_DIR_ENV: &str = "PMALAB_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    IdoPsmc,
    Psmc,
    DoSmc,
    Smc,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [Self::IdoPsmc, Self::Psmc, Self::DoSmc, Self::Smc];

    pub fn label(&self) -> &'static str {
        match self {
            Self::IdoPsmc => "IDO-PSMC",
            Self::Psmc => "PSMC",
            Self::DoSmc => "DO-SMC",
            Self::Smc => "SMC",
        }
    }

    pub fn uses_proxy(&self) -> bool {
        matches!(self, Self::IdoPsmc | Self::Psmc)
    }

    pub fn uses_observer(&self) -> bool {
        matches!(self, Self::IdoPsmc | Self::DoSmc)
    }
}

/// Proxy integration steps per control period.
pub const DEFAULT_PROXY_SUBSTEPS: usize = 10;

/// Published coupling gains with the observer double pole at `-20`.
pub fn default_gains() -> PsmcGains {
    PsmcGains {
        l1: 40.0,
        l2: 400.0,
        ..PsmcGains::published()
    }
}

pub fn default_smc_gains() -> SmcGains {
    SmcGains {
        c1: 177.4,
        c2: 174.4,
        k_sw: 50.0,
        phi: 0.5,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    /// Disturbance bound used by the gate; taken from the disturbance
    /// profile when absent.
    pub eps: Option<f64>,
    /// Fallback bound when neither `eps` nor a non-zero profile is given.
    pub default_eps: f64,
    /// Observer Lyapunov weight `[q11, q12, q22]`.
    pub q1: [f64; 3],
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            eps: None,
            default_eps: 0.1,
            q1: [1.0, 0.0, 1.0],
        }
    }
}

impl StabilityConfig {
    pub fn q1(&self) -> SymMatrix2 {
        SymMatrix2::new(self.q1[0], self.q1[1], self.q1[2])
    }

    pub fn eps_for(&self, profile: &DisturbanceProfile) -> f64 {
        self.eps.unwrap_or_else(|| match profile.epsilon() {
            e if e > 0.0 => e,
            _ => self.default_eps,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    pub x: f64,
    pub xdot: f64,
    /// Start in force balance at `x` with the holding pressure applied.
    pub equilibrium: bool,
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            x: 0.0,
            xdot: 0.0,
            equilibrium: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File stem for this run's artifacts.
    pub name: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            name: "run".into(),
        }
    }
}

impl OutputConfig {
    /// Configured directory unless the environment override is set.
    pub fn resolved_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.dir.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub duration: f64,
    pub dt: f64,
    pub controller: ControllerKind,
    pub trajectory: Trajectory,
    /// Plant truth.
    pub plant: PmaParams,
    /// Multiplies every plant force, spring and damping coefficient.
    pub plant_coefficient_scale: f64,
    /// Added to the plant mass only; the controller keeps its nominal mass.
    pub load_mass: f64,
    /// Controller and observer model.
    pub nominal: PmaParams,
    pub disturbance: DisturbanceProfile,
    pub gains: PsmcGains,
    pub smc_gains: SmcGains,
    /// Metrics window `[start, end]` in seconds.
    pub window: Option<[f64; 2]>,
    /// Proxy integration steps per control period.
    pub proxy_substeps: usize,
    pub initial: InitialState,
    pub stability: StabilityConfig,
    /// Run even when the gains fail the stability gate.
    pub force: bool,
    pub seed: u64,
    pub output: OutputConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        let params = PmaParams::default();
        Self {
            duration: 20.0,
            dt: 1e-3,
            controller: ControllerKind::IdoPsmc,
            trajectory: Trajectory::default(),
            plant: params,
            plant_coefficient_scale: 1.0,
            load_mass: 0.0,
            nominal: params,
            disturbance: DisturbanceProfile::Zero,
            gains: default_gains(),
            smc_gains: default_smc_gains(),
            window: None,
            proxy_substeps: DEFAULT_PROXY_SUBSTEPS,
            initial: InitialState::default(),
            stability: StabilityConfig::default(),
            force: false,
            seed: 0,
            output: OutputConfig::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Plant truth after coefficient scaling and added load.
    pub fn plant_truth(&self) -> PmaParams {
        self.plant
            .scaled(self.plant_coefficient_scale)
            .with_mass(self.plant.mass + self.load_mass)
    }

    pub fn metrics_window(&self) -> (f64, f64) {
        match self.window {
            Some([a, b]) => (a, b),
            None => (self.duration.min(2.0), self.duration),
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn eps(&self) -> f64 {
        self.stability.eps_for(&self.disturbance)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return cfg(format!("duration {} must be > 0", self.duration));
        }
        if !(self.dt > 0.0 && self.dt <= self.duration) {
            return cfg(format!("dt {} must be in (0, duration]", self.dt));
        }
        let ratio = self.duration / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
            return cfg(format!(
                "duration {} is not a whole number of dt {}",
                self.duration, self.dt
            ));
        }
        let (a, b) = self.metrics_window();
        if !(a >= 0.0 && a <= b && b <= self.duration + 1e-12) {
            return cfg(format!("window [{a}, {b}] not within [0, {}]", self.duration));
        }
        if self.proxy_substeps == 0 {
            return cfg("proxy_substeps must be >= 1".into());
        }
        if !(self.plant_coefficient_scale > 0.0) {
            return cfg("plant_coefficient_scale must be > 0".into());
        }
        if !(self.load_mass >= 0.0) {
            return cfg("load_mass must be >= 0".into());
        }
        let wrap = |e: Error| Error::Config(e.to_string());
        self.plant_truth().validate().map_err(wrap)?;
        self.nominal.validate().map_err(wrap)?;
        self.trajectory.validate()?;
        self.disturbance.validate()?;
        if self.controller.uses_proxy() || self.controller.uses_observer() {
            self.gains.validate().map_err(wrap)?;
        }
        if matches!(self.controller, ControllerKind::Smc | ControllerKind::DoSmc) {
            self.smc_gains.validate().map_err(wrap)?;
        }
        if !self.stability.q1().is_positive_definite() {
            return cfg("stability.q1 must be positive definite".into());
        }
        Ok(())
    }
}
