// SPDX-License-Identifier: Apache-2.0

//! Lumped disturbance injected into the plant, in acceleration units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sinusoid {
    /// Amplitude (m/s^2).
    pub amplitude: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Sinusoid {
    fn derivative(&self, t: f64, order: u32) -> f64 {
        let arg = self.omega * t + self.phase;
        let scale = self.amplitude * self.omega.powi(order as i32);
        match order % 4 {
            0 => scale * arg.sin(),
            1 => scale * arg.cos(),
            2 => -scale * arg.sin(),
            _ => -scale * arg.cos(),
        }
    }

    fn bound(&self, order: u32) -> f64 {
        self.amplitude.abs() * self.omega.abs().powi(order as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DisturbanceProfile {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    Sinusoid(Sinusoid),
    SumOfSinusoids {
        components: Vec<Sinusoid>,
    },
}

impl DisturbanceProfile {
    pub fn sine(amplitude: f64, omega: f64) -> Self {
        Self::Sinusoid(Sinusoid {
            amplitude,
            omega,
            phase: 0.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |s: &Sinusoid| [s.amplitude, s.omega, s.phase].iter().all(|v| v.is_finite());
        let valid = match self {
            Self::Zero => true,
            Self::Constant { value } => value.is_finite(),
            Self::Sinusoid(s) => ok(s),
            Self::SumOfSinusoids { components } => components.iter().all(ok),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Config("disturbance parameters must be finite".into()))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// `order`-th time derivative.
    pub fn derivative(&self, t: f64, order: u32) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant { value } => {
                if order == 0 {
                    *value
                } else {
                    0.0
                }
            }
            Self::Sinusoid(s) => s.derivative(t, order),
            Self::SumOfSinusoids { components } => components.iter().map(|s| s.derivative(t, order)).sum(),
        }
    }

    /// Bound on `|d^i tau / dt^i|` for `i = 0, 1, 2`, from amplitudes and
    /// frequency powers.
    pub fn epsilon(&self) -> f64 {
        let per_order = |order: u32| match self {
            Self::Zero => 0.0,
            Self::Constant { value } => {
                if order == 0 {
                    value.abs()
                } else {
                    0.0
                }
            }
            Self::Sinusoid(s) => s.bound(order),
            Self::SumOfSinusoids { components } => components.iter().map(|s| s.bound(order)).sum(),
        };
        (0..=2).map(per_order).fold(0.0, f64::max)
    }
}
