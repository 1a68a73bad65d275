// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::control::{Reference, ReferenceSignal};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Trajectory {
    /// `A sin(2 pi f t) + B`.
    FixedSine {
        amplitude: f64,
        offset: f64,
        frequency: f64,
    },
    /// Sine whose instantaneous frequency ramps linearly from `f_start` to
    /// `f_end` over `span` seconds.
    LinearChirp {
        amplitude: f64,
        offset: f64,
        f_start: f64,
        f_end: f64,
        span: f64,
    },
}

impl Default for Trajectory {
    fn default() -> Self {
        Self::fixed_sine()
    }
}

impl Trajectory {
    /// 15 mm about a 15 mm offset at 0.25 Hz.
    pub fn fixed_sine() -> Self {
        Self::FixedSine {
            amplitude: 0.015,
            offset: 0.015,
            frequency: 0.25,
        }
    }

    /// Same amplitude and offset, 0.1 to 0.5 Hz over 20 s.
    pub fn chirp() -> Self {
        Self::LinearChirp {
            amplitude: 0.015,
            offset: 0.015,
            f_start: 0.1,
            f_end: 0.5,
            span: 20.0,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Self::FixedSine { amplitude, .. } | Self::LinearChirp { amplitude, .. } => amplitude,
        }
    }

    pub fn offset(&self) -> f64 {
        match *self {
            Self::FixedSine { offset, .. } | Self::LinearChirp { offset, .. } => offset,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.amplitude(), self.offset());
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::Config(format!("trajectory amplitude {a} must be >= 0")));
        }
        if !(b - a >= 0.0) {
            return Err(Error::Config(format!(
                "trajectory offset {b} below amplitude {a}: contraction would go negative"
            )));
        }
        match *self {
            Self::FixedSine { frequency, .. } if !frequency.is_finite() => {
                Err(Error::Config("trajectory frequency must be finite".into()))
            }
            Self::LinearChirp {
                span, f_start, f_end, ..
            } if !(span > 0.0 && f_start.is_finite() && f_end.is_finite()) => {
                Err(Error::Config(format!("chirp span {span} must be > 0")))
            }
            _ => Ok(()),
        }
    }

    /// Phase, its rate and its second derivative.
    fn phase(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            Self::FixedSine { frequency, .. } => (TAU * frequency * t, TAU * frequency, 0.0),
            Self::LinearChirp {
                f_start, f_end, span, ..
            } => {
                let sweep = (f_end - f_start) / span;
                (
                    TAU * (f_start * t + 0.5 * sweep * t * t),
                    TAU * (f_start + sweep * t),
                    TAU * sweep,
                )
            }
        }
    }

    /// Instantaneous frequency (Hz).
    pub fn frequency_at(&self, t: f64) -> f64 {
        self.phase(t).1 / TAU
    }

    pub fn reference_at(&self, t: f64) -> Reference {
        let a = self.amplitude();
        let (phi, w, wdot) = self.phase(t);
        let (s, c) = phi.sin_cos();
        Reference {
            xd: a * s + self.offset(),
            xddot: a * w * c,
            xdddot: a * (wdot * c - w * w * s),
        }
    }
}

impl ReferenceSignal for Trajectory {
    fn at(&self, t: f64) -> Reference {
        self.reference_at(t)
    }
}
