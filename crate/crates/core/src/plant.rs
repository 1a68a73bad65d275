// SPDX-License-Identifier: Apache-2.0

//! Three-element pneumatic muscle model.
//!
//! The actuator is a parallel spring, damper and contractile element whose
//! coefficients are affine in the bladder pressure:
//!
//! ```text
//! m x'' + b(P) x' + k(P) x = f(P) - m g
//! ```
//!
//! Damping switches between an inflation and a deflation branch, the spring
//! between a low- and high-pressure branch split at `p_break`.

use serde::{Deserialize, Serialize};

use crate::disturbance::DisturbanceProfile;
use crate::error::{Error, Result};
use crate::integrate::{all_finite, rk4_step};

pub const GRAVITY: f64 = 9.81;

/// Pressure changes smaller than this keep the previous aeration direction.
pub const DIRECTION_DEADBAND: f64 = 1.0;

/// Upper bound on `h * rho` for an RK4 sub-step, with `rho` the spectral
/// radius estimate of the frozen-pressure linear dynamics.
pub const MAX_STIFF_RATIO: f64 = 0.5;

/// Identified model coefficients plus load mass and pressure limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PmaParams {
    /// Force offset (N).
    pub f0: f64,
    /// Force gain (N/Pa).
    pub f1: f64,
    /// Low-pressure spring offset (N/m) and gain (N/(m Pa)).
    pub k01: f64,
    pub k02: f64,
    /// High-pressure spring offset (N/m) and gain (N/(m Pa)).
    pub k11: f64,
    pub k12: f64,
    /// Inflation damping offset (N s/m) and gain (N s/(m Pa)).
    pub b0i: f64,
    pub b1i: f64,
    /// Deflation damping offset and gain.
    pub b0d: f64,
    pub b1d: f64,
    /// Load mass (kg).
    pub mass: f64,
    /// Spring breakpoint pressure (Pa).
    pub p_break: f64,
    pub p_min: f64,
    pub p_max: f64,
}

/// Default load mass (kg). Keeps the damping pole `b/m` below the 1 kHz
/// control rate over the operating pressure range.
pub const DEFAULT_MASS: f64 = 50.0;

/// [`PmaParams::identified_exchanged_spring`] at [`DEFAULT_MASS`]. Partial
/// parameter tables in configuration files are completed from this.
impl Default for PmaParams {
    fn default() -> Self {
        Self::identified_exchanged_spring(DEFAULT_MASS)
    }
}

impl PmaParams {
    /// The published identification, printed values used verbatim.
    pub fn identified(mass: f64) -> Self {
        Self {
            f0: -202.32,
            f1: 0.00721,
            k01: 18063.0,
            k02: 0.01051,
            k11: -0.2132,
            k12: 90638.0,
            b0i: 6435.31,
            b1i: 0.10023,
            b0d: 2522.01,
            b1d: 0.00321,
            mass,
            p_break: 325_420.0,
            p_min: 0.0,
            p_max: 6.0e5,
        }
    }

    /// The published identification with the two high-branch spring values
    /// exchanged (`k11 = 90638 N/m`, `k12 = -0.2132 N/(m Pa)`). The spring is
    /// then continuous to within about 1 % at `p_break`, where the printed
    /// values jump by six orders of magnitude.
    pub fn identified_exchanged_spring(mass: f64) -> Self {
        Self {
            k11: 90638.0,
            k12: -0.2132,
            ..Self::identified(mass)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let coeffs = [
            self.f0, self.f1, self.k01, self.k02, self.k11, self.k12, self.b0i, self.b1i, self.b0d, self.b1d,
        ];
        if !all_finite(&coeffs) {
            return Err(Error::invalid("coefficients", "all must be finite"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("mass", format!("{} is not > 0", self.mass)));
        }
        if !(self.p_min >= 0.0 && self.p_max > self.p_min && self.p_max.is_finite()) {
            return Err(Error::invalid(
                "p_min/p_max",
                format!("need 0 <= p_min < p_max, got [{}, {}]", self.p_min, self.p_max),
            ));
        }
        if !(self.p_break > self.p_min && self.p_break < self.p_max) {
            return Err(Error::invalid(
                "p_break",
                format!("{} not strictly inside [{}, {}]", self.p_break, self.p_min, self.p_max),
            ));
        }
        Ok(())
    }

    /// Every force, spring and damping coefficient multiplied by `factor`;
    /// mass, breakpoint and limits are untouched.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            f0: self.f0 * factor,
            f1: self.f1 * factor,
            k01: self.k01 * factor,
            k02: self.k02 * factor,
            k11: self.k11 * factor,
            k12: self.k12 * factor,
            b0i: self.b0i * factor,
            b1i: self.b1i * factor,
            b0d: self.b0d * factor,
            b1d: self.b1d * factor,
            ..*self
        }
    }

    pub fn with_mass(&self, mass: f64) -> Self {
        Self { mass, ..*self }
    }

    pub fn clamp_pressure(&self, pressure: f64) -> f64 {
        pressure.clamp(self.p_min, self.p_max)
    }

    /// Damping (offset, gain) for the given aeration direction.
    pub fn damping_branch(&self, direction: Direction) -> (f64, f64) {
        match direction {
            Direction::Inflating => (self.b0i, self.b1i),
            Direction::Deflating => (self.b0d, self.b1d),
        }
    }

    /// Spring (offset, gain); the breakpoint itself belongs to the low branch.
    pub fn spring_branch(&self, pressure: f64) -> (f64, f64) {
        if pressure <= self.p_break {
            (self.k01, self.k02)
        } else {
            (self.k11, self.k12)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Inflating,
    Deflating,
}

/// Last applied pressure and the aeration direction it implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureHistory {
    pub p_prev: f64,
    pub direction: Direction,
}

impl Default for PressureHistory {
    fn default() -> Self {
        Self {
            p_prev: 0.0,
            direction: Direction::Inflating,
        }
    }
}

impl PressureHistory {
    /// Direction a new applied pressure would imply. Changes inside the
    /// deadband keep the previous direction.
    pub fn direction_for(&self, pressure: f64) -> Direction {
        let delta = pressure - self.p_prev;
        if delta > DIRECTION_DEADBAND {
            Direction::Inflating
        } else if delta < -DIRECTION_DEADBAND {
            Direction::Deflating
        } else {
            self.direction
        }
    }

    pub fn advance(&self, pressure: f64) -> Self {
        Self {
            p_prev: pressure,
            direction: self.direction_for(pressure),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    /// Damping (N s/m).
    pub b: f64,
    /// Spring (N/m).
    pub k: f64,
    /// Contractile force (N).
    pub f: f64,
}

pub fn coefficients(params: &PmaParams, pressure: f64, direction: Direction) -> Result<Coefficients> {
    if !(pressure >= params.p_min && pressure <= params.p_max) {
        return Err(Error::PressureOutOfRange {
            pressure,
            min: params.p_min,
            max: params.p_max,
        });
    }
    Ok(coefficients_unchecked(params, pressure, direction))
}

fn coefficients_unchecked(params: &PmaParams, pressure: f64, direction: Direction) -> Coefficients {
    let (b0, b1) = params.damping_branch(direction);
    let (k0, k1) = params.spring_branch(pressure);
    Coefficients {
        b: b0 + b1 * pressure,
        k: k0 + k1 * pressure,
        f: params.f0 + params.f1 * pressure,
    }
}

/// Control-affine form `x'' = f(x, xdot) + b(x, xdot) u + tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineModel {
    pub f: f64,
    pub b: f64,
}

impl AffineModel {
    /// Branches are picked from `branch_pressure` (spring) and `direction`
    /// (damping); the pressure itself is the free input.
    pub fn at(params: &PmaParams, x: f64, xdot: f64, branch_pressure: f64, direction: Direction) -> Self {
        let (b0, b1) = params.damping_branch(direction);
        let (k0, k1) = params.spring_branch(branch_pressure);
        let m = params.mass;
        Self {
            f: (params.f0 - m * GRAVITY - b0 * xdot - k0 * x) / m,
            b: (params.f1 - b1 * xdot - k1 * x) / m,
        }
    }

    pub fn accel(&self, u: f64) -> f64 {
        self.f + self.b * u
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    /// Contraction (m).
    pub x: f64,
    /// Contraction velocity (m/s).
    pub xdot: f64,
    pub t: f64,
    pub pressure: PressureHistory,
}

impl PlantState {
    pub fn at_rest(x: f64) -> Self {
        Self {
            x,
            xdot: 0.0,
            t: 0.0,
            pressure: PressureHistory::default(),
        }
    }
}

pub fn acceleration(
    params: &PmaParams,
    state: &PlantState,
    pressure: f64,
    direction: Direction,
    disturbance: f64,
) -> Result<f64> {
    let c = coefficients(params, pressure, direction)?;
    Ok(accel_from(params.mass, &c, state.x, state.xdot, disturbance))
}

fn accel_from(mass: f64, c: &Coefficients, x: f64, xdot: f64, disturbance: f64) -> f64 {
    (c.f - mass * GRAVITY - c.b * xdot - c.k * x) / mass + disturbance
}

/// Number of RK4 sub-steps needed to keep `h * rho <= MAX_STIFF_RATIO`.
pub fn substeps(params: &PmaParams, c: &Coefficients, dt: f64) -> usize {
    let rho = c.b.abs() / params.mass + (c.k.abs() / params.mass).sqrt();
    ((dt * rho / MAX_STIFF_RATIO).ceil() as usize).max(1)
}

/// Advance the plant by `dt` with the clamped pressure held constant.
///
/// The step is split into equal RK4 sub-steps when the frozen-pressure
/// dynamics are too stiff for a single stage at `dt`.
pub fn step(
    params: &PmaParams,
    state: &PlantState,
    pressure_command: f64,
    disturbance: &DisturbanceProfile,
    dt: f64,
) -> Result<PlantState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("{dt} is not > 0")));
    }
    if !pressure_command.is_finite() {
        return Err(Error::invalid("pressure_command", "must be finite"));
    }
    let pressure = params.clamp_pressure(pressure_command);
    let history = state.pressure.advance(pressure);
    let c = coefficients_unchecked(params, pressure, history.direction);
    let n = substeps(params, &c, dt);
    let h = dt / n as f64;
    let mass = params.mass;

    let mut y = [state.x, state.xdot];
    for i in 0..n {
        let t0 = state.t + i as f64 * h;
        y = rk4_step(t0, &y, h, |t, y| {
            [y[1], accel_from(mass, &c, y[0], y[1], disturbance.eval(t))]
        });
    }
    let t = state.t + dt;
    if !all_finite(&y) {
        return Err(Error::IntegrationDiverged { t });
    }
    Ok(PlantState {
        x: y[0],
        xdot: y[1],
        t,
        pressure: history,
    })
}

/// Pressure at which a motionless plant at `x` is in force balance.
pub fn equilibrium_pressure(params: &PmaParams, x: f64) -> Result<f64> {
    // Solve on the low branch first, then the high one.
    for (k0, k1) in [(params.k01, params.k02), (params.k11, params.k12)] {
        let denom = params.f1 - k1 * x;
        if denom.abs() < f64::EPSILON {
            continue;
        }
        let p = (params.mass * GRAVITY - params.f0 + k0 * x) / denom;
        if p >= params.p_min && p <= params.p_max && params.spring_branch(p) == (k0, k1) {
            return Ok(p);
        }
    }
    Err(Error::Domain(format!(
        "no admissible equilibrium pressure holds x = {x}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identified() -> PmaParams {
        PmaParams::identified(1.0)
    }

    #[test]
    fn coefficients_at_zero_pressure_are_offsets() {
        let c = coefficients(&identified(), 0.0, Direction::Inflating).unwrap();
        assert_eq!(c.b, 6435.31);
        assert_eq!(c.k, 18063.0);
        assert_eq!(c.f, -202.32);
    }

    #[test]
    fn coefficients_at_one_bar_inflating() {
        let c = coefficients(&identified(), 1.0e5, Direction::Inflating).unwrap();
        assert!((c.b - 16458.31).abs() < 1e-9);
        assert!((c.k - 19114.0).abs() < 1e-9);
        assert!((c.f - 518.68).abs() < 1e-9);
    }

    #[test]
    fn zero_gains_return_offsets() {
        let p = PmaParams {
            b1i: 0.0,
            k02: 0.0,
            f1: 0.0,
            ..identified()
        };
        let c = coefficients(&p, 2.0e5, Direction::Inflating).unwrap();
        assert_eq!((c.b, c.k, c.f), (p.b0i, p.k01, p.f0));
    }

    #[test]
    fn breakpoint_belongs_to_low_branch() {
        let p = identified();
        let at = coefficients(&p, p.p_break, Direction::Deflating).unwrap();
        let above = coefficients(&p, p.p_break + 1.0, Direction::Deflating).unwrap();
        assert_eq!(at.k, p.k01 + p.k02 * p.p_break);
        assert_eq!(above.k, p.k11 + p.k12 * (p.p_break + 1.0));
        assert_eq!(at.b, p.b0d + p.b1d * p.p_break);
    }

    #[test]
    fn pressure_outside_limits_is_rejected() {
        let p = identified();
        assert!(matches!(
            coefficients(&p, -1.0, Direction::Inflating),
            Err(Error::PressureOutOfRange { .. })
        ));
        assert!(coefficients(&p, p.p_max + 1.0, Direction::Inflating).is_err());
    }

    #[test]
    fn acceleration_at_origin() {
        let s = PlantState::at_rest(0.0);
        let a = acceleration(&identified(), &s, 0.0, Direction::Inflating, 0.0).unwrap();
        assert!((a - (-212.13)).abs() < 1e-9);
        let a = acceleration(&identified(), &s, 0.0, Direction::Inflating, 5.0).unwrap();
        assert!((a - (-207.13)).abs() < 1e-9);
    }

    #[test]
    fn force_balance_gives_zero_acceleration() {
        let p = identified();
        let pressure = equilibrium_pressure(&p, 0.0).unwrap();
        let a = acceleration(&p, &PlantState::at_rest(0.0), pressure, Direction::Inflating, 0.0).unwrap();
        assert!(a.abs() < 1e-10, "{a}");
    }

    #[test]
    fn validation_rejects_bad_limits() {
        assert!(identified().validate().is_ok());
        assert!(identified().with_mass(0.0).validate().is_err());
        let p = PmaParams {
            p_break: 7.0e5,
            ..identified()
        };
        assert!(p.validate().is_err());
        let p = PmaParams {
            p_min: 1.0,
            p_max: 1.0,
            ..identified()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn direction_deadband_keeps_previous() {
        let h = PressureHistory {
            p_prev: 1000.0,
            direction: Direction::Deflating,
        };
        assert_eq!(h.direction_for(1000.5), Direction::Deflating);
        assert_eq!(h.direction_for(1001.5), Direction::Inflating);
        assert_eq!(h.direction_for(998.0), Direction::Deflating);
    }

    #[test]
    fn saturated_command_matches_p_max() {
        let p = identified();
        let s = PlantState::at_rest(0.0);
        let d = DisturbanceProfile::Zero;
        let a = step(&p, &s, 1.0e7, &d, 1e-3).unwrap();
        let b = step(&p, &s, p.p_max, &d, 1e-3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equilibrium_is_preserved() {
        let p = identified();
        let pressure = equilibrium_pressure(&p, 0.01).unwrap();
        let mut s = PlantState::at_rest(0.01);
        s.pressure.p_prev = pressure;
        let next = step(&p, &s, pressure, &DisturbanceProfile::Zero, 1e-3).unwrap();
        assert!((next.x - 0.01).abs() < 1e-15);
        assert!(next.xdot.abs() < 1e-12);
        assert_eq!(next.t, 1e-3);
    }

    #[test]
    fn non_positive_dt_rejected() {
        let p = identified();
        let s = PlantState::at_rest(0.0);
        assert!(step(&p, &s, 0.0, &DisturbanceProfile::Zero, 0.0).is_err());
        assert!(step(&p, &s, f64::NAN, &DisturbanceProfile::Zero, 1e-3).is_err());
    }

    #[test]
    fn stiff_branch_uses_substeps() {
        let p = identified();
        let c = coefficients(&p, p.p_max, Direction::Inflating).unwrap();
        assert!(substeps(&p, &c, 1e-3) > 100);
        let heavy = p.with_mass(1.0e4);
        let c = coefficients(&heavy, 0.0, Direction::Deflating).unwrap();
        assert_eq!(substeps(&heavy, &c, 1e-3), 1);
    }
}
