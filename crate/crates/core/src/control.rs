// SPDX-License-Identifier: Apache-2.0

//! Sliding manifolds, the proxy, and the four tracking controllers:
//! IDO-PSMC, PSMC, DO-SMC and boundary-layer SMC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{all_finite, rk4_step};
use crate::observer::ObserverState;
use crate::plant::{AffineModel, Direction, PmaParams, PressureHistory, DIRECTION_DEADBAND};

/// Desired position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Reference {
    pub xd: f64,
    pub xddot: f64,
    pub xdddot: f64,
}

pub trait ReferenceSignal {
    fn at(&self, t: f64) -> Reference;
}

impl<F: Fn(f64) -> Reference> ReferenceSignal for F {
    fn at(&self, t: f64) -> Reference {
        self(t)
    }
}

/// Measured plant position and velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurement {
    pub x: f64,
    pub xdot: f64,
}

/// Proxy sliding mode gains plus observer gains and proxy mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsmcGains {
    /// Switching gain of the proxy's sliding mode force.
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub l1: f64,
    pub l2: f64,
    pub m_p: f64,
}

impl PsmcGains {
    pub const DIM: usize = 8;
    pub const NAMES: [&'static str; 8] = ["gamma", "c1", "c2", "kp", "ki", "kd", "l1", "l2"];

    /// The published gain set with a proxy mass of 15. Its `l2` is zero,
    /// which leaves the observer marginally stable; callers substitute their
    /// own observer gains.
    pub fn published() -> Self {
        Self {
            gamma: 14218.8,
            c1: 177.4,
            c2: 174.4,
            kp: 2473.5,
            ki: 1916.0,
            kd: 194.2,
            l1: 15952.0,
            l2: 0.0,
            m_p: 15.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("gamma", self.gamma),
            ("c1", self.c1),
            ("c2", self.c2),
            ("kp", self.kp),
            ("ki", self.ki),
            ("kd", self.kd),
            ("l1", self.l1),
            ("l2", self.l2),
            ("m_p", self.m_p),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid("gains", format!("{name} = {v} must be > 0")));
            }
        }
        Ok(())
    }

    /// Search vector `[gamma, c1, c2, kp, ki, kd, l1, l2]`.
    pub fn to_vector(&self) -> [f64; 8] {
        [
            self.gamma, self.c1, self.c2, self.kp, self.ki, self.kd, self.l1, self.l2,
        ]
    }

    pub fn from_vector(s: &[f64], m_p: f64) -> Self {
        assert_eq!(s.len(), Self::DIM, "gain vector must have 8 components");
        Self {
            gamma: s[0],
            c1: s[1],
            c2: s[2],
            kp: s[3],
            ki: s[4],
            kd: s[5],
            l1: s[6],
            l2: s[7],
            m_p,
        }
    }
}

/// Gains of the boundary-layer SMC baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmcGains {
    pub c1: f64,
    pub c2: f64,
    pub k_sw: f64,
    /// Boundary-layer width.
    pub phi: f64,
}

impl SmcGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0) {
            return Err(Error::invalid("phi", format!("{} must be > 0", self.phi)));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0 && self.k_sw >= 0.0) {
            return Err(Error::invalid("smc gains", "c1, c2 and k_sw must be non-negative"));
        }
        Ok(())
    }
}

/// Proxy position/velocity and the three running integrals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProxyState {
    pub xp: f64,
    pub xpdot: f64,
    /// Coupling error integral, `int (x_p - x) dt`.
    pub ep: f64,
    /// `int (x_d - x) dt`.
    pub int_exd: f64,
    /// `int (x_d - x_p) dt`.
    pub int_exp: f64,
}

impl ProxyState {
    /// Proxy placed on the reference with all integrals cleared.
    pub fn on_reference(r: &Reference) -> Self {
        Self {
            xp: r.xd,
            xpdot: r.xddot,
            ..Self::default()
        }
    }

    /// Coupling error vector `[e_p, e_p', e_p'']`.
    pub fn coupling_error(&self, meas: &Measurement) -> [f64; 3] {
        [self.ep, self.xp - meas.x, self.xpdot - meas.xdot]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// Clamped pressure command (Pa).
    pub u: f64,
    /// Command before clamping.
    pub u_raw: f64,
    pub sq: f64,
    /// Proxy manifold, absent for the SMC family.
    pub sp: Option<f64>,
    pub saturated: bool,
}

/// Controller-side nominal model: identified parameters plus the
/// controller's own record of its previous command.
#[derive(Debug, Clone, Copy)]
pub struct NominalPlant<'a> {
    pub params: &'a PmaParams,
    pub history: PressureHistory,
}

impl NominalPlant<'_> {
    pub fn model(&self, meas: &Measurement) -> AffineModel {
        AffineModel::at(
            self.params,
            meas.x,
            meas.xdot,
            self.history.p_prev,
            self.history.direction,
        )
    }

    /// Smallest admissible `|b(x, xdot)|`.
    pub fn b_floor(&self) -> f64 {
        1e-6 * (self.params.f1 / self.params.mass).abs()
    }
}

pub fn signum(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Boundary-layer saturation.
pub fn sat(z: f64) -> f64 {
    if z.abs() <= 1.0 {
        z
    } else {
        signum(z)
    }
}

pub fn manifold_q(r: &Reference, x: f64, xdot: f64, int_exd: f64, c1: f64, c2: f64) -> f64 {
    (r.xddot - xdot) + c1 * (r.xd - x) + c2 * int_exd
}

pub fn manifold_p(r: &Reference, proxy: &ProxyState, c1: f64, c2: f64) -> f64 {
    manifold_q(r, proxy.xp, proxy.xpdot, proxy.int_exp, c1, c2)
}

/// Virtual coupling force `K_p e_p' + K_i e_p + K_d e_p''`.
fn coupling(g: &PsmcGains, meas: &Measurement, proxy: &ProxyState) -> f64 {
    g.kp * (proxy.xp - meas.x) + g.ki * proxy.ep + g.kd * (proxy.xpdot - meas.xdot)
}

/// Resolve the command for desired acceleration `v`.
///
/// The damping branch follows the direction of the command being computed
/// and the spring branch its level. Each branch combination is inverted,
/// and together with the held pressure and a deadband step either side,
/// every candidate is scored by the acceleration the nominal model predicts
/// on the branches that candidate itself selects. The closest wins; ties go
/// to the branches implied by the previous command. Where the direction
/// split leaves no consistent inversion this dithers between the two
/// damping branches instead of committing to one.
fn finish(nominal: &NominalPlant, meas: &Measurement, v: f64, sq: f64, sp: Option<f64>) -> Result<ControlOutput> {
    let p = nominal.params;
    let floor = nominal.b_floor();
    let hist = nominal.history;
    let preferred = nominal.model(meas);
    if !(preferred.b.abs() >= floor) {
        return Err(Error::SingularGain {
            x: meas.x,
            xdot: meas.xdot,
            b: preferred.b,
            floor,
        });
    }
    let low = hist.p_prev <= p.p_break;
    let other = match hist.direction {
        Direction::Inflating => Direction::Deflating,
        Direction::Deflating => Direction::Inflating,
    };
    let model_on = |direction: Direction, low_spring: bool| {
        let branch_pressure = if low_spring { p.p_min } else { p.p_max };
        AffineModel::at(p, meas.x, meas.xdot, branch_pressure, direction)
    };
    let step = 2.0 * DIRECTION_DEADBAND;
    let mut raw = Vec::with_capacity(7);
    for (direction, low_spring) in [
        (hist.direction, low),
        (other, low),
        (hist.direction, !low),
        (other, !low),
    ] {
        let m = model_on(direction, low_spring);
        if m.b.abs() >= floor {
            raw.push((v - m.f) / m.b);
        }
    }
    raw.extend([hist.p_prev, hist.p_prev + step, hist.p_prev - step]);
    let mut best: Option<(f64, f64)> = None;
    for u_raw in raw {
        let u = p.clamp_pressure(u_raw);
        let miss = (model_on(hist.direction_for(u), u <= p.p_break).accel(u) - v).abs();
        if best.is_none_or(|(m, _)| miss < m) {
            best = Some((miss, u_raw));
        }
    }
    let (_, u_raw) = best.expect("held pressure is always a candidate");
    Ok(ControlOutput {
        u: p.clamp_pressure(u_raw),
        u_raw,
        sq,
        sp,
        saturated: !(u_raw >= p.p_min && u_raw <= p.p_max),
    })
}

/// Observer-compensated proxy sliding mode law.
pub fn ido_psmc(
    gains: &PsmcGains,
    nominal: &NominalPlant,
    r: &Reference,
    meas: &Measurement,
    proxy: &ProxyState,
    obs: &ObserverState,
) -> Result<ControlOutput> {
    psmc_law(gains, nominal, r, meas, proxy, obs.tau_hat + obs.taudot_hat)
}

/// Proxy sliding mode law without disturbance compensation.
pub fn psmc(
    gains: &PsmcGains,
    nominal: &NominalPlant,
    r: &Reference,
    meas: &Measurement,
    proxy: &ProxyState,
) -> Result<ControlOutput> {
    psmc_law(gains, nominal, r, meas, proxy, 0.0)
}

fn psmc_law(
    g: &PsmcGains,
    nominal: &NominalPlant,
    r: &Reference,
    meas: &Measurement,
    proxy: &ProxyState,
    compensation: f64,
) -> Result<ControlOutput> {
    let v = r.xdddot + g.c1 * (r.xddot - meas.xdot) + g.c2 * (r.xd - meas.x) + coupling(g, meas, proxy) - compensation;
    let sq = manifold_q(r, meas.x, meas.xdot, proxy.int_exd, g.c1, g.c2);
    let sp = manifold_p(r, proxy, g.c1, g.c2);
    finish(nominal, meas, v, sq, Some(sp))
}

/// Boundary-layer sliding mode law.
pub fn smc(
    gains: &SmcGains,
    nominal: &NominalPlant,
    r: &Reference,
    meas: &Measurement,
    int_exd: f64,
) -> Result<ControlOutput> {
    smc_law(gains, nominal, r, meas, int_exd, 0.0)
}

/// Boundary-layer sliding mode law with observer compensation.
pub fn do_smc(
    gains: &SmcGains,
    nominal: &NominalPlant,
    r: &Reference,
    meas: &Measurement,
    int_exd: f64,
    obs: &ObserverState,
) -> Result<ControlOutput> {
    smc_law(gains, nominal, r, meas, int_exd, obs.tau_hat + obs.taudot_hat)
}

fn smc_law(
    g: &SmcGains,
    nominal: &NominalPlant,
    r: &Reference,
    meas: &Measurement,
    int_exd: f64,
    compensation: f64,
) -> Result<ControlOutput> {
    let sq = manifold_q(r, meas.x, meas.xdot, int_exd, g.c1, g.c2);
    let v = r.xdddot + g.c1 * (r.xddot - meas.xdot) + g.c2 * (r.xd - meas.x) + g.k_sw * sat(sq / g.phi) - compensation;
    finish(nominal, meas, v, sq, None)
}

/// Proxy acceleration: sliding mode force and virtual coupling scaled by
/// the proxy mass, plus the reference feed-forward.
pub fn proxy_acceleration(g: &PsmcGains, r: &Reference, meas: &Measurement, proxy: &ProxyState) -> f64 {
    let switching = signum(manifold_p(r, proxy, g.c1, g.c2));
    proxy_acceleration_with(g, r, meas, proxy, switching)
}

fn proxy_acceleration_with(
    g: &PsmcGains,
    r: &Reference,
    meas: &Measurement,
    proxy: &ProxyState,
    switching: f64,
) -> f64 {
    (g.gamma * switching - coupling(g, meas, proxy)) / g.m_p
        + r.xdddot
        + g.c1 * (r.xddot - proxy.xpdot)
        + g.c2 * (r.xd - proxy.xp)
}

/// Advance the proxy and all integrals over `[t, t + dt]` with the plant
/// measurement and `sgn(S_p)` held at their values at `t`.
///
/// Re-evaluating the signum inside the Runge-Kutta stages lets the stage
/// slopes cancel exactly once `|S_p| < Gamma dt / m_p`, which freezes `S_p`
/// away from zero.
pub fn proxy_step<R: ReferenceSignal + ?Sized>(
    gains: &PsmcGains,
    reference: &R,
    t: f64,
    meas: &Measurement,
    proxy: &ProxyState,
    dt: f64,
) -> Result<ProxyState> {
    if !(gains.m_p > 0.0) {
        return Err(Error::invalid("m_p", format!("{} must be > 0", gains.m_p)));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("{dt} must be > 0")));
    }
    let switching = signum(manifold_p(&reference.at(t), proxy, gains.c1, gains.c2));
    let y0 = [proxy.xp, proxy.xpdot, proxy.ep, proxy.int_exd, proxy.int_exp];
    let y = rk4_step(t, &y0, dt, |tau, y| {
        let r = reference.at(tau);
        let p = ProxyState {
            xp: y[0],
            xpdot: y[1],
            ep: y[2],
            int_exd: y[3],
            int_exp: y[4],
        };
        [
            p.xpdot,
            proxy_acceleration_with(gains, &r, meas, &p, switching),
            p.xp - meas.x,
            r.xd - meas.x,
            r.xd - p.xp,
        ]
    });
    if !all_finite(&y) {
        return Err(Error::ProxyDiverged);
    }
    Ok(ProxyState {
        xp: y[0],
        xpdot: y[1],
        ep: y[2],
        int_exd: y[3],
        int_exp: y[4],
    })
}

/// Advance only `int (x_d - x) dt` (the SMC family has no proxy).
pub fn tracking_integral_step<R: ReferenceSignal + ?Sized>(
    reference: &R,
    t: f64,
    x: f64,
    int_exd: f64,
    dt: f64,
) -> f64 {
    rk4_step(t, &[int_exd], dt, |tau, _| [reference.at(tau).xd - x])[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal(params: &PmaParams) -> NominalPlant<'_> {
        NominalPlant {
            params,
            history: PressureHistory {
                p_prev: 0.0,
                direction: Direction::Inflating,
            },
        }
    }

    #[test]
    fn manifold_q_examples() {
        let r = Reference {
            xd: 0.01,
            xddot: 0.1,
            xdddot: 0.0,
        };
        assert_eq!(manifold_q(&r, 0.01, 0.1, 0.0, 177.4, 174.4), 0.0);
        let r = Reference {
            xd: 0.01,
            xddot: 0.1,
            xdddot: 0.0,
        };
        let s = manifold_q(&r, 0.0, 0.0, 0.001, 177.4, 174.4);
        assert!((s - 2.0484).abs() < 1e-12, "{s}");
        assert_eq!(manifold_q(&r, 0.0, 0.0, 0.001, 0.0, 0.0), 0.1);
    }

    #[test]
    fn manifold_p_examples() {
        let r = Reference {
            xd: 0.015,
            xddot: 0.0,
            xdddot: 0.0,
        };
        assert_eq!(manifold_p(&r, &ProxyState::on_reference(&r), 177.4, 174.4), 0.0);
        let s = manifold_p(&r, &ProxyState::default(), 177.4, 174.4);
        assert!((s - 2.661).abs() < 1e-12);
    }

    #[test]
    fn ido_psmc_at_origin() {
        let params = PmaParams::identified(1.0);
        let g = PsmcGains::published();
        let r = Reference::default();
        let meas = Measurement::default();
        let out = ido_psmc(
            &g,
            &nominal(&params),
            &r,
            &meas,
            &ProxyState::on_reference(&r),
            &ObserverState {
                p1: 0.0,
                p2: 0.0,
                tau_hat: 0.0,
                taudot_hat: 0.0,
            },
        )
        .unwrap();
        assert!((out.u_raw - 212.13 / 0.00721).abs() < 1e-6);
        assert!((out.u_raw - 29421.6).abs() < 0.1);
        assert!(!out.saturated);
    }

    #[test]
    fn command_above_limit_saturates() {
        let params = PmaParams::identified_exchanged_spring(50.0);
        let g = PsmcGains::published();
        let r = Reference {
            xd: 0.05,
            xddot: 0.0,
            xdddot: 0.0,
        };
        let meas = Measurement::default();
        let out = psmc(&g, &nominal(&params), &r, &meas, &ProxyState::on_reference(&r)).unwrap();
        assert!(out.u_raw > params.p_max);
        assert_eq!(out.u, params.p_max);
        assert!(out.saturated);
    }

    #[test]
    fn singular_gain_is_an_error() {
        let params = PmaParams::identified(1.0);
        // b = (f1 - b1i xdot) / m vanishes at xdot = f1 / b1i.
        let meas = Measurement {
            x: 0.0,
            xdot: params.f1 / params.b1i,
        };
        let r = Reference::default();
        let g = PsmcGains::published();
        let err = psmc(&g, &nominal(&params), &r, &meas, &ProxyState::on_reference(&r)).unwrap_err();
        assert!(matches!(err, Error::SingularGain { .. }));
        let sg = SmcGains {
            c1: 1.0,
            c2: 1.0,
            k_sw: 1.0,
            phi: 1.0,
        };
        assert!(smc(&sg, &nominal(&params), &r, &meas, 0.0).is_err());
    }

    #[test]
    fn smc_boundary_layer() {
        let params = PmaParams::identified(1.0);
        let nom = nominal(&params);
        let meas = Measurement::default();
        let model = nom.model(&meas);
        let base = -model.f / model.b;
        let g = SmcGains {
            c1: 0.0,
            c2: 0.0,
            k_sw: 10.0,
            phi: 0.5,
        };
        let at = |xddot: f64| {
            let r = Reference {
                xd: 0.0,
                xddot,
                xdddot: 0.0,
            };
            smc(&g, &nom, &r, &meas, 0.0).unwrap().u_raw
        };
        assert!((at(0.0) - base).abs() < 1e-9);
        assert!(((at(0.25) - base) * model.b - 5.0).abs() < 1e-9);
        assert!(((at(5.0) - base) * model.b - 10.0).abs() < 1e-9);
    }

    #[test]
    fn sgn_and_sat() {
        assert_eq!(signum(0.0), 0.0);
        assert_eq!(signum(-2.0), -1.0);
        assert_eq!(sat(0.3), 0.3);
        assert_eq!(sat(-7.0), -1.0);
    }

    #[test]
    fn proxy_at_consensus_follows_reference_acceleration() {
        let g = PsmcGains::published();
        let r = Reference {
            xd: 0.01,
            xddot: 0.02,
            xdddot: 0.3,
        };
        let proxy = ProxyState::on_reference(&r);
        let meas = Measurement { x: r.xd, xdot: r.xddot };
        assert_eq!(proxy_acceleration(&g, &r, &meas, &proxy), r.xdddot);
    }

    #[test]
    fn gain_vector_roundtrip() {
        let g = PsmcGains::published();
        assert_eq!(PsmcGains::from_vector(&g.to_vector(), g.m_p), g);
    }
}
