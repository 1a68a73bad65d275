// SPDX-License-Identifier: Apache-2.0

//! Closed-loop simulation of one scenario.

use std::fmt;

use super::metrics::{metrics, MetricsReport};
use super::scenario::{ControllerKind, Scenario};
use super::trace::{SimTrace, TraceRow};
use crate::control::{
    do_smc, ido_psmc, manifold_p, manifold_q, proxy_step, psmc, smc, tracking_integral_step, ControlOutput,
    Measurement, NominalPlant, ProxyState, ReferenceSignal,
};
use crate::disturbance::DisturbanceProfile;
use crate::error::Error;
use crate::observer::{observer_step, ObserverGains, ObserverState};
use crate::plant::{equilibrium_pressure, step, PlantState, PressureHistory};
use crate::stability::{assess, StabilityReport};

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: SimTrace,
    pub metrics: MetricsReport,
    pub stability: StabilityReport,
    /// `[e_p, e_p', e_p'']` per sample; empty without a proxy.
    pub coupling: Vec<[f64; 3]>,
    /// Largest `|S_p - S_q + (e_p'' + c1 e_p' + c2 e_p)|` over the run.
    pub max_identity_residual: f64,
}

impl RunOutcome {
    /// Largest `||e_p||_1` over samples with `t` in `[start, end]`.
    pub fn max_coupling_norm(&self, start: f64, end: f64) -> Option<f64> {
        if self.coupling.is_empty() {
            return None;
        }
        let idx = self.trace.window_indices(start, end);
        self.coupling[idx]
            .iter()
            .map(|e| e.iter().map(|v| v.abs()).sum::<f64>())
            .reduce(f64::max)
    }
}

/// A run that stopped early. The trace holds every sample recorded before
/// the failure.
#[derive(Debug)]
pub struct RunError {
    pub error: Error,
    pub partial: Option<SimTrace>,
    pub stability: Option<StabilityReport>,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.partial {
            Some(tr) => write!(f, "{} (after {} samples)", self.error, tr.len()),
            None => write!(f, "{}", self.error),
        }
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for RunError {
    fn from(error: Error) -> Self {
        Self {
            error,
            partial: None,
            stability: None,
        }
    }
}

pub fn stability_of(s: &Scenario) -> StabilityReport {
    assess(&s.gains, s.eps(), &s.stability.q1())
}

/// Simulate `s`: per sample read the reference, refresh the observer,
/// evaluate the control law, then advance observer, proxy and plant.
///
/// Gains failing the stability gate abort proxy-family runs unless
/// `s.force` is set.
#[allow(clippy::result_large_err)]
pub fn run_scenario(s: &Scenario) -> Result<RunOutcome, RunError> {
    s.validate()?;
    let stability = stability_of(s);
    if s.controller.uses_proxy() && !stability.feasible && !s.force {
        return Err(RunError {
            error: Error::InfeasibleGains(stability.violation_names().join(", ")),
            partial: None,
            stability: Some(stability),
        });
    }
    let mut sim = Simulation::new(s)?;
    let n = s.steps();
    let mut trace = SimTrace::with_capacity(s.dt, n + 1);
    let mut coupling = Vec::with_capacity(if s.controller.uses_proxy() { n + 1 } else { 0 });
    let mut max_identity = 0.0f64;
    for k in 0..=n {
        let t = k as f64 * s.dt;
        let sample = match sim.sample(t) {
            Ok(sample) => sample,
            Err(error) => return Err(abort(error, trace, stability)),
        };
        trace.rows.push(sample.row);
        if let Some(e) = sample.coupling {
            coupling.push(e);
            max_identity = max_identity.max(sample.identity_residual);
        }
        if k == n {
            break;
        }
        if let Err(error) = sim.advance(t, &sample.control) {
            return Err(abort(error, trace, stability));
        }
    }
    let metrics = metrics(&trace, s.metrics_window()).map_err(RunError::from)?;
    Ok(RunOutcome {
        trace,
        metrics,
        stability,
        coupling,
        max_identity_residual: max_identity,
    })
}

fn abort(error: Error, trace: SimTrace, stability: StabilityReport) -> RunError {
    RunError {
        error,
        partial: Some(trace),
        stability: Some(stability),
    }
}

struct Sample {
    row: TraceRow,
    control: ControlOutput,
    coupling: Option<[f64; 3]>,
    identity_residual: f64,
}

/// Mutable closed-loop state for one scenario.
struct Simulation<'a> {
    s: &'a Scenario,
    truth: crate::plant::PmaParams,
    plant: PlantState,
    controller_history: PressureHistory,
    observer_gains: Option<ObserverGains>,
    observer: Option<ObserverState>,
    proxy: ProxyState,
}

impl<'a> Simulation<'a> {
    fn new(s: &'a Scenario) -> Result<Self, Error> {
        let truth = s.plant_truth();
        let mut plant = PlantState {
            x: s.initial.x,
            xdot: s.initial.xdot,
            t: 0.0,
            pressure: PressureHistory::default(),
        };
        let mut controller_history = PressureHistory::default();
        if s.initial.equilibrium {
            plant.xdot = 0.0;
            plant.pressure.p_prev = equilibrium_pressure(&truth, s.initial.x)?;
            controller_history.p_prev = equilibrium_pressure(&s.nominal, s.initial.x)?;
        }
        let observer_gains = if s.controller.uses_observer() {
            Some(ObserverGains::new(s.gains.l1, s.gains.l2)?)
        } else {
            None
        };
        let observer = observer_gains.map(|g| ObserverState::new(&g, plant.xdot));
        let proxy = ProxyState::on_reference(&s.trajectory.at(0.0));
        Ok(Self {
            s,
            truth,
            plant,
            controller_history,
            observer_gains,
            observer,
            proxy,
        })
    }

    fn meas(&self) -> Measurement {
        Measurement {
            x: self.plant.x,
            xdot: self.plant.xdot,
        }
    }

    fn nominal(&self) -> NominalPlant<'a> {
        NominalPlant {
            params: &self.s.nominal,
            history: self.controller_history,
        }
    }

    fn sample(&mut self, t: f64) -> Result<Sample, Error> {
        let s = self.s;
        let r = s.trajectory.at(t);
        let meas = self.meas();
        if let (Some(g), Some(obs)) = (&self.observer_gains, &mut self.observer) {
            *obs = obs.measured(g, meas.xdot);
        }
        let nominal = self.nominal();
        let obs = self.observer.unwrap_or(ObserverState {
            p1: 0.0,
            p2: 0.0,
            tau_hat: 0.0,
            taudot_hat: 0.0,
        });
        let control = match s.controller {
            ControllerKind::IdoPsmc => ido_psmc(&s.gains, &nominal, &r, &meas, &self.proxy, &obs)?,
            ControllerKind::Psmc => psmc(&s.gains, &nominal, &r, &meas, &self.proxy)?,
            ControllerKind::DoSmc => do_smc(&s.smc_gains, &nominal, &r, &meas, self.proxy.int_exd, &obs)?,
            ControllerKind::Smc => smc(&s.smc_gains, &nominal, &r, &meas, self.proxy.int_exd)?,
        };
        let (coupling, identity_residual, xp) = if s.controller.uses_proxy() {
            let e = self.proxy.coupling_error(&meas);
            let g = &s.gains;
            let sq = manifold_q(&r, meas.x, meas.xdot, self.proxy.int_exd, g.c1, g.c2);
            let sp = manifold_p(&r, &self.proxy, g.c1, g.c2);
            let residual = (sp - (sq - (e[2] + g.c1 * e[1] + g.c2 * e[0]))).abs();
            (Some(e), residual, self.proxy.xp)
        } else {
            (None, 0.0, f64::NAN)
        };
        let row = TraceRow {
            t,
            xd: r.xd,
            x: meas.x,
            xp,
            u: control.u,
            sq: control.sq,
            sp: control.sp.unwrap_or(f64::NAN),
            tau: s.disturbance.eval(t),
            tau_hat: obs.tau_hat,
            taudot_hat: obs.taudot_hat,
            saturated: control.saturated,
        };
        Ok(Sample {
            row,
            control,
            coupling,
            identity_residual,
        })
    }

    /// Mean acceleration of the undisturbed nominal plant over the next
    /// step with `u` held. Evaluating the model at the sampled velocity
    /// instead would charge the within-step velocity change to the
    /// disturbance estimate whenever `b/m` is comparable to the sample rate.
    fn nominal_drive(&self, t: f64, u: f64) -> Result<f64, Error> {
        let from = PlantState {
            x: self.plant.x,
            xdot: self.plant.xdot,
            t,
            pressure: self.controller_history,
        };
        let to = step(&self.s.nominal, &from, u, &DisturbanceProfile::Zero, self.s.dt)?;
        Ok((to.xdot - from.xdot) / self.s.dt)
    }

    fn advance(&mut self, t: f64, control: &ControlOutput) -> Result<(), Error> {
        let s = self.s;
        let meas = self.meas();
        if self.observer.is_some() {
            let drive = self.nominal_drive(t, control.u)?;
            if let (Some(g), Some(obs)) = (&self.observer_gains, &mut self.observer) {
                *obs = observer_step(g, obs, meas.xdot, drive, s.dt)?;
            }
        }
        if s.controller.uses_proxy() {
            let n = s.proxy_substeps;
            let h = s.dt / n as f64;
            for i in 0..n {
                self.proxy = proxy_step(&s.gains, &s.trajectory, t + i as f64 * h, &meas, &self.proxy, h)?;
            }
        } else {
            self.proxy.int_exd = tracking_integral_step(&s.trajectory, t, meas.x, self.proxy.int_exd, s.dt);
        }
        self.controller_history = self.controller_history.advance(control.u);
        self.plant.t = t;
        self.plant = step(&self.truth, &self.plant, control.u, &s.disturbance, s.dt)?;
        Ok(())
    }
}
