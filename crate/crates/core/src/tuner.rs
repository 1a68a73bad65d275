// SPDX-License-Identifier: Apache-2.0

//! Constrained firefly algorithm over a box.
//!
//! Candidates failing the feasibility gate are never evaluated; they carry a
//! fixed penalty objective instead. Each firefly owns a ChaCha stream derived
//! from the master seed, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::trace::SimTrace;

/// Infeasible objective as a multiple of the problem's reference objective.
pub const PENALTY_FACTOR: f64 = 1e3;

/// Offset in `I = 1 / (h + BRIGHTNESS_EPS)`.
pub const BRIGHTNESS_EPS: f64 = 1e-12;

/// Distribution of the random term of a move, in units of `alpha` times the
/// box width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepNoise {
    /// `delta` with `delta ~ N(0, 1)`.
    #[default]
    Centered,
    /// `delta - 1/2` with `delta ~ N(0, 1)`. Biased toward the lower bounds
    /// by half a step per move.
    HalfOffset,
}

impl StepNoise {
    fn offset(self) -> f64 {
        match self {
            StepNoise::Centered => 0.0,
            StepNoise::HalfOffset => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaConfig {
    /// Population size.
    pub n: usize,
    pub max_generations: usize,
    pub beta0: f64,
    /// Length-scale coefficient; `1 / L^2` for box diagonal `L` when absent.
    pub gamma_fa: Option<f64>,
    /// Randomization weight, as a fraction of each box width.
    pub alpha: f64,
    /// Per-generation factor applied to `alpha`.
    pub alpha_decay: f64,
    pub step_noise: StepNoise,
    /// Weight of the maximum error in the tracking objective.
    pub lambda_tradeoff: f64,
    /// Objective of infeasible candidates; `PENALTY_FACTOR` times the
    /// problem's reference objective when absent.
    pub penalty: Option<f64>,
    /// `[lower, upper]` per dimension.
    pub bounds: Vec<[f64; 2]>,
    pub rng_seed: u64,
}

impl Default for FaConfig {
    fn default() -> Self {
        Self {
            n: 20,
            max_generations: 50,
            beta0: 1.0,
            gamma_fa: None,
            alpha: 0.05,
            alpha_decay: 0.97,
            step_noise: StepNoise::Centered,
            lambda_tradeoff: 0.1,
            penalty: None,
            bounds: default_gain_bounds().to_vec(),
            rng_seed: 0,
        }
    }
}

/// Search box for `[gamma, c1, c2, kp, ki, kd, l1, l2]`, a decade either
/// side of the published set, with observer poles between -5 and -50.
pub fn default_gain_bounds() -> [[f64; 2]; 8] {
    [
        [1.0e3, 1.0e5],
        [20.0, 500.0],
        [20.0, 500.0],
        [250.0, 2.5e4],
        [200.0, 2.0e4],
        [20.0, 2.0e3],
        [10.0, 100.0],
        [25.0, 2500.0],
    ]
}

impl FaConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: &str| Err(Error::Config(msg.into()));
        if self.n < 2 {
            return cfg("n must be >= 2");
        }
        if !(self.beta0 > 0.0) {
            return cfg("beta0 must be > 0");
        }
        if let Some(g) = self.gamma_fa {
            if !(g > 0.0) {
                return cfg("gamma_fa must be > 0");
            }
        }
        if !(self.alpha >= 0.0) {
            return cfg("alpha must be >= 0");
        }
        if !(self.alpha_decay > 0.0 && self.alpha_decay <= 1.0) {
            return cfg("alpha_decay must be in (0, 1]");
        }
        if !(self.lambda_tradeoff >= 0.0) {
            return cfg("lambda_tradeoff must be >= 0");
        }
        if let Some(p) = self.penalty {
            if !(p > 0.0 && p.is_finite()) {
                return cfg("penalty must be finite and > 0");
            }
        }
        if self.bounds.is_empty() {
            return cfg("bounds must not be empty");
        }
        if self
            .bounds
            .iter()
            .any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo <= hi))
        {
            return cfg("every bound must be finite with lower <= upper");
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn diagonal(&self) -> f64 {
        self.bounds.iter().map(|[lo, hi]| (hi - lo).powi(2)).sum::<f64>().sqrt()
    }

    pub fn resolved_gamma(&self) -> f64 {
        self.gamma_fa.unwrap_or_else(|| match self.diagonal() {
            l if l > 0.0 => 1.0 / (l * l),
            _ => 1.0,
        })
    }

    pub fn clamp(&self, s: &mut [f64]) {
        for (v, [lo, hi]) in s.iter_mut().zip(&self.bounds) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn contains(&self, s: &[f64]) -> bool {
        s.len() == self.dim() && s.iter().zip(&self.bounds).all(|(v, [lo, hi])| v >= lo && v <= hi)
    }
}

/// What the tuner searches over.
pub trait Problem: Sync {
    /// Feasibility gate; infeasible candidates are never evaluated.
    fn feasible(&self, s: &[f64]) -> bool;
    /// Objective of a feasible candidate. Non-finite values are replaced by
    /// the penalty.
    fn evaluate(&self, s: &[f64]) -> f64;
    /// Objective scale used to derive the default penalty.
    fn reference_objective(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Firefly {
    pub s: Vec<f64>,
    /// Objective `h`.
    pub objective: f64,
    pub brightness: f64,
    pub feasible: bool,
}

impl Firefly {
    fn scored(s: Vec<f64>, objective: f64, feasible: bool) -> Self {
        Self {
            s,
            objective,
            brightness: brightness(objective),
            feasible,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Best feasible objective found so far; infinite before the first.
    pub best_h: f64,
    pub mean_h: f64,
    pub feasible_count: usize,
}

#[derive(Debug, Clone)]
pub struct FaOutcome {
    pub best: Firefly,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationRecord>,
    pub population: Vec<Firefly>,
    /// Candidates passed to `Problem::evaluate`.
    pub evaluations: usize,
    /// Candidates that passed the gate.
    pub gate_passed: usize,
    pub penalty: f64,
}

/// Mean absolute error plus `lambda` times the maximum absolute error over
/// every sample of `trace`.
pub fn objective(trace: &SimTrace, lambda: f64) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::Domain("objective of an empty trace".into()));
    }
    let (sum, max) = trace
        .rows
        .iter()
        .map(|r| r.abs_error())
        .fold((0.0, 0.0f64), |(s, m), e| (s + e, m.max(e)));
    Ok(sum / trace.len() as f64 + lambda * max)
}

pub fn distance(si: &[f64], sj: &[f64]) -> f64 {
    si.iter().zip(sj).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

pub fn attractiveness(beta0: f64, gamma_fa: f64, r: f64) -> f64 {
    beta0 * (-gamma_fa * r * r).exp()
}

pub fn brightness(objective: f64) -> f64 {
    1.0 / (objective + BRIGHTNESS_EPS)
}

/// Parameters of one move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveParams {
    pub beta0: f64,
    pub gamma_fa: f64,
    pub alpha: f64,
    pub noise: StepNoise,
}

/// Move `si` toward `sj`: `si + beta (sj - si) + alpha w (delta - o)` per
/// component with `delta ~ N(0, 1)` drawn independently, `w` the box width
/// and `o` the offset of `params.noise`, then clamp to the box.
pub fn move_toward<R: rand::Rng + ?Sized>(
    si: &[f64],
    sj: &[f64],
    params: &MoveParams,
    bounds: &[[f64; 2]],
    rng: &mut R,
) -> Vec<f64> {
    let MoveParams {
        beta0,
        gamma_fa,
        alpha,
        noise,
    } = *params;
    let offset = noise.offset();
    let beta = attractiveness(beta0, gamma_fa, distance(si, sj));
    si.iter()
        .zip(sj)
        .zip(bounds)
        .map(|((a, b), [lo, hi])| {
            let delta: f64 = StandardNormal.sample(rng);
            let step = alpha * (hi - lo) * (delta - offset);
            (a + beta * (b - a) + step).clamp(*lo, *hi)
        })
        .collect()
}

/// Stream `index` of the master seed.
pub fn firefly_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Run the constrained firefly search and return the best feasible firefly
/// ever seen.
///
/// Generations update synchronously: every move reads the population as it
/// stood at the start of the generation, and a firefly moves once toward
/// each brighter one in index order.
pub fn run<P: Problem>(config: &FaConfig, problem: &P) -> Result<FaOutcome> {
    config.validate()?;
    let penalty = config
        .penalty
        .unwrap_or_else(|| PENALTY_FACTOR * problem.reference_objective());
    if !(penalty > 0.0 && penalty.is_finite()) {
        return Err(Error::Config(format!("penalty {penalty} must be finite and > 0")));
    }
    let gamma = config.resolved_gamma();
    let mut rngs: Vec<ChaCha8Rng> = (0..config.n).map(|i| firefly_rng(config.rng_seed, i)).collect();

    let score = |s: Vec<f64>| -> (Firefly, bool) {
        if !problem.feasible(&s) {
            return (Firefly::scored(s, penalty, false), false);
        }
        let h = problem.evaluate(&s);
        let h = if h.is_finite() { h.max(0.0) } else { penalty };
        (Firefly::scored(s, h, true), true)
    };

    let initial: Vec<Vec<f64>> = rngs
        .iter_mut()
        .map(|rng| {
            config
                .bounds
                .iter()
                .map(|&[lo, hi]| {
                    if hi > lo {
                        Uniform::new_inclusive(lo, hi).unwrap().sample(rng)
                    } else {
                        lo
                    }
                })
                .collect()
        })
        .collect();
    let scored: Vec<(Firefly, bool)> = initial.into_par_iter().map(score).collect();
    let mut evaluations = scored.iter().filter(|(_, e)| *e).count();
    let mut population: Vec<Firefly> = scored.into_iter().map(|(f, _)| f).collect();
    let mut gate_passed = evaluations;

    let mut best: Option<Firefly> = None;
    let mut history = Vec::with_capacity(config.max_generations + 1);
    let mut record = |generation: usize, pop: &[Firefly], best: &mut Option<Firefly>| {
        for f in pop.iter().filter(|f| f.feasible) {
            if best.as_ref().is_none_or(|b| f.objective < b.objective) {
                *best = Some(f.clone());
            }
        }
        history.push(GenerationRecord {
            generation,
            best_h: best.as_ref().map_or(f64::INFINITY, |b| b.objective),
            mean_h: pop.iter().map(|f| f.objective).sum::<f64>() / pop.len() as f64,
            feasible_count: pop.iter().filter(|f| f.feasible).count(),
        });
    };
    record(0, &population, &mut best);

    let mut alpha = config.alpha;
    for generation in 1..=config.max_generations {
        let snapshot = population.clone();
        let params = MoveParams {
            beta0: config.beta0,
            gamma_fa: gamma,
            alpha,
            noise: config.step_noise,
        };
        let moved: Vec<Option<Vec<f64>>> = rngs
            .par_iter_mut()
            .enumerate()
            .map(|(i, rng)| {
                let mut si = snapshot[i].s.clone();
                let mut moved = false;
                for fj in &snapshot {
                    if fj.brightness > snapshot[i].brightness {
                        si = move_toward(&si, &fj.s, &params, &config.bounds, rng);
                        moved = true;
                    }
                }
                moved.then_some(si)
            })
            .collect();
        let rescored: Vec<Option<(Firefly, bool)>> = moved.into_par_iter().map(|m| m.map(score)).collect();
        for (slot, r) in population.iter_mut().zip(rescored) {
            if let Some((f, evaluated)) = r {
                if evaluated {
                    evaluations += 1;
                    gate_passed += 1;
                }
                *slot = f;
            }
        }
        record(generation, &population, &mut best);
        alpha *= config.alpha_decay;
    }

    match best {
        Some(best) => Ok(FaOutcome {
            best,
            history,
            population,
            evaluations,
            gate_passed,
            penalty,
        }),
        // Every infeasible candidate carries the same penalty.
        None => Err(Error::ExhaustedBudget {
            best_objective: penalty,
            best: population.swap_remove(0).s,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trace::TraceRow;

    fn trace(errors: &[f64]) -> SimTrace {
        let mut tr = SimTrace::new(1e-3);
        for (i, e) in errors.iter().enumerate() {
            tr.rows.push(TraceRow {
                t: i as f64 * 1e-3,
                xd: 0.02,
                x: 0.02 - e,
                xp: f64::NAN,
                u: 0.0,
                sq: 0.0,
                sp: f64::NAN,
                tau: 0.0,
                tau_hat: 0.0,
                taudot_hat: 0.0,
                saturated: false,
            });
        }
        tr
    }

    #[test]
    fn objective_examples() {
        assert_eq!(objective(&trace(&[0.0; 4]), 1.0).unwrap(), 0.0);
        let h = objective(&trace(&[1e-3, 2e-3, 3e-3]), 1.0).unwrap();
        assert!((h - 5e-3).abs() < 1e-15);
        let h = objective(&trace(&[1e-3, 2e-3, 3e-3]), 0.0).unwrap();
        assert!((h - 2e-3).abs() < 1e-15);
        assert!(objective(&SimTrace::new(1e-3), 1.0).is_err());
    }

    #[test]
    fn distance_examples() {
        let z = [0.0; 8];
        assert_eq!(distance(&z, &z), 0.0);
        let mut e = z;
        e[3] = 1.0;
        assert_eq!(distance(&z, &e), 1.0);
        let mut v = z;
        v[0] = 3.0;
        v[1] = 4.0;
        assert_eq!(distance(&z, &v), 5.0);
    }

    #[test]
    fn attractiveness_examples() {
        assert_eq!(attractiveness(0.7, 3.0, 0.0), 0.7);
        assert!((attractiveness(1.0, 1.0, 1.0) - 0.36788).abs() < 1e-5);
        assert!(attractiveness(1.0, 1.0, 2.0) < attractiveness(1.0, 1.0, 1.0));
    }

    #[test]
    fn move_edge_cases() {
        let bounds = [[-10.0, 10.0]; 3];
        let mut rng = firefly_rng(1, 0);
        let s = [1.0, -2.0, 3.0];
        let still = MoveParams {
            beta0: 1.0,
            gamma_fa: 1.0,
            alpha: 0.0,
            noise: StepNoise::HalfOffset,
        };
        assert_eq!(move_toward(&s, &s, &still, &bounds, &mut rng), s.to_vec());
        let t = [4.0, 5.0, -6.0];
        let full = MoveParams { gamma_fa: 0.0, ..still };
        assert_eq!(move_toward(&s, &t, &full, &bounds, &mut rng), t.to_vec());
        let noisy = MoveParams {
            beta0: 1.0,
            gamma_fa: 0.1,
            alpha: 0.5,
            noise: StepNoise::Centered,
        };
        let a = move_toward(&s, &t, &noisy, &bounds, &mut firefly_rng(9, 2));
        let b = move_toward(&s, &t, &noisy, &bounds, &mut firefly_rng(9, 2));
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.abs() <= 10.0));
    }

    #[test]
    fn half_offset_shifts_the_random_term() {
        let bounds = [[-1e3, 1e3]; 4];
        let s = [0.0; 4];
        let p = MoveParams {
            beta0: 1.0,
            gamma_fa: 1.0,
            alpha: 0.01,
            noise: StepNoise::Centered,
        };
        let a = move_toward(&s, &s, &p, &bounds, &mut firefly_rng(3, 0));
        let half = MoveParams {
            noise: StepNoise::HalfOffset,
            ..p
        };
        let b = move_toward(&s, &s, &half, &bounds, &mut firefly_rng(3, 0));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y - 0.01 * 2e3 * 0.5).abs() < 1e-9);
        }
    }

    struct Rejecting;

    impl Problem for Rejecting {
        fn feasible(&self, _: &[f64]) -> bool {
            false
        }
        fn evaluate(&self, _: &[f64]) -> f64 {
            panic!("infeasible candidate evaluated")
        }
        fn reference_objective(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn gate_rejecting_everything_exhausts_budget() {
        let cfg = FaConfig {
            bounds: vec![[0.0, 1.0]; 8],
            max_generations: 5,
            ..FaConfig::default()
        };
        match run(&cfg, &Rejecting) {
            Err(Error::ExhaustedBudget { best_objective, best }) => {
                assert_eq!(best_objective, 1e3);
                assert_eq!(best.len(), 8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            FaConfig {
                n: 1,
                ..FaConfig::default()
            },
            FaConfig {
                beta0: 0.0,
                ..FaConfig::default()
            },
            FaConfig {
                gamma_fa: Some(-1.0),
                ..FaConfig::default()
            },
            FaConfig {
                alpha: -0.1,
                ..FaConfig::default()
            },
            FaConfig {
                bounds: vec![[1.0, 0.0]],
                ..FaConfig::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
