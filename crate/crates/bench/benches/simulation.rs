// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pmalab_bench::{resting_state, short_scenario};
use pmalab_core::harness::{run_scenario, ControllerKind};
use pmalab_core::plant::{self, PmaParams};
use pmalab_core::tuner::{self, move_toward, MoveParams, StepNoise};
use pmalab_core::DisturbanceProfile;

fn plant_step(c: &mut Criterion) {
    let params = PmaParams::default();
    let state = resting_state(3.0e5);
    let d = DisturbanceProfile::Zero;
    c.bench_function("plant_step", |b| {
        b.iter(|| plant::step(&params, black_box(&state), black_box(3.1e5), &d, 1e-3).unwrap())
    });
}

fn closed_loop(c: &mut Criterion) {
    let mut g = c.benchmark_group("closed_loop_1s");
    g.sample_size(20);
    for kind in ControllerKind::ALL {
        let s = pmalab_core::harness::Scenario {
            controller: kind,
            force: true,
            ..short_scenario()
        };
        g.bench_function(kind.label(), |b| b.iter(|| run_scenario(black_box(&s)).unwrap()));
    }
    g.finish();
}

fn firefly_move(c: &mut Criterion) {
    let bounds = tuner::default_gain_bounds();
    let si: Vec<f64> = bounds.iter().map(|[lo, hi]| lo + 0.25 * (hi - lo)).collect();
    let sj: Vec<f64> = bounds.iter().map(|[lo, hi]| lo + 0.75 * (hi - lo)).collect();
    let params = MoveParams {
        beta0: 1.0,
        gamma_fa: 1e-8,
        alpha: 0.05,
        noise: StepNoise::Centered,
    };
    let mut rng = tuner::firefly_rng(1, 0);
    c.bench_function("firefly_move", |b| {
        b.iter(|| move_toward(black_box(&si), black_box(&sj), &params, &bounds, &mut rng))
    });
}

criterion_group!(benches, plant_step, closed_loop, firefly_move);
criterion_main!(benches);
