use std::hint::black_box;

use amerput_bench::setup;
use amerput_core::{solve, InterpOrder, Method};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

/// Full solves over a short horizon, per method variant and grid size.
fn variants(c: &mut Criterion) {
    let mut g = c.benchmark_group("two-regime/20-steps");
    g.sample_size(10);
    for h in [0.1, 0.05, 0.01] {
        for (mname, method) in [("gs", Method::GaussSeidel), ("newton", Method::Newton)] {
            for order in [InterpOrder::Cubic, InterpOrder::Quintic] {
                let (model, cfg) = setup("two-regime", h, method, 20);
                let cfg = cfg.with_interpolation(order);
                g.bench_with_input(BenchmarkId::new(format!("{mname}-{order:?}"), h), &cfg, |b, cfg| {
                    b.iter(|| solve(black_box(&model), cfg).unwrap())
                });
            }
        }
    }
    g.finish();
}

fn regime_count(c: &mut Criterion) {
    let mut g = c.benchmark_group("regimes/10-steps-h0.05");
    g.sample_size(10);
    for name in ["two-regime", "four-regime", "eight-regime", "sixteen-regime"] {
        for (mname, method, parallel) in [
            ("gs", Method::GaussSeidel, false),
            ("newton", Method::Newton, false),
            ("newton-par", Method::Newton, true),
        ] {
            let (model, cfg) = setup(name, 0.05, method, 10);
            let cfg = cfg.with_parallel(parallel);
            g.bench_function(BenchmarkId::new(mname, name), |b| b.iter(|| solve(black_box(&model), &cfg).unwrap()));
        }
    }
    g.finish();
}

criterion_group!(benches, variants, regime_count);
criterion_main!(benches);
