use std::hint::black_box;

use amerput_bench::setup;
use amerput_core::banded::BandMatrix;
use amerput_core::interp::z_derivative;
use amerput_core::model::initial_state;
use amerput_core::scheme::TridiagonalFactor;
use amerput_core::{
    amplification_spectrum, sample_coupling, solve, thomas_solve, InterpOrder, Method, Stepper, TridiagonalSystem,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn system(n: usize) -> TridiagonalSystem {
    TridiagonalSystem {
        sub: vec![1.0 / 12.0; n],
        diag: vec![10.0 / 12.0 + 0.5; n],
        sup: vec![1.0 / 12.0; n],
        rhs: (0..n).map(|i| (i as f64 * 0.01).sin()).collect(),
    }
}

fn tridiagonal(c: &mut Criterion) {
    let mut g = c.benchmark_group("tridiagonal");
    for n in [301, 3001] {
        let sys = system(n);
        g.bench_with_input(BenchmarkId::new("thomas", n), &sys, |b, s| b.iter(|| thomas_solve(black_box(s)).unwrap()));
        let f = TridiagonalFactor::new(&sys.sub, &sys.diag, &sys.sup).unwrap();
        g.bench_with_input(BenchmarkId::new("factored_solve", n), &sys, |b, s| {
            b.iter(|| {
                let mut x = s.rhs.clone();
                f.solve_in_place(black_box(&mut x));
                x
            })
        });
    }
    g.finish();
}

fn banded(c: &mut Criterion) {
    // Bordered block systems are pentadiagonal-like with a few extra bands.
    let n = 4 * 301;
    let mut a = BandMatrix::zeros(n, 4, 4);
    for i in 0..n {
        a.add(i, i, 4.0);
        for d in 1..=4 {
            if i >= d {
                a.add(i, i - d, -0.3 / d as f64);
            }
            if i + d < n {
                a.add(i, i + d, -0.2 / d as f64);
            }
        }
    }
    let rhs: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
    c.bench_function("banded/factor_solve_1204", |b| {
        b.iter(|| {
            let mut m = a.clone();
            m.factor().unwrap();
            let mut x = rhs.clone();
            m.solve_in_place(&mut x);
            black_box(x)
        })
    });
}

fn amplification(c: &mut Criterion) {
    c.bench_function("amplification_spectrum", |b| {
        b.iter(|| amplification_spectrum(black_box(2.5), 0.4, 0.3, 0.05, 1.1).unwrap())
    });
}

fn interpolation(c: &mut Criterion) {
    let (model, cfg) = setup("two-regime", 0.01, Method::GaussSeidel, 40);
    let res = solve(&model, &cfg).unwrap();
    let grid = cfg.grid;
    let (donor, target) = (&res.states[0], &res.states[1]);
    let slope = z_derivative(&donor.z, grid.h).unwrap();
    let mut g = c.benchmark_group("sample_coupling_all_nodes");
    for order in [InterpOrder::Cubic, InterpOrder::Quintic] {
        g.bench_function(format!("{order:?}"), |b| {
            b.iter(|| {
                let mut acc = 0.0;
                for i in 0..=grid.m {
                    let s = sample_coupling(donor, grid.x(i), target.s_f, model.strike, order, &slope, &grid).unwrap();
                    acc += s.u;
                }
                black_box(acc)
            })
        });
    }
    g.finish();
}

fn time_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("first_time_step");
    for (name, method) in [("gs", Method::GaussSeidel), ("newton", Method::Newton)] {
        let (model, cfg) = setup("four-regime", 0.01, method, 1);
        let start = initial_state(&model, &cfg.grid);
        let mut stepper = Stepper::new(&model, &cfg).unwrap();
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut states = start.clone();
                stepper.step(&mut states, 0).unwrap();
                black_box(states)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, tridiagonal, banded, amplification, interpolation, time_step);
criterion_main!(benches);
