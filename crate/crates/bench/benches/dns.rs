use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wavebif::dns::{nonlinear_term, FieldState, Scheme, Stepper, StepperConfig};
use wavebif::{FluxModel, NormalizedParameters};

fn state(n: usize) -> FieldState {
    let mut s = FieldState::zeros(n).unwrap();
    s.add_noise(1, 0.05, n / 4);
    s
}

fn step(c: &mut Criterion) {
    let mut g = c.benchmark_group("step");
    let flux = FluxModel::new(0.0, 1.0, 2.0);
    for n in [64, 256] {
        for scheme in [Scheme::Etdrk4, Scheme::StrangSplit] {
            let cfg = StepperConfig {
                scheme,
                ..StepperConfig::new(0.5)
            };
            let mut st = Stepper::new(n, NormalizedParameters::normalized(1.0, 1.01), flux.clone(), cfg).unwrap();
            let mut s = state(n);
            g.bench_with_input(BenchmarkId::new(format!("{scheme:?}"), n), &n, |b, _| {
                b.iter(|| {
                    st.step(&mut s).unwrap();
                    black_box(&s);
                })
            });
        }
    }
    g.finish();
}

fn nonlinear(c: &mut Criterion) {
    let flux = FluxModel::new(0.0, 1.0, 2.0);
    let s = state(256);
    c.bench_function("nonlinear_term/256", |b| {
        b.iter(|| nonlinear_term(black_box(&s), &flux, StepperConfig::new(0.5)).unwrap())
    });
}

criterion_group!(benches, step, nonlinear);
criterion_main!(benches);
