use criterion::{criterion_group, criterion_main, Criterion};
use gwrm_bench::{lorenz_default, robertson_default};
use gwrm_core::gwrm::solve_adaptive;
use gwrm_core::refsolvers::{default_trapezoid_newton, rk4_adaptive, trapezoid_adaptive, StepperConfig};
use gwrm_core::GwrmConfig;

fn robertson(c: &mut Criterion) {
    let p = robertson_default();
    let mut g = c.benchmark_group("robertson");
    g.sample_size(20);
    let cfg = GwrmConfig { order: 6, epsilon: 1e-3, ..GwrmConfig::default() };
    g.bench_function("gwrm", |b| b.iter(|| solve_adaptive(&p, &cfg).unwrap()));
    let steps = StepperConfig::for_problem(&p, 1e-3);
    let newton = default_trapezoid_newton();
    g.bench_function("trapezoid", |b| b.iter(|| trapezoid_adaptive(&p, &steps, &newton).unwrap()));
    g.finish();
}

fn lorenz(c: &mut Criterion) {
    let p = lorenz_default().with_span(0.0, 30.0);
    let mut g = c.benchmark_group("lorenz84");
    g.sample_size(20);
    let cfg = GwrmConfig { order: 8, epsilon: 1e-3, ..GwrmConfig::default() };
    g.bench_function("gwrm", |b| b.iter(|| solve_adaptive(&p, &cfg).unwrap()));
    let steps = StepperConfig::for_problem(&p, 1e-3);
    g.bench_function("rk4", |b| b.iter(|| rk4_adaptive(&p, &steps).unwrap()));
    g.bench_function("trapezoid", |b| {
        b.iter(|| trapezoid_adaptive(&p, &steps, &default_trapezoid_newton()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, robertson, lorenz);
criterion_main!(benches);
