use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gwrm_bench::{interval_scaling, lorenz_interval_solve};
use gwrm_core::chebyshev::{clenshaw, ChebTransform};

fn chebyshev_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("chebyshev");
    for k in [8usize, 16, 32] {
        let basis = ChebTransform::new(k);
        let values: Vec<f64> = basis.points().iter().map(|x| x.exp()).collect();
        g.bench_with_input(BenchmarkId::new("fit", k), &k, |b, _| b.iter(|| basis.coefficients(black_box(&values))));
        let coeffs = basis.coefficients(&values);
        g.bench_with_input(BenchmarkId::new("clenshaw", k), &k, |b, _| b.iter(|| clenshaw(black_box(&coeffs), 0.3)));
    }
    g.finish();
}

fn interval_solve(c: &mut Criterion) {
    let orders = [6usize, 10, 16, 24, 32];
    let mut g = c.benchmark_group("gwrm_interval");
    for k in orders {
        g.bench_with_input(BenchmarkId::new("lorenz84", k), &k, |b, &k| b.iter(|| lorenz_interval_solve(k)));
    }
    g.finish();

    let s = interval_scaling(&orders, 15);
    println!("interval solve scaling (N = unknowns):");
    for (n, t) in s.unknowns.iter().zip(&s.seconds) {
        println!("  N = {n:>4}  {:>10.3e} s", t);
    }
    println!("  fitted time ∝ N^{:.2}", s.exponent);
}

criterion_group!(benches, chebyshev_kernels, interval_solve);
criterion_main!(benches);
