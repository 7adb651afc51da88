//! Fixtures and the solver-scaling measurement shared by the benches.

use std::time::Instant;

use gwrm_core::gwrm::solve_interval;
use gwrm_core::problems::{lorenz84, robertson};
use gwrm_core::{Interval, OdeProblem, SolverConfig};

pub fn robertson_default() -> OdeProblem {
    robertson(0.04, 1e4, 3e7)
}

pub fn lorenz_default() -> OdeProblem {
    lorenz84(0.25, 4.0, 8.0, 1.0)
}

/// Least-squares fit of `y = c·x^p` in log-log space; returns `(p, c)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need two points");
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let p = sxy / sxx;
    (p, (my - p * mx).exp())
}

/// One Newton solve of a single Lorenz-84 interval at order `order`.
pub fn lorenz_interval_solve(order: usize) {
    let p = lorenz_default();
    let iv = Interval::new(0.0, 0.5).unwrap();
    let guess: Vec<f64> = p
        .u0()
        .iter()
        .flat_map(|&u| std::iter::once(2.0 * u).chain(std::iter::repeat_n(0.0, order)))
        .collect();
    solve_interval(&p, iv, order, p.u0(), &guess, &SolverConfig::newton(1e-12)).unwrap();
}

/// Median wall time of `reps` calls to `f`, in seconds.
pub fn median_time(reps: usize, mut f: impl FnMut()) -> f64 {
    let mut t: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let clock = Instant::now();
            f();
            clock.elapsed().as_secs_f64()
        })
        .collect();
    t.sort_by(f64::total_cmp);
    t[t.len() / 2]
}

/// Wall time of one interval solve against the unknown count `N = 3(K+1)`,
/// with the fitted exponent of `time ∝ N^p`.
pub struct Scaling {
    pub unknowns: Vec<f64>,
    pub seconds: Vec<f64>,
    pub exponent: f64,
}

pub fn interval_scaling(orders: &[usize], reps: usize) -> Scaling {
    let unknowns: Vec<f64> = orders.iter().map(|&k| 3.0 * (k + 1) as f64).collect();
    let seconds: Vec<f64> = orders.iter().map(|&k| median_time(reps, || lorenz_interval_solve(k))).collect();
    let (exponent, _) = fit_power_law(&unknowns, &seconds);
    Scaling { unknowns, seconds, exponent }
}
