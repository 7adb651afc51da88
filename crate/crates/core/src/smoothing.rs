//! Steepness metric and smoothing transforms.
//!
//! * TI: solve for `v = ∫u + A·t` through the first-order system
//!   `v' = w`, `w' = F(t, w − A)`; `u` is recovered by differentiation and the
//!   long-time average is `W(t) = (v − A·t)/t`.
//! * LTA: solve the double-integral equation `Z = u0·t + ∫∫ F(Z')` for `Z`
//!   directly in coefficient space.
//! * TA: evolve the running average `U(t) = (1/2Δ)∫_{t−Δ}^{t+Δ} u` through the
//!   doubled system in `P = U'` and the two-point mean `V`.

use serde::{Deserialize, Serialize};

use crate::chebyshev::{anchor_start, differentiate_coeffs, integrate_coeffs, ChebSeries, ChebTransform, Interval};
use crate::error::{Error, Result};
use crate::gwrm::{solve_adaptive, GwrmConfig, GwrmSolution, GwrmStats, RunStatus};
use crate::linalg::Matrix;
use crate::problems::OdeProblem;
use crate::sir::{solve_fixed_point, FixedPointMap, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteepnessReport {
    /// `max|du/dt| / ((u_max − u_min)/T)`.
    pub s: f64,
    pub argmax_t: f64,
    pub u_max: f64,
    pub u_min: f64,
}

fn report(max_slope: f64, argmax_t: f64, u_max: f64, u_min: f64, length: f64) -> Result<SteepnessReport> {
    let range = u_max - u_min;
    // Rounding noise in a fitted constant is not a range.
    if !(range > 64.0 * f64::EPSILON * u_max.abs().max(u_min.abs())) {
        return Err(Error::Degenerate("steepness of a constant function".into()));
    }
    Ok(SteepnessReport { s: max_slope * length / range, argmax_t, u_max, u_min })
}

struct Scan {
    max_slope: f64,
    argmax_t: f64,
    u_max: f64,
    u_min: f64,
}

impl Scan {
    fn new() -> Self {
        Self { max_slope: 0.0, argmax_t: f64::NAN, u_max: f64::NEG_INFINITY, u_min: f64::INFINITY }
    }

    fn series(&mut self, series: &ChebSeries, var: usize) -> Result<()> {
        if var >= series.dim() {
            return Err(Error::Shape { expected: series.dim(), got: var });
        }
        let iv = *series.interval();
        let row = series.row(var);
        let deriv = differentiate_coeffs(row, iv.half_width());
        let points = 1000 * series.order().max(1);
        for j in 0..=points {
            let tau = -1.0 + 2.0 * j as f64 / points as f64;
            let u = crate::chebyshev::clenshaw(row, tau);
            let slope = crate::chebyshev::clenshaw(&deriv, tau).abs();
            self.u_max = self.u_max.max(u);
            self.u_min = self.u_min.min(u);
            if slope > self.max_slope || self.argmax_t.is_nan() {
                self.max_slope = slope;
                self.argmax_t = iv.from_unit(tau);
            }
        }
        Ok(())
    }
}

/// Steepness of one variable of a single series, sampled on `1000·K` points.
pub fn steepness(series: &ChebSeries, var: usize) -> Result<SteepnessReport> {
    let mut scan = Scan::new();
    scan.series(series, var)?;
    report(scan.max_slope, scan.argmax_t, scan.u_max, scan.u_min, series.interval().length())
}

/// Steepness over all pieces of a piecewise solution.
pub fn steepness_piecewise(pieces: &[ChebSeries], var: usize) -> Result<SteepnessReport> {
    let (first, last) = match (pieces.first(), pieces.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Degenerate("no pieces".into())),
    };
    let mut scan = Scan::new();
    for p in pieces {
        scan.series(p, var)?;
    }
    let length = last.interval().end() - first.interval().start();
    report(scan.max_slope, scan.argmax_t, scan.u_max, scan.u_min, length)
}

/// Steepness of a sampled trajectory using slopes between successive samples.
pub fn steepness_sampled(times: &[f64], values: &[f64]) -> Result<SteepnessReport> {
    if times.len() != values.len() {
        return Err(Error::Shape { expected: times.len(), got: values.len() });
    }
    if times.len() < 2 {
        return Err(Error::Degenerate("need at least two samples".into()));
    }
    let mut scan = Scan::new();
    for (&u, _) in values.iter().zip(times) {
        scan.u_max = scan.u_max.max(u);
        scan.u_min = scan.u_min.min(u);
    }
    for (t, u) in times.windows(2).zip(values.windows(2)) {
        let dt = t[1] - t[0];
        if !(dt > 0.0) {
            return Err(Error::Domain("sample times must be strictly increasing".into()));
        }
        let slope = ((u[1] - u[0]) / dt).abs();
        if slope > scan.max_slope || scan.argmax_t.is_nan() {
            scan.max_slope = slope;
            scan.argmax_t = 0.5 * (t[0] + t[1]);
        }
    }
    report(scan.max_slope, scan.argmax_t, scan.u_max, scan.u_min, times[times.len() - 1] - times[0])
}

/// Contiguous series pieces evaluated as one function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSeries {
    pub pieces: Vec<ChebSeries>,
}

impl PiecewiseSeries {
    pub fn t_start(&self) -> f64 {
        self.pieces.first().map_or(f64::NAN, |p| p.interval().start())
    }

    pub fn t_end(&self) -> f64 {
        self.pieces.last().map_or(f64::NAN, |p| p.interval().end())
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if self.pieces.is_empty() || t < self.t_start() || t > self.t_end() {
            return Err(Error::Domain(format!("t = {t} outside [{}, {}]", self.t_start(), self.t_end())));
        }
        let idx = self.pieces.partition_point(|p| p.interval().start() <= t).saturating_sub(1);
        self.pieces[idx].eval(t)
    }
}

/// TI transform: state `(v, w)` with `v(t0) = 0`, `w(t0) = u0 + A`.
pub fn transform_ti(p: &OdeProblem, offset: &[f64]) -> Result<OdeProblem> {
    let n = p.dim();
    if offset.len() != n {
        return Err(Error::Shape { expected: n, got: offset.len() });
    }
    let a = offset.to_vec();
    let mut u0 = vec![0.0; 2 * n];
    for i in 0..n {
        u0[n + i] = p.u0()[i] + a[i];
    }
    let labels: Vec<String> = p
        .labels()
        .iter()
        .map(|l| format!("v_{l}"))
        .chain(p.labels().iter().map(|l| format!("w_{l}")))
        .collect();
    let (inner, a_rhs) = (p.clone(), a.clone());
    let (inner_j, a_j) = (p.clone(), a);
    let (t0, t1) = p.span();
    Ok(OdeProblem::new(format!("{}-ti", p.name()), u0, (t0, t1), move |t, s, ds| {
        let (v_dot, w_dot) = ds.split_at_mut(n);
        v_dot.copy_from_slice(&s[n..]);
        let u: Vec<f64> = s[n..].iter().zip(&a_rhs).map(|(w, a)| w - a).collect();
        inner.rhs_into(t, &u, w_dot);
    })
    .with_jacobian(move |t, s| {
        let u: Vec<f64> = s[n..].iter().zip(&a_j).map(|(w, a)| w - a).collect();
        let jf = inner_j.jacobian(t, &u);
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
            for m in 0..n {
                j[(n + i, n + m)] = jf[(i, m)];
            }
        }
        j
    })
    .with_labels(labels)
    .with_params(p.params().clone())
    .with_abs_scale(p.abs_scale()))
}

/// Chooses `A = −(u(t0 + horizon) − u0)/horizon` from a coarse solve.
pub fn ti_auto_offset(p: &OdeProblem, horizon: f64) -> Result<Vec<f64>> {
    let (t0, t1) = p.span();
    if !(horizon > 0.0) {
        return Err(Error::Domain("horizon must be positive".into()));
    }
    let horizon = horizon.min(t1 - t0);
    let coarse = p.clone().with_span(t0, t0 + horizon);
    let cfg = GwrmConfig { order: 8, epsilon: 1e-3, initial_dt: horizon / 4.0, ..GwrmConfig::default() };
    let sol = solve_adaptive(&coarse, &cfg)?;
    if !sol.is_complete() {
        return Err(Error::Degenerate("coarse pre-solve did not reach the horizon".into()));
    }
    let end = sol.eval(sol.t_end())?;
    let span = sol.t_end() - t0;
    Ok(end.iter().zip(p.u0()).map(|(e, s)| -(e - s) / span).collect())
}

/// `u` and the long-time average recovered from a TI solution.
#[derive(Debug, Clone)]
pub struct TiRecovery {
    /// `dv/dt − A` per piece (one order lower than the solved pieces).
    pub u: PiecewiseSeries,
    v: PiecewiseSeries,
    offset: Vec<f64>,
    u0: Vec<f64>,
}

impl TiRecovery {
    pub fn v(&self) -> &PiecewiseSeries {
        &self.v
    }

    /// `W(t) = (v(t) − A·(t − t0))/(t − t0)`; at `t0` the limit `u0`.
    pub fn long_time_average(&self, t: f64) -> Result<Vec<f64>> {
        let t0 = self.v.t_start();
        let v = self.v.eval(t)?;
        let dt = t - t0;
        if dt == 0.0 {
            return Ok(self.u0.clone());
        }
        Ok(v.iter().zip(&self.offset).map(|(v, a)| (v - a * dt) / dt).collect())
    }
}

/// Splits a `(v, w)` solution and differentiates `v` back to `u`.
pub fn recover_from_ti(solution: &GwrmSolution, offset: &[f64]) -> Result<TiRecovery> {
    let n = offset.len();
    if solution.dim() != 2 * n {
        return Err(Error::Shape { expected: 2 * n, got: solution.dim() });
    }
    let mut u_pieces = Vec::with_capacity(solution.pieces.len());
    let mut v_pieces = Vec::with_capacity(solution.pieces.len());
    for piece in &solution.pieces {
        let v_rows: Vec<Vec<f64>> = (0..n).map(|i| piece.row(i).to_vec()).collect();
        let v = ChebSeries::from_rows(*piece.interval(), &v_rows)?;
        let mut du = v.differentiate();
        let order = du.order();
        let mut rows: Vec<Vec<f64>> = du.rows().map(<[f64]>::to_vec).collect();
        for (row, a) in rows.iter_mut().zip(offset) {
            row[0] -= 2.0 * a;
        }
        du = ChebSeries::from_rows(*piece.interval(), &rows)?;
        debug_assert_eq!(du.order(), order);
        u_pieces.push(du);
        v_pieces.push(v);
    }
    let u0 = match solution.pieces.first() {
        Some(p) => p.start_value()[n..].iter().zip(offset).map(|(w, a)| w - a).collect(),
        None => return Err(Error::Degenerate("empty solution".into())),
    };
    Ok(TiRecovery {
        u: PiecewiseSeries { pieces: u_pieces },
        v: PiecewiseSeries { pieces: v_pieces },
        offset: offset.to_vec(),
        u0,
    })
}

/// Coefficient map of the double-integral equation on one interval.
struct LtaMap<'a> {
    problem: &'a OdeProblem,
    iv: Interval,
    order: usize,
    transform: ChebTransform,
    nodes: Vec<f64>,
    base: Vec<f64>,
}

impl<'a> LtaMap<'a> {
    fn new(problem: &'a OdeProblem, iv: Interval, order: usize, z_start: &[f64], u_start: &[f64]) -> Self {
        let transform = ChebTransform::new(order);
        let nodes = transform.points().iter().map(|&tau| iv.from_unit(tau)).collect();
        let n = order + 1;
        let b = iv.half_width();
        let mut base = vec![0.0; problem.dim() * n];
        for i in 0..problem.dim() {
            // z_s + u_s·(t − t_s), with t − t_s = B(1 + τ).
            base[i * n] = 2.0 * z_start[i] + 2.0 * b * u_start[i];
            if order >= 1 {
                base[i * n + 1] = b * u_start[i];
            }
        }
        Self { problem, iv, order, transform, nodes, base }
    }

    fn integrate_truncated(&self, c: &[f64]) -> Vec<f64> {
        let mut out = integrate_coeffs(c, self.iv.half_width());
        out.truncate(self.order + 1);
        anchor_start(&mut out);
        out
    }
}

impl FixedPointMap for LtaMap<'_> {
    fn apply(&self, a: &[f64]) -> Result<Vec<f64>> {
        let n = self.order + 1;
        let dim = self.problem.dim();
        if a.len() != dim * n {
            return Err(Error::Shape { expected: dim * n, got: a.len() });
        }
        let mut states = vec![vec![0.0; dim]; n];
        for i in 0..dim {
            let mut d = differentiate_coeffs(&a[i * n..(i + 1) * n], self.iv.half_width());
            d.resize(n, 0.0);
            for (j, v) in self.transform.values(&d).into_iter().enumerate() {
                states[j][i] = v;
            }
        }
        let mut rhs = vec![vec![0.0; n]; dim];
        let mut f = vec![0.0; dim];
        for (j, (t, u)) in self.nodes.iter().zip(&states).enumerate() {
            self.problem.rhs_into(*t, u, &mut f);
            for i in 0..dim {
                if !f[i].is_finite() {
                    return Err(Error::Evaluation(format!("non-finite rhs at t = {t}")));
                }
                rhs[i][j] = f[i];
            }
        }
        let mut out = self.base.clone();
        for i in 0..dim {
            let once = self.integrate_truncated(&self.transform.coefficients(&rhs[i]));
            let twice = self.integrate_truncated(&once);
            for (o, v) in out[i * n..(i + 1) * n].iter_mut().zip(twice) {
                *o += v;
            }
        }
        Ok(out)
    }
}

/// Solves for `Z(t) = u0·(t − t0) + ∫∫ F(t, dZ/dt)` on `intervals` equal pieces.
pub fn solve_lta(p: &OdeProblem, order: usize, intervals: usize, solver: &SolverConfig) -> Result<GwrmSolution> {
    if order < 2 || intervals == 0 {
        return Err(Error::Config("need order >= 2 and at least one interval".into()));
    }
    let (t0, t1) = p.span();
    let h = (t1 - t0) / intervals as f64;
    let dim = p.dim();
    let mut z = vec![0.0; dim];
    let mut u = p.u0().to_vec();
    let mut pieces = Vec::with_capacity(intervals);
    let mut stats = GwrmStats::default();
    for k in 0..intervals {
        let end = if k + 1 == intervals { t1 } else { t0 + h * (k + 1) as f64 };
        let iv = Interval::new(t0 + h * k as f64, end)?;
        let map = LtaMap::new(p, iv, order, &z, &u);
        let guess = map.base.clone();
        let (coeffs, st) = solve_fixed_point(&map, &guess, solver)?;
        stats.total_iterations += st.iterations;
        stats.jacobian_evals += st.jacobian_evals;
        let piece = ChebSeries::new(iv, dim, order, coeffs)?;
        z = piece.end_value();
        u = piece.differentiate().end_value();
        stats.tail_ratios.push(piece.max_tail_ratio());
        pieces.push(piece);
    }
    stats.interval_count = pieces.len();
    Ok(GwrmSolution { pieces, stats, status: RunStatus::Completed })
}

/// The TA system together with its synthesized initial average.
#[derive(Debug, Clone)]
pub struct TaTransform {
    /// State `(P, V)` on `[t0 + Δ, t1 − Δ]`.
    pub problem: OdeProblem,
    pub delta: f64,
    /// `U(t0 + Δ)` from quadrature of the warm-up solution.
    pub u_avg_start: Vec<f64>,
}

/// TA transform with running-average half width `delta`.
///
/// The original problem is first integrated over `[t0, t0 + 2Δ]` with
/// tolerance `warmup_tol` to obtain `u(t0)`, `u(t0 + 2Δ)` and their average.
pub fn transform_ta(p: &OdeProblem, delta: f64, warmup_tol: f64) -> Result<TaTransform> {
    let (t0, t1) = p.span();
    if !(delta > 0.0) {
        return Err(Error::Domain("delta must be positive".into()));
    }
    if t1 - t0 <= 2.0 * delta {
        return Err(Error::Domain(format!("span {} shorter than 2Δ = {}", t1 - t0, 2.0 * delta)));
    }
    let n = p.dim();
    let warm = p.clone().with_span(t0, t0 + 2.0 * delta);
    let cfg = GwrmConfig {
        order: 12,
        epsilon: warmup_tol,
        initial_dt: 2.0 * delta,
        solver: SolverConfig { tol: (warmup_tol * 1e-3).max(1e-14), ..SolverConfig::default() },
        ..GwrmConfig::default()
    };
    let sol = solve_adaptive(&warm, &cfg)?;
    if !sol.is_complete() {
        return Err(Error::Degenerate("warm-up integration did not complete".into()));
    }
    let mut integral = vec![0.0; n];
    for piece in &sol.pieces {
        for (acc, v) in integral.iter_mut().zip(piece.integrate_from_start().end_value()) {
            *acc += v;
        }
    }
    let u_first = p.u0().to_vec();
    let u_last = sol.eval(sol.t_end())?;
    let mut init = vec![0.0; 2 * n];
    for i in 0..n {
        init[i] = (u_last[i] - u_first[i]) / (2.0 * delta);
        init[n + i] = 0.5 * (u_last[i] + u_first[i]);
    }
    let u_avg_start = integral.iter().map(|v| v / (2.0 * delta)).collect();

    let labels: Vec<String> = p
        .labels()
        .iter()
        .map(|l| format!("P_{l}"))
        .chain(p.labels().iter().map(|l| format!("V_{l}")))
        .collect();
    let inner = p.clone();
    let inner_j = p.clone();
    let shifted = move |s: &[f64], sign: f64| -> Vec<f64> { (0..n).map(|i| s[n + i] + sign * delta * s[i]).collect() };
    let problem = OdeProblem::new(format!("{}-ta", p.name()), init, (t0 + delta, t1 - delta), move |t, s, ds| {
        let fp = inner.rhs(t + delta, &shifted(s, 1.0));
        let fm = inner.rhs(t - delta, &shifted(s, -1.0));
        for i in 0..n {
            ds[i] = (fp[i] - fm[i]) / (2.0 * delta);
            ds[n + i] = 0.5 * (fp[i] + fm[i]);
        }
    })
    .with_jacobian(move |t, s| {
        let jp = inner_j.jacobian(t + delta, &shifted(s, 1.0));
        let jm = inner_j.jacobian(t - delta, &shifted(s, -1.0));
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for m in 0..n {
                let (sum, diff) = (jp[(i, m)] + jm[(i, m)], jp[(i, m)] - jm[(i, m)]);
                j[(i, m)] = 0.5 * sum;
                j[(i, n + m)] = diff / (2.0 * delta);
                j[(n + i, m)] = 0.5 * delta * diff;
                j[(n + i, n + m)] = 0.5 * sum;
            }
        }
        j
    })
    .with_labels(labels)
    .with_params(p.params().clone())
    .with_abs_scale(p.abs_scale());
    Ok(TaTransform { problem, delta, u_avg_start })
}

impl TaTransform {
    /// `U(t) = U(t0 + Δ) + ∫ P`, one piece per solved piece.
    pub fn recover_average(&self, solution: &GwrmSolution) -> Result<PiecewiseSeries> {
        let n = self.u_avg_start.len();
        if solution.dim() != 2 * n {
            return Err(Error::Shape { expected: 2 * n, got: solution.dim() });
        }
        let mut level = self.u_avg_start.clone();
        let mut pieces = Vec::with_capacity(solution.pieces.len());
        for piece in &solution.pieces {
            let p_rows: Vec<Vec<f64>> = (0..n).map(|i| piece.row(i).to_vec()).collect();
            let integral = ChebSeries::from_rows(*piece.interval(), &p_rows)?.integrate_from_start();
            let mut rows: Vec<Vec<f64>> = integral.rows().map(<[f64]>::to_vec).collect();
            for (row, l) in rows.iter_mut().zip(&level) {
                row[0] += 2.0 * l;
            }
            let u = ChebSeries::from_rows(*piece.interval(), &rows)?;
            level = u.end_value();
            pieces.push(u);
        }
        Ok(PiecewiseSeries { pieces })
    }
}

/// `(1/2Δ)∫_{t−Δ}^{t+Δ} u` by adaptive Simpson quadrature to absolute tolerance 1e-10.
pub fn running_average_oracle<F>(u: F, delta: f64, t: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(delta > 0.0) {
        return Err(Error::Domain("delta must be positive".into()));
    }
    let (a, b) = (t - delta, t + delta);
    let fa = u(a)?;
    let fm = u(t)?;
    let fb = u(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let integral = simpson(&u, a, b, fa, fm, fb, whole, 1e-10 * 2.0 * delta, 50)?;
    Ok(integral / (2.0 * delta))
}

#[allow(clippy::too_many_arguments)]
fn simpson<F>(u: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (u(lm)?, u(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson(u, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson(u, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}
