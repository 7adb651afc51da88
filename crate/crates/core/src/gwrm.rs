//! Chebyshev-in-time weighted residual solver.
//!
//! On an interval `[t0, t1]` the solution of `du/dt = F(t, u)` is sought as a
//! truncated Chebyshev series whose coefficients satisfy
//!
//! ```text
//! a = b + I_K[ fit( F(t_j, u_a(t_j)) ) ]
//! ```
//!
//! where `b` holds the initial state (`b_i0 = 2·u_i(t0)`), `fit` is the
//! Lobatto transform of the right-hand side sampled on the nodes `t_j`, and
//! `I_K` integrates from `t0` and truncates back to order `K` (re-anchoring the
//! zeroth mode so the integral still vanishes at `t0`). The whole interval is
//! solved at once by [`crate::sir`]; intervals are chained with the
//! tail-ratio accuracy monitor deciding their length.

use serde::{Deserialize, Serialize};

use crate::chebyshev::{anchor_start, exact_sum, integrate_coeffs, start_sum, start_terms, ChebSeries, ChebTransform, Interval};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problems::OdeProblem;
use crate::sir::{solve_fixed_point, FixedPointMap, SolveStats, SolverConfig};

/// How the iteration for a new interval is seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// Constant extension of the interval's initial state.
    Constant,
    /// Analytic continuation of the previous piece.
    Extrapolate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwrmConfig {
    /// Temporal order `K`.
    pub order: usize,
    /// Tail-ratio bound ε.
    pub epsilon: f64,
    pub initial_dt: f64,
    pub min_dt: f64,
    #[serde(with = "crate::serde_float")]
    pub max_dt: f64,
    pub shrink: f64,
    pub grow: f64,
    /// Grow the next interval when the tail ratio falls below `grow_threshold·ε`.
    pub grow_threshold: f64,
    pub initial_guess: InitialGuess,
    pub max_intervals: usize,
    pub solver: SolverConfig,
}

impl Default for GwrmConfig {
    fn default() -> Self {
        Self {
            order: 8,
            epsilon: 1e-3,
            initial_dt: 1e-2,
            min_dt: 1e-12,
            max_dt: f64::INFINITY,
            shrink: 0.5,
            grow: 1.5,
            grow_threshold: 0.1,
            initial_guess: InitialGuess::Constant,
            max_intervals: 100_000,
            solver: SolverConfig::default(),
        }
    }
}

impl GwrmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.order < 1 {
            return bad("order must be >= 1");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.min_dt > 0.0 && self.min_dt <= self.initial_dt && self.initial_dt <= self.max_dt) {
            return bad("need 0 < min_dt <= initial_dt <= max_dt");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0 && self.grow > 1.0) {
            return bad("need 0 < shrink < 1 < grow");
        }
        if !(self.grow_threshold > 0.0 && self.grow_threshold <= 1.0) {
            return bad("grow_threshold must lie in (0, 1]");
        }
        self.solver.validate()
    }
}

/// The coefficient map `φ` of one interval.
pub struct GwrmMap<'a> {
    problem: &'a OdeProblem,
    order: usize,
    nodes: Vec<f64>,
    transform: ChebTransform,
    /// `(K+1) × (K+1)`, row-major: node values of F to truncated integral coefficients.
    integral: Vec<f64>,
    initial: Vec<f64>,
}

impl<'a> GwrmMap<'a> {
    pub fn new(problem: &'a OdeProblem, iv: Interval, order: usize, u_start: &[f64]) -> Self {
        assert_eq!(u_start.len(), problem.dim());
        let transform = ChebTransform::new(order);
        let n = order + 1;
        let nodes: Vec<f64> = transform.points().iter().map(|&tau| iv.from_unit(tau)).collect();
        let mut integral = vec![0.0; n * n];
        let mut unit = vec![0.0; n];
        for j in 0..n {
            unit[j] = 1.0;
            let mut col = integrate_coeffs(&transform.coefficients(&unit), iv.half_width());
            col.truncate(n);
            anchor_start(&mut col);
            for (k, v) in col.into_iter().enumerate() {
                integral[k * n + j] = v;
            }
            unit[j] = 0.0;
        }
        let initial = ChebSeries::constant(iv, order, u_start).into_coeffs();
        Self { problem, order, nodes, transform, integral, initial }
    }

    /// Initial-condition coefficients `b` (`b_i0 = 2·u_i(t0)`, other modes zero).
    pub fn initial_coefficients(&self) -> &[f64] {
        &self.initial
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// State at every node: `states[j][i]`.
    fn node_states(&self, a: &[f64]) -> Vec<Vec<f64>> {
        let n = self.order + 1;
        let dim = self.problem.dim();
        let mut states = vec![vec![0.0; dim]; n];
        for i in 0..dim {
            let vals = self.transform.values(&a[i * n..(i + 1) * n]);
            for (j, v) in vals.into_iter().enumerate() {
                states[j][i] = v;
            }
        }
        states
    }
}

impl FixedPointMap for GwrmMap<'_> {
    fn apply(&self, a: &[f64]) -> Result<Vec<f64>> {
        let n = self.order + 1;
        let dim = self.problem.dim();
        if a.len() != dim * n {
            return Err(Error::Shape { expected: dim * n, got: a.len() });
        }
        let states = self.node_states(a);
        // rhs[i][j]: component i at node j.
        let mut rhs = vec![vec![0.0; n]; dim];
        let mut f = vec![0.0; dim];
        for (j, (t, u)) in self.nodes.iter().zip(&states).enumerate() {
            self.problem.rhs_into(*t, u, &mut f);
            for (i, v) in f.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Evaluation(format!("non-finite rhs at t = {t}")));
                }
                rhs[i][j] = *v;
            }
        }
        let mut out = self.initial.clone();
        for i in 0..dim {
            for k in 0..n {
                let row = &self.integral[k * n..(k + 1) * n];
                out[i * n + k] += row.iter().zip(&rhs[i]).map(|(m, v)| m * v).sum::<f64>();
            }
        }
        Ok(out)
    }

    /// Assembled from the problem Jacobian at the nodes:
    /// `∂φ_{i,k}/∂a_{m,l} = Σ_j M_{kj} J_{im}(t_j) E_{jl}`.
    fn jacobian(&self, a: &[f64]) -> Result<Matrix> {
        let n = self.order + 1;
        let dim = self.problem.dim();
        let states = self.node_states(a);
        let jacs: Vec<Matrix> =
            self.nodes.iter().zip(&states).map(|(t, u)| self.problem.jacobian(*t, u)).collect();
        if jacs.iter().any(|j| !j.is_finite()) {
            return Err(Error::Evaluation("non-finite problem Jacobian".into()));
        }
        let eval = self.transform.eval_matrix();
        let mut out = Matrix::zeros(dim * n, dim * n);
        let mut scaled = vec![0.0; n * n];
        for i in 0..dim {
            for m in 0..dim {
                if jacs.iter().all(|jac| jac[(i, m)] == 0.0) {
                    continue;
                }
                // scaled = diag(J_im(t_j)) · E
                for j in 0..n {
                    let d = jacs[j][(i, m)];
                    for l in 0..n {
                        scaled[j * n + l] = d * eval[j * n + l];
                    }
                }
                for k in 0..n {
                    let mrow = &self.integral[k * n..(k + 1) * n];
                    for l in 0..n {
                        let v: f64 = (0..n).map(|j| mrow[j] * scaled[j * n + l]).sum();
                        out[(i * n + k, m * n + l)] = v;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Builds `φ` and the initial-condition coefficients `b` for one interval.
pub fn build_map<'a>(
    problem: &'a OdeProblem,
    iv: Interval,
    order: usize,
    u_start: &[f64],
) -> (GwrmMap<'a>, Vec<f64>) {
    let map = GwrmMap::new(problem, iv, order, u_start);
    let b = map.initial.clone();
    (map, b)
}

/// Solves one interval from `guess` (row-major `N × (K+1)` coefficients).
pub fn solve_interval(
    problem: &OdeProblem,
    iv: Interval,
    order: usize,
    u_start: &[f64],
    guess: &[f64],
    solver: &SolverConfig,
) -> Result<(ChebSeries, SolveStats)> {
    let expected = problem.dim() * (order + 1);
    if guess.len() != expected {
        return Err(Error::Shape { expected, got: guess.len() });
    }
    let map = GwrmMap::new(problem, iv, order, u_start);
    let mut x = guess.to_vec();
    let mut total = SolveStats::default();
    // A converged Newton iterate already honours the initial condition up to
    // rounding; re-anchoring removes that rounding and is re-verified.
    for _ in 0..3 {
        let (sol, st) = solve_fixed_point(&map, &x, solver)?;
        total.iterations += st.iterations;
        total.jacobian_evals += st.jacobian_evals;
        total.map_evals += st.map_evals;
        x = sol;
        let n = order + 1;
        for (row, u) in x.chunks_exact_mut(n).zip(u_start) {
            reanchor(row, *u);
        }
        let fx = map.apply(&x)?;
        total.map_evals += 1;
        let res = fx.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        total.final_residual = res;
        if res <= solver.tol {
            total.converged = true;
            return Ok((ChebSeries::new(iv, problem.dim(), order, x)?, total));
        }
    }
    Err(Error::NotConverged(total))
}

/// Makes the start value of `row` sum to `u` exactly. `a_0` takes the bulk
/// of the correction; the remaining sub-ulp miss goes into the highest
/// coefficient, whose fine ulp grid lets the correctly rounded start sum land
/// on `u`.
fn reanchor(row: &mut [f64], u: f64) {
    row[0] = 2.0 * exact_sum(std::iter::once(u).chain(start_terms(row).skip(1).map(|v| -v)));
    let last = row.len() - 1;
    let sign = if last % 2 == 1 { -1.0 } else { 1.0 };
    for _ in 0..4 {
        if start_sum(row) == u {
            return;
        }
        let miss = exact_sum(std::iter::once(u).chain(start_terms(row).map(|v| -v)));
        if last == 0 {
            row[0] += 2.0 * miss;
        } else {
            row[last] += sign * miss;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Partial { reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GwrmStats {
    pub interval_count: usize,
    pub total_iterations: usize,
    pub jacobian_evals: usize,
    /// Interval solves discarded after a shrink.
    pub resolve_count: usize,
    pub tail_ratios: Vec<f64>,
}

/// Piecewise Chebyshev solution over contiguous intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GwrmSolution {
    pub pieces: Vec<ChebSeries>,
    pub stats: GwrmStats,
    pub status: RunStatus,
}

impl GwrmSolution {
    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn dim(&self) -> usize {
        self.pieces.first().map_or(0, ChebSeries::dim)
    }

    pub fn t_start(&self) -> f64 {
        self.pieces.first().map_or(f64::NAN, |p| p.interval().start())
    }

    pub fn t_end(&self) -> f64 {
        self.pieces.last().map_or(f64::NAN, |p| p.interval().end())
    }

    /// Index of the piece covering `t` (the later piece at a shared boundary).
    pub fn piece_index(&self, t: f64) -> Option<usize> {
        if self.pieces.is_empty() || t < self.t_start() || t > self.t_end() {
            return None;
        }
        let idx = self.pieces.partition_point(|p| p.interval().start() <= t);
        Some(idx.saturating_sub(1))
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let i = self.piece_index(t).ok_or_else(|| {
            Error::Domain(format!("t = {t} outside solution [{}, {}]", self.t_start(), self.t_end()))
        })?;
        self.pieces[i].eval(t)
    }

    /// Total Chebyshev modes per variable, `Σ (K_i + 1)`.
    pub fn modes_per_variable(&self) -> usize {
        self.pieces.iter().map(|p| p.order() + 1).sum()
    }

    /// Total unknown coefficients solved for, `Σ N·(K_i + 1)`.
    pub fn total_unknowns(&self) -> usize {
        self.pieces.iter().map(|p| p.dim() * (p.order() + 1)).sum()
    }

    /// Largest jump between consecutive pieces at their shared boundary.
    pub fn max_boundary_jump(&self) -> f64 {
        self.pieces
            .windows(2)
            .flat_map(|w| {
                let end = w[0].end_value();
                let start = w[1].start_value();
                end.into_iter().zip(start).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

fn extrapolated_guess(prev: &ChebSeries, iv: Interval, order: usize) -> Vec<f64> {
    let tr = ChebTransform::new(order);
    let piv = prev.interval();
    let mut out = Vec::with_capacity(prev.dim() * (order + 1));
    let taus: Vec<f64> = tr
        .points()
        .iter()
        .map(|&tau| (iv.from_unit(tau) - piv.midpoint()) / piv.half_width())
        .collect();
    for row in prev.rows() {
        let vals: Vec<f64> = taus.iter().map(|&x| crate::chebyshev::clenshaw(row, x)).collect();
        out.extend(tr.coefficients(&vals));
    }
    out
}

/// Marches over `problem.span()`, adapting interval lengths with the tail ratio.
pub fn solve_adaptive(problem: &OdeProblem, cfg: &GwrmConfig) -> Result<GwrmSolution> {
    cfg.validate()?;
    let (t_start, t_end) = problem.span();
    if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
        return Err(Error::Domain(format!("invalid span [{t_start}, {t_end}]")));
    }
    let order = cfg.order;
    let mut pieces: Vec<ChebSeries> = Vec::new();
    let mut stats = GwrmStats::default();
    let mut t = t_start;
    let mut u = problem.u0().to_vec();
    let mut dt = cfg.initial_dt.min(cfg.max_dt);
    let span = t_end - t_start;

    let partial = |pieces: Vec<ChebSeries>, mut stats: GwrmStats, reason: String| {
        stats.interval_count = pieces.len();
        Ok(GwrmSolution { pieces, stats, status: RunStatus::Partial { reason } })
    };

    while t < t_end {
        if pieces.len() >= cfg.max_intervals {
            return partial(pieces, stats, format!("interval budget {} exhausted at t = {t}", cfg.max_intervals));
        }
        let mut dt_try = dt;
        loop {
            let remaining = t_end - t;
            // Absorb a sliver at the end rather than leaving a tiny last interval.
            let last = dt_try >= remaining || remaining - dt_try < 1e-9 * span;
            let t1 = if last { t_end } else { t + dt_try };
            let iv = Interval::new(t, t1)?;
            let guess = match (cfg.initial_guess, pieces.last()) {
                (InitialGuess::Extrapolate, Some(prev)) => extrapolated_guess(prev, iv, order),
                _ => ChebSeries::constant(iv, order, &u).into_coeffs(),
            };
            let outcome = solve_interval(problem, iv, order, &u, &guess, &cfg.solver);
            let (accepted, failure) = match outcome {
                Ok((piece, st)) => {
                    stats.total_iterations += st.iterations;
                    stats.jacobian_evals += st.jacobian_evals;
                    let ratio = piece.max_tail_ratio();
                    if ratio <= cfg.epsilon {
                        (Some((piece, ratio)), String::new())
                    } else {
                        (None, format!("tail ratio {ratio:.3e} > {:.1e}", cfg.epsilon))
                    }
                }
                Err(e @ (Error::NotConverged(_)
                | Error::Divergence { .. }
                | Error::Evaluation(_)
                | Error::Singular(_))) => {
                    if let Error::NotConverged(st) = &e {
                        stats.total_iterations += st.iterations;
                        stats.jacobian_evals += st.jacobian_evals;
                    }
                    (None, e.to_string())
                }
                Err(e) => return Err(e),
            };
            match accepted {
                Some((piece, ratio)) => {
                    let used = iv.length();
                    u = piece.end_value();
                    t = t1;
                    stats.tail_ratios.push(ratio);
                    pieces.push(piece);
                    dt = if ratio < cfg.grow_threshold * cfg.epsilon {
                        (used * cfg.grow).min(cfg.max_dt)
                    } else {
                        used.min(cfg.max_dt)
                    };
                    break;
                }
                None => {
                    stats.resolve_count += 1;
                    if dt_try <= cfg.min_dt {
                        return partial(
                            pieces,
                            stats,
                            format!("interval at t = {t} failed at min_dt {:.3e}: {failure}", cfg.min_dt),
                        );
                    }
                    dt_try = (dt_try.min(t_end - t) * cfg.shrink).max(cfg.min_dt);
                }
            }
        }
    }
    stats.interval_count = pieces.len();
    Ok(GwrmSolution { pieces, stats, status: RunStatus::Completed })
}

/// Solves over the problem span on a fixed grid of `intervals` equal pieces.
pub fn solve_uniform(
    problem: &OdeProblem,
    order: usize,
    intervals: usize,
    solver: &SolverConfig,
) -> Result<GwrmSolution> {
    let (t0, t1) = problem.span();
    let h = (t1 - t0) / intervals as f64;
    let mut u = problem.u0().to_vec();
    let mut pieces = Vec::with_capacity(intervals);
    let mut stats = GwrmStats::default();
    for i in 0..intervals {
        let a = t0 + h * i as f64;
        let b = if i + 1 == intervals { t1 } else { t0 + h * (i + 1) as f64 };
        let iv = Interval::new(a, b)?;
        let guess = ChebSeries::constant(iv, order, &u).into_coeffs();
        let (piece, st) = solve_interval(problem, iv, order, &u, &guess, solver)?;
        stats.total_iterations += st.iterations;
        stats.jacobian_evals += st.jacobian_evals;
        stats.tail_ratios.push(piece.max_tail_ratio());
        u = piece.end_value();
        pieces.push(piece);
    }
    stats.interval_count = pieces.len();
    Ok(GwrmSolution { pieces, stats, status: RunStatus::Completed })
}
