//! Truncated Chebyshev series in time and the spectral operators built on them.
//!
//! Coefficients use the halved-zeroth convention throughout:
//!
//! ```text
//! f(τ) = a_0/2 + Σ_{k=1..K} a_k T_k(τ),    τ = (t − A_t) / B_t
//! ```
//!
//! with `A_t = (t1 + t0)/2` and `B_t = (t1 − t0)/2`. A [`ChebSeries`] carries
//! one such row of coefficients per state variable.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack (in units of τ) tolerated when mapping a time that is a rounding
/// error outside an interval.
const UNIT_SLACK: f64 = 1e-12;

/// A closed time interval `[t0, t1]` with `t1 > t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    t0: f64,
    t1: f64,
}

impl Interval {
    pub fn new(t0: f64, t1: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(Error::Domain(format!("invalid interval [{t0}, {t1}]")));
        }
        Ok(Self { t0, t1 })
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t1
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t1 + self.t0)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.t1 - self.t0)
    }

    pub fn length(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn contains(&self, t: f64) -> bool {
        self.to_unit_unchecked(t).abs() <= 1.0 + UNIT_SLACK
    }

    /// Maps `t` onto the unit interval, rejecting points outside `[t0, t1]`.
    pub fn to_unit(&self, t: f64) -> Result<f64> {
        if t == self.t0 {
            return Ok(-1.0);
        }
        if t == self.t1 {
            return Ok(1.0);
        }
        let tau = self.to_unit_unchecked(t);
        if !(tau.abs() <= 1.0 + UNIT_SLACK) {
            return Err(Error::Domain(format!(
                "t = {t} outside interval [{}, {}]",
                self.t0, self.t1
            )));
        }
        Ok(tau.clamp(-1.0, 1.0))
    }

    fn to_unit_unchecked(&self, t: f64) -> f64 {
        (t - self.midpoint()) / self.half_width()
    }

    pub fn from_unit(&self, tau: f64) -> f64 {
        if tau == -1.0 {
            self.t0
        } else if tau == 1.0 {
            self.t1
        } else {
            self.midpoint() + self.half_width() * tau
        }
    }
}

/// `τ = (t − A_t)/B_t` for `t` in `iv`.
pub fn map_to_interval(t: f64, iv: &Interval) -> Result<f64> {
    iv.to_unit(t)
}

/// Correctly rounded sum (Shewchuk's partials, as in Python's `math.fsum`).
pub(crate) fn exact_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in terms {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut hi) = partials.pop() else {
        return 0.0;
    };
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // Round half-even on the full remaining tail, not just `lo`.
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = 2.0 * lo;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

/// Signed terms of the series at `τ = -1`.
pub(crate) fn start_terms(r: &[f64]) -> impl Iterator<Item = f64> + '_ {
    r.iter().enumerate().map(|(k, &v)| match k {
        0 => 0.5 * v,
        k if k % 2 == 1 => -v,
        _ => v,
    })
}

pub(crate) fn start_sum(r: &[f64]) -> f64 {
    exact_sum(start_terms(r))
}

fn end_sum(r: &[f64]) -> f64 {
    exact_sum(r.iter().enumerate().map(|(k, &v)| if k == 0 { 0.5 * v } else { v }))
}

fn eval_row(r: &[f64], tau: f64) -> f64 {
    if tau == -1.0 {
        start_sum(r)
    } else if tau == 1.0 {
        end_sum(r)
    } else {
        clenshaw(r, tau)
    }
}

/// Evaluates `a_0/2 + Σ a_k T_k(x)` by Clenshaw's recurrence.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let Some((&c0, rest)) = coeffs.split_first() else {
        return 0.0;
    };
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in rest.iter().rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    0.5 * c0 + x * b1 - b2
}

/// Gauss–Lobatto points on `[-1, 1]` in ascending order, endpoints exact.
pub fn lobatto_points(order: usize) -> Vec<f64> {
    assert!(order >= 1, "Lobatto grid needs order >= 1");
    (0..=order)
        .map(|j| {
            if j == 0 {
                -1.0
            } else if j == order {
                1.0
            } else if 2 * j == order {
                0.0
            } else {
                -(PI * j as f64 / order as f64).cos()
            }
        })
        .collect()
}

/// The `K + 1` Lobatto collocation times of `iv`, ascending, endpoints exact.
pub fn lobatto_nodes(order: usize, iv: &Interval) -> Vec<f64> {
    lobatto_points(order).into_iter().map(|tau| iv.from_unit(tau)).collect()
}

/// Precomputed node-to-coefficient and coefficient-to-node matrices for one order.
///
/// `eval` maps halved-convention coefficients to values at the ascending
/// Lobatto points; `fit` is its inverse (discrete Chebyshev transform with
/// half-weighted endpoints).
#[derive(Debug, Clone)]
pub struct ChebTransform {
    order: usize,
    points: Vec<f64>,
    eval: Vec<f64>,
    fit: Vec<f64>,
}

impl ChebTransform {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "transform needs order >= 1");
        let n = order + 1;
        let points = lobatto_points(order);
        // T_k at node j, where node j sits at angle θ = π(K − j)/K.
        let cheb = |k: usize, j: usize| -> f64 {
            let m = (k * (order - j)) % (2 * order);
            match m {
                0 => 1.0,
                m if m == order => -1.0,
                m if 2 * m == order || 2 * m == 3 * order => 0.0,
                m => (PI * m as f64 / order as f64).cos(),
            }
        };
        let mut eval = vec![0.0; n * n];
        let mut fit = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let tk = cheb(k, j);
                eval[j * n + k] = if k == 0 { 0.5 * tk } else { tk };
                let mut w = 2.0 / order as f64;
                if j == 0 || j == order {
                    w *= 0.5;
                }
                if k == order {
                    w *= 0.5;
                }
                fit[k * n + j] = w * tk;
            }
        }
        Self { order, points, eval, fit }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Row-major `(K+1) × (K+1)` matrix, node index first.
    pub fn eval_matrix(&self) -> &[f64] {
        &self.eval
    }

    /// Row-major `(K+1) × (K+1)` matrix, coefficient index first.
    pub fn fit_matrix(&self) -> &[f64] {
        &self.fit
    }

    pub fn values(&self, coeffs: &[f64]) -> Vec<f64> {
        mat_vec(&self.eval, coeffs)
    }

    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        mat_vec(&self.fit, values)
    }
}

fn mat_vec(m: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    debug_assert_eq!(m.len(), n * n);
    m.chunks_exact(n)
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Coefficients of `∫_{-1}^{τ} f dτ'` (order K+1) from those of `f` (order K),
/// scaled by `scale` (use `B_t` for integration in time).
pub(crate) fn integrate_coeffs(c: &[f64], scale: f64) -> Vec<f64> {
    let k_max = c.len();
    let at = |k: usize| c.get(k).copied().unwrap_or(0.0);
    let mut out = vec![0.0; k_max + 1];
    for k in 1..=k_max {
        out[k] = scale * (at(k - 1) - at(k + 1)) / (2.0 * k as f64);
    }
    anchor_start(&mut out);
    out
}

/// Sets the zeroth coefficient so that the series vanishes at τ = −1.
pub(crate) fn anchor_start(c: &mut [f64]) {
    let alt: f64 = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
        .sum();
    c[0] = -2.0 * alt;
}

/// Coefficients of `df/dτ` (order K−1), divided by `scale`.
pub(crate) fn differentiate_coeffs(c: &[f64], scale: f64) -> Vec<f64> {
    let k_max = c.len() - 1;
    if k_max == 0 {
        return vec![0.0];
    }
    let mut d = vec![0.0; k_max + 2];
    for k in (1..=k_max).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
    }
    d.truncate(k_max);
    d.iter_mut().for_each(|v| *v /= scale);
    d
}

/// A truncated Chebyshev expansion of an `N`-dimensional function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRecord", into = "SeriesRecord")]
pub struct ChebSeries {
    interval: Interval,
    dim: usize,
    order: usize,
    /// Row-major `dim × (order + 1)`.
    coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn new(interval: Interval, dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("series dimension must be positive".into()));
        }
        let expected = dim * (order + 1);
        if coeffs.len() != expected {
            return Err(Error::Shape { expected, got: coeffs.len() });
        }
        if let Some(bad) = coeffs.iter().find(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { interval, dim, order, coeffs })
    }

    pub fn from_rows(interval: Interval, rows: &[Vec<f64>]) -> Result<Self> {
        let order = rows
            .first()
            .map(|r| r.len())
            .filter(|&l| l > 0)
            .ok_or_else(|| Error::Domain("empty coefficient rows".into()))?
            - 1;
        let mut coeffs = Vec::with_capacity(rows.len() * (order + 1));
        for r in rows {
            if r.len() != order + 1 {
                return Err(Error::Shape { expected: order + 1, got: r.len() });
            }
            coeffs.extend_from_slice(r);
        }
        Self::new(interval, rows.len(), order, coeffs)
    }

    /// The constant series equal to `state` everywhere.
    pub fn constant(interval: Interval, order: usize, state: &[f64]) -> Self {
        let n = order + 1;
        let mut coeffs = vec![0.0; state.len() * n];
        for (i, v) in state.iter().enumerate() {
            coeffs[i * n] = 2.0 * v;
        }
        Self { interval, dim: state.len(), order, coeffs }
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient row of variable `var`.
    pub fn row(&self, var: usize) -> &[f64] {
        let n = self.order + 1;
        &self.coeffs[var * n..(var + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coeffs.chunks_exact(self.order + 1)
    }

    /// Value of every variable at time `t`, by Clenshaw's recurrence.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let tau = self.interval.to_unit(t)?;
        Ok(self.eval_unit(tau))
    }

    pub fn eval_var(&self, var: usize, t: f64) -> Result<f64> {
        let tau = self.interval.to_unit(t)?;
        Ok(eval_row(self.row(var), tau))
    }

    /// Evaluation at a point already mapped to `[-1, 1]`.
    ///
    /// The endpoints use the same sums as [`start_value`](Self::start_value)
    /// and [`end_value`](Self::end_value), so adjacent pieces agree bit for bit.
    pub fn eval_unit(&self, tau: f64) -> Vec<f64> {
        self.rows().map(|r| eval_row(r, tau)).collect()
    }

    /// Value at `t0`, from the alternating coefficient sum.
    pub fn start_value(&self) -> Vec<f64> {
        self.rows().map(start_sum).collect()
    }

    /// Value at `t1`, from the plain coefficient sum.
    pub fn end_value(&self) -> Vec<f64> {
        self.rows().map(end_sum).collect()
    }

    /// `g(t) = ∫_{t0}^{t} f(t') dt'`, one order higher than `self`.
    pub fn integrate_from_start(&self) -> ChebSeries {
        let scale = self.interval.half_width();
        let coeffs = self.rows().flat_map(|r| integrate_coeffs(r, scale)).collect();
        ChebSeries { interval: self.interval, dim: self.dim, order: self.order + 1, coeffs }
    }

    /// `df/dt`, one order lower than `self` (a constant maps to a zero constant).
    pub fn differentiate(&self) -> ChebSeries {
        let scale = self.interval.half_width();
        let coeffs: Vec<f64> = self.rows().flat_map(|r| differentiate_coeffs(r, scale)).collect();
        let order = coeffs.len() / self.dim - 1;
        ChebSeries { interval: self.interval, dim: self.dim, order, coeffs }
    }

    /// Drops (or zero-pads) modes so the result has exactly `order`.
    pub fn with_order(&self, order: usize) -> ChebSeries {
        let n = order + 1;
        let mut coeffs = vec![0.0; self.dim * n];
        for (i, r) in self.rows().enumerate() {
            let m = r.len().min(n);
            coeffs[i * n..i * n + m].copy_from_slice(&r[..m]);
        }
        ChebSeries { interval: self.interval, dim: self.dim, order, coeffs }
    }

    /// Variable-wise product truncated at `order`, using
    /// `T_m T_n = (T_{m+n} + T_{|m−n|}) / 2`.
    pub fn multiply(&self, other: &ChebSeries, order: usize) -> Result<ChebSeries> {
        if self.interval != other.interval {
            return Err(Error::Domain("series live on different intervals".into()));
        }
        if self.dim != other.dim {
            return Err(Error::Shape { expected: self.dim, got: other.dim });
        }
        let n = order + 1;
        let mut coeffs = vec![0.0; self.dim * n];
        for (i, (ra, rb)) in self.rows().zip(other.rows()).enumerate() {
            let full = |r: &[f64], k: usize| if k == 0 { 0.5 * r[0] } else { r[k] };
            let out = &mut coeffs[i * n..(i + 1) * n];
            for m in 0..ra.len() {
                let am = full(ra, m);
                if am == 0.0 {
                    continue;
                }
                for (k, _) in rb.iter().enumerate() {
                    let p = 0.5 * am * full(rb, k);
                    if m + k < n {
                        out[m + k] += p;
                    }
                    let d = m.abs_diff(k);
                    if d < n {
                        out[d] += p;
                    }
                }
            }
            out[0] *= 2.0;
        }
        Ok(ChebSeries { interval: self.interval, dim: self.dim, order, coeffs })
    }

    /// `(|a_{K−1}| + |a_K|) / (|a_0| + |a_1|)` per variable; `+∞` when the
    /// denominator vanishes.
    pub fn tail_ratio(&self) -> Vec<f64> {
        self.rows().map(tail_ratio_of).collect()
    }

    pub fn max_tail_ratio(&self) -> f64 {
        self.tail_ratio().into_iter().fold(0.0, f64::max)
    }
}

fn tail_ratio_of(r: &[f64]) -> f64 {
    let k = r.len() - 1;
    let head = r[0].abs() + r.get(1).map_or(0.0, |v| v.abs());
    let tail = r[k].abs() + if k >= 1 { r[k - 1].abs() } else { 0.0 };
    if tail == 0.0 {
        0.0
    } else if head == 0.0 {
        f64::INFINITY
    } else {
        tail / head
    }
}

/// Discrete Chebyshev transform of samples taken at `lobatto_nodes(K, iv)`.
///
/// `samples[i]` holds the `K + 1` node values of variable `i`.
pub fn fit(samples: &[Vec<f64>], iv: &Interval) -> Result<ChebSeries> {
    let n = samples
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Domain("no variables to fit".into()))?;
    if n < 2 {
        return Err(Error::Shape { expected: 2, got: n });
    }
    let tr = ChebTransform::new(n - 1);
    let mut coeffs = Vec::with_capacity(samples.len() * n);
    for s in samples {
        if s.len() != n {
            return Err(Error::Shape { expected: n, got: s.len() });
        }
        coeffs.extend(tr.coefficients(s));
    }
    ChebSeries::new(*iv, samples.len(), n - 1, coeffs)
}

/// Samples `f` at the Lobatto nodes of `iv` and fits it at order `order`.
pub fn fit_fn<F>(order: usize, iv: &Interval, dim: usize, mut f: F) -> Result<ChebSeries>
where
    F: FnMut(f64) -> Vec<f64>,
{
    let nodes = lobatto_nodes(order, iv);
    let mut samples = vec![Vec::with_capacity(order + 1); dim];
    for t in nodes {
        let v = f(t);
        if v.len() != dim {
            return Err(Error::Shape { expected: dim, got: v.len() });
        }
        for (s, x) in samples.iter_mut().zip(v) {
            s.push(x);
        }
    }
    fit(&samples, iv)
}

#[derive(Serialize, Deserialize)]
struct SeriesRecord {
    t0: f64,
    t1: f64,
    dim: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<SeriesRecord> for ChebSeries {
    type Error = Error;

    fn try_from(r: SeriesRecord) -> Result<Self> {
        ChebSeries::new(Interval::new(r.t0, r.t1)?, r.dim, r.order, r.coeffs)
    }
}

impl From<ChebSeries> for SeriesRecord {
    fn from(s: ChebSeries) -> Self {
        SeriesRecord {
            t0: s.interval.t0,
            t1: s.interval.t1,
            dim: s.dim,
            order: s.order,
            coeffs: s.coeffs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit() -> Interval {
        Interval::new(-1.0, 1.0).unwrap()
    }

    fn series(c: &[f64], iv: Interval) -> ChebSeries {
        ChebSeries::from_rows(iv, &[c.to_vec()]).unwrap()
    }

    #[test]
    fn exact_sum_is_correctly_rounded() {
        assert_eq!(exact_sum([1e16, 1.0, -1e16]), 1.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum([1.0, 1e-16, 1e-16]), 1.0 + 2e-16);
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn maps_to_unit_interval() {
        let iv = Interval::new(0.0, 10.0).unwrap();
        assert_eq!(map_to_interval(0.0, &iv).unwrap(), -1.0);
        assert_eq!(map_to_interval(5.0, &iv).unwrap(), 0.0);
        assert_eq!(map_to_interval(7.5, &iv).unwrap(), 0.5);
        assert_eq!(map_to_interval(10.0, &iv).unwrap(), 1.0);
        assert!(matches!(map_to_interval(10.5, &iv), Err(Error::Domain(_))));
        assert!(Interval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn clenshaw_examples() {
        assert_eq!(series(&[2.0], unit()).eval(0.37).unwrap(), vec![1.0]);
        assert_abs_diff_eq!(series(&[0.0, 1.0], unit()).eval(0.3).unwrap()[0], 0.3);
        assert_abs_diff_eq!(series(&[0.0, 0.0, 1.0], unit()).eval(0.5).unwrap()[0], -0.5);
    }

    #[test]
    fn node_grids() {
        assert_eq!(lobatto_nodes(1, &unit()), vec![-1.0, 1.0]);
        assert_eq!(lobatto_nodes(2, &unit()), vec![-1.0, 0.0, 1.0]);
        assert_eq!(lobatto_nodes(2, &Interval::new(0.0, 4.0).unwrap()), vec![0.0, 2.0, 4.0]);
        let n = lobatto_nodes(7, &Interval::new(3.0, 5.0).unwrap());
        assert!(n.windows(2).all(|w| w[0] < w[1]));
        assert_eq!((n[0], n[7]), (3.0, 5.0));
    }

    #[test]
    fn fit_examples() {
        let s = fit_fn(4, &unit(), 1, |t| vec![t * t]).unwrap();
        for (a, b) in s.row(0).iter().zip([1.0, 0.0, 0.5, 0.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let s = fit_fn(5, &Interval::new(2.0, 3.0).unwrap(), 1, |_| vec![-1.25]).unwrap();
        assert_abs_diff_eq!(s.row(0)[0], -2.5, epsilon = 1e-15);
        assert!(s.row(0)[1..].iter().all(|c| c.abs() < 1e-15));
        assert!(matches!(
            fit(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0]], &unit()),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn integration_examples() {
        let g = series(&[2.0], unit()).integrate_from_start();
        assert_eq!(g.row(0), &[2.0, 1.0]);
        let g = series(&[0.0, 1.0], unit()).integrate_from_start();
        assert_eq!(g.row(0), &[-0.5, 0.0, 0.25]);
        let g = series(&[2.0], Interval::new(0.0, 4.0).unwrap()).integrate_from_start();
        assert_eq!(g.row(0), &[4.0, 2.0]);
    }

    #[test]
    fn differentiation_examples() {
        assert_eq!(series(&[2.0, 1.0], unit()).differentiate().row(0), &[2.0]);
        let d = series(&[3.0], unit()).differentiate();
        assert_eq!((d.order(), d.row(0)), (0, &[0.0][..]));
        let iv = unit();
        let f = fit_fn(16, &iv, 1, |t| vec![t.exp()]).unwrap();
        let d = f.differentiate();
        for i in 0..=20 {
            let t = -1.0 + 0.1 * i as f64;
            assert_abs_diff_eq!(d.eval(t).unwrap()[0], t.exp(), epsilon = 1e-9);
        }
    }

    #[test]
    fn product_examples() {
        let t1 = series(&[0.0, 1.0], unit());
        assert_eq!(t1.multiply(&t1, 2).unwrap().row(0), &[1.0, 0.0, 0.5]);
        let x = series(&[0.3, -1.0, 0.25], unit());
        let one = series(&[2.0], unit());
        assert_eq!(x.multiply(&one, 2).unwrap(), x);
        let t2 = series(&[0.0, 0.0, 1.0], unit());
        assert_eq!(t2.multiply(&t2, 3).unwrap().row(0), &[1.0, 0.0, 0.0, 0.0]);
        let other = series(&[2.0], Interval::new(0.0, 1.0).unwrap());
        assert!(matches!(x.multiply(&other, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn tail_ratio_examples() {
        let r = series(&[2.0, 1.0, 0.01, 0.001], unit()).tail_ratio()[0];
        assert_abs_diff_eq!(r, 0.011 / 3.0, epsilon = 1e-16);
        assert_eq!(series(&[2.0, 0.0, 0.0, 0.0], unit()).tail_ratio()[0], 0.0);
        assert_eq!(series(&[0.0, 0.0, 1.0, 1.0], unit()).tail_ratio()[0], f64::INFINITY);
        assert_eq!(series(&[0.0; 4], unit()).tail_ratio()[0], 0.0);
    }

    #[test]
    fn endpoint_values_match_eval() {
        let s = series(&[0.7, -0.2, 0.05, 0.3], Interval::new(1.0, 2.5).unwrap());
        assert_abs_diff_eq!(s.start_value()[0], s.eval(1.0).unwrap()[0], epsilon = 1e-15);
        assert_abs_diff_eq!(s.end_value()[0], s.eval(2.5).unwrap()[0], epsilon = 1e-15);
    }

    #[test]
    fn non_finite_coefficients_rejected() {
        assert!(ChebSeries::new(unit(), 1, 1, vec![1.0, f64::NAN]).is_err());
        assert!(matches!(ChebSeries::new(unit(), 2, 1, vec![1.0; 3]), Err(Error::Shape { .. })));
    }
}
