//! Frozen-Jacobian local Lyapunov exponents, stiff/chaotic classification,
//! extrema counting and Chebyshev mode-count estimates.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{clenshaw, lobatto_points, ChebSeries, ChebTransform};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problems::OdeProblem;

/// Monic characteristic polynomial `det(λI − J)`, highest power first:
/// `[1, c_1, …, c_N]` (Faddeev–LeVerrier).
pub fn characteristic_polynomial(j: &Matrix) -> Vec<f64> {
    let n = j.rows();
    let mut coeffs = vec![1.0];
    let mut m = Matrix::zeros(n, n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        // M_k = J·M_{k−1} + c_{k−1} I
        let mut next = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut s: f64 = (0..n).map(|l| j[(r, l)] * m[(l, c)]).sum();
                if r == c {
                    s += c_prev;
                }
                next[(r, c)] = s;
            }
        }
        let tr: f64 = (0..n).map(|r| (0..n).map(|l| j[(r, l)] * next[(l, r)]).sum::<f64>()).sum();
        c_prev = -tr / k as f64;
        coeffs.push(c_prev);
        m = next;
    }
    coeffs
}

fn horner(p: &[f64], z: Complex64) -> Complex64 {
    p.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_d(p: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &c in p {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

fn quadratic(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im)]
    }
}

fn cubic(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = 0.25 * q * q + p * p * p / 27.0;
    if disc > 0.0 {
        let s = -0.5 * q - q.signum() * disc.sqrt();
        let u = s.cbrt();
        let x = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        let r = x + shift;
        // Deflate: λ³ + aλ² + bλ + c = (λ − r)(λ² + (a + r)λ + (b + (a + r)r)).
        let [z1, z2] = quadratic(a + r, b + (a + r) * r);
        [Complex64::new(r, 0.0), z1, z2]
    } else if p == 0.0 {
        [Complex64::new(shift, 0.0); 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let third = 2.0 * std::f64::consts::PI / 3.0;
        [0.0, 1.0, 2.0].map(|k| Complex64::new(m * (theta - k * third).cos() + shift, 0.0))
    }
}

fn durand_kerner(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    let bound = 1.0 + p[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut change = 0.0f64;
        for k in 0..n {
            let denom = (0..n).filter(|&j| j != k).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[k] - z[j]));
            if denom.norm() == 0.0 {
                continue;
            }
            let step = horner(p, z[k]) / denom;
            z[k] -= step;
            change = change.max(step.norm());
        }
        if change <= 1e-15 * bound {
            break;
        }
    }
    z
}

/// Newton polish that keeps a step only when it reduces `|p|`.
fn polish(p: &[f64], z: Complex64, real: bool) -> Complex64 {
    let mut best = z;
    let mut best_val = horner(p, z).norm();
    for _ in 0..60 {
        if best_val == 0.0 {
            break;
        }
        let (v, d) = horner_d(p, best);
        if d.norm() == 0.0 {
            break;
        }
        let mut next = best - v / d;
        if real {
            next.im = 0.0;
        }
        let val = horner(p, next).norm();
        if val < best_val {
            best = next;
            best_val = val;
        } else {
            break;
        }
    }
    best
}

/// Roots of a real monic polynomial of degree ≤ 4, highest power first.
pub fn polynomial_roots(p: &[f64]) -> Result<Vec<Complex64>> {
    if p.is_empty() || p[0] != 1.0 {
        return Err(Error::Domain("polynomial must be monic".into()));
    }
    let mut p = p.to_vec();
    let mut roots = Vec::new();
    while p.len() > 1 && *p.last().expect("non-empty") == 0.0 {
        p.pop();
        roots.push(Complex64::new(0.0, 0.0));
    }
    let seeds: Vec<Complex64> = match p.len() - 1 {
        0 => Vec::new(),
        1 => vec![Complex64::new(-p[1], 0.0)],
        2 => quadratic(p[1], p[2]).to_vec(),
        3 => cubic(p[1], p[2], p[3]).to_vec(),
        4 => durand_kerner(&p),
        d => return Err(Error::Unsupported(format!("degree {d} polynomial roots"))),
    };
    let scale = 1.0 + p[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = 1e-10 * scale;
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for z in seeds {
        let z = polish(&p, z, z.im == 0.0);
        if z.im.abs() <= tol {
            reals.push(polish(&p, Complex64::new(z.re, 0.0), true));
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    if upper.len() == lower.len() {
        // Pair each root with its nearest conjugate and symmetrise.
        for z in upper {
            let (idx, _) = lower
                .iter()
                .enumerate()
                .map(|(i, w)| (i, (w.conj() - z).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("equal counts");
            let w = lower.swap_remove(idx);
            let avg = Complex64::new(0.5 * (z.re + w.re), 0.5 * (z.im - w.im));
            roots.push(avg);
            roots.push(avg.conj());
        }
    } else {
        roots.extend(upper);
        roots.extend(lower);
    }
    roots.extend(reals);
    Ok(roots)
}

fn sort_eigenvalues(v: &mut [Complex64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// Eigenvalues of a real `N × N` matrix (`N ≤ 4`), descending real part.
pub fn eigenvalues_small(j: &Matrix) -> Result<Vec<Complex64>> {
    let n = j.rows();
    if n == 0 || j.cols() != n {
        return Err(Error::Shape { expected: n.max(1), got: j.cols() });
    }
    if !j.is_finite() {
        return Err(Error::Domain("non-finite matrix entry".into()));
    }
    if n > 4 {
        return Err(Error::Unsupported(format!("{n}×{n} eigenproblem (at most 4×4)")));
    }
    let s = j.norm_inf();
    if s == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let scaled = Matrix::from_row_major(n, n, j.as_slice().iter().map(|v| v / s).collect());
    let mut roots: Vec<Complex64> =
        polynomial_roots(&characteristic_polynomial(&scaled))?.into_iter().map(|z| z * s).collect();
    sort_eigenvalues(&mut roots);
    Ok(roots)
}

fn solve_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>, floor: f64) -> Vec<Complex64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| a[x][k].norm().total_cmp(&a[y][k].norm())).expect("non-empty");
        a.swap(k, p);
        b.swap(k, p);
        if a[k][k].norm() < floor {
            a[k][k] = Complex64::new(floor, 0.0);
        }
        for r in k + 1..n {
            let f = a[r][k] / a[k][k];
            if f.norm() == 0.0 {
                continue;
            }
            for c in k..n {
                let v = a[k][c];
                a[r][c] -= f * v;
            }
            let v = b[k];
            b[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let s: Complex64 = (k + 1..n).map(|c| a[k][c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

fn normalise(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let lead = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default();
    if norm == 0.0 || lead.norm() == 0.0 {
        return;
    }
    let phase = lead.conj() / lead.norm();
    v.iter_mut().for_each(|z| *z = *z * phase / norm);
}

/// `‖(J − γI)v‖₂` for a unit `v`.
pub fn eigen_residual(j: &Matrix, gamma: Complex64, v: &[Complex64]) -> f64 {
    let n = j.rows();
    (0..n)
        .map(|r| {
            let s: Complex64 = (0..n).map(|c| v[c] * j[(r, c)]).sum::<Complex64>() - gamma * v[r];
            s.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Unit eigenvector for `gamma` by inverse iteration.
pub fn eigenvector(j: &Matrix, gamma: Complex64) -> Vec<Complex64> {
    let n = j.rows();
    let scale = j.norm_inf().max(gamma.norm()).max(f64::MIN_POSITIVE);
    let shifted: Vec<Vec<Complex64>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| Complex64::new(j[(r, c)], 0.0) - if r == c { gamma } else { Complex64::new(0.0, 0.0) })
                .collect()
        })
        .collect();
    let mut v: Vec<Complex64> = (0..n).map(|k| Complex64::new(1.0 / (1.0 + k as f64), 0.3 * k as f64)).collect();
    normalise(&mut v);
    let mut best = v.clone();
    let mut best_res = eigen_residual(j, gamma, &v);
    for _ in 0..8 {
        v = solve_complex(shifted.clone(), v, 1e-14 * scale);
        normalise(&mut v);
        let res = eigen_residual(j, gamma, &v);
        if res < best_res {
            best = v.clone();
            best_res = res;
        }
        if best_res <= 1e-14 * scale {
            break;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Stiff,
    Chaotic,
    Both,
    Neutral,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Stiff => "stiff",
            Self::Chaotic => "chaotic",
            Self::Both => "both",
            Self::Neutral => "neutral",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub chaos_threshold: f64,
    pub stiff_threshold: f64,
    pub spread: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { chaos_threshold: 1e-8, stiff_threshold: 10.0, spread: 100.0 }
    }
}

/// Chaotic when some `Re γ` exceeds the chaos threshold; stiff when the most
/// negative real part is below `−stiff_threshold` and at least `spread` times
/// the slowest other non-negligible rate.
pub fn classify(eigs: &[Complex64], cfg: &ClassifyConfig) -> Classification {
    let chaotic = eigs.iter().any(|z| z.re > cfg.chaos_threshold);
    let fastest = eigs.iter().enumerate().min_by(|a, b| a.1.re.total_cmp(&b.1.re));
    let stiff = match fastest {
        Some((idx, z)) if z.re < -cfg.stiff_threshold => {
            let slowest = eigs
                .iter()
                .enumerate()
                .filter(|&(i, w)| i != idx && w.re.abs() > cfg.chaos_threshold)
                .map(|(_, w)| w.re.abs())
                .fold(f64::INFINITY, f64::min);
            let slow = if slowest.is_finite() { slowest } else { cfg.chaos_threshold };
            z.re.abs() / slow.max(cfg.chaos_threshold) > cfg.spread
        }
        _ => false,
    };
    match (stiff, chaotic) {
        (true, true) => Classification::Both,
        (true, false) => Classification::Stiff,
        (false, true) => Classification::Chaotic,
        (false, false) => Classification::Neutral,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LleReport {
    pub t: f64,
    pub state: Vec<f64>,
    pub jacobian: Vec<Vec<f64>>,
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    /// `|Re γ_i|·ΔT`, present when a ΔT was supplied.
    pub gamma_dt: Option<Vec<f64>>,
}

/// Frozen-Jacobian exponents of `p` at `(t, state)`.
pub fn lle(p: &OdeProblem, t: f64, state: &[f64], cfg: &ClassifyConfig, dt: Option<f64>) -> Result<LleReport> {
    if state.len() != p.dim() {
        return Err(Error::Shape { expected: p.dim(), got: state.len() });
    }
    let jac = p.jacobian(t, state);
    let eigenvalues = eigenvalues_small(&jac)?;
    let classification = classify(&eigenvalues, cfg);
    let gamma_dt = dt.map(|dt| eigenvalues.iter().map(|z| z.re.abs() * dt).collect());
    Ok(LleReport { t, state: state.to_vec(), jacobian: jac.to_rows(), eigenvalues, classification, gamma_dt })
}

/// Strict sign changes of successive differences, ignoring steps below
/// `1e-12·range` (plateaus).
pub fn count_extrema(values: &[f64]) -> Result<usize> {
    if values.len() < 3 {
        return Err(Error::Domain("need at least 3 samples".into()));
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let tol = 1e-12 * (hi - lo);
    let mut last_sign = 0.0;
    let mut count = 0;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= tol {
            continue;
        }
        let s = d.signum();
        if last_sign != 0.0 && s != last_sign {
            count += 1;
        }
        last_sign = s;
    }
    Ok(count)
}

/// `per_piece` uniformly spaced samples of one variable on each piece
/// (shared boundaries taken once).
pub fn sample_pieces(pieces: &[ChebSeries], var: usize, per_piece: usize) -> (Vec<f64>, Vec<f64>) {
    let mut times = Vec::new();
    let mut values = Vec::new();
    let per_piece = per_piece.max(1);
    for (i, piece) in pieces.iter().enumerate() {
        let row = piece.row(var);
        let first = if i == 0 { 0 } else { 1 };
        for k in first..=per_piece {
            let tau = -1.0 + 2.0 * k as f64 / per_piece as f64;
            times.push(piece.interval().from_unit(tau));
            values.push(clenshaw(row, tau));
        }
    }
    (times, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEstimate {
    pub n_e: f64,
    pub epsilon: f64,
    pub o_t: u32,
    pub k_a: usize,
}

/// Linear fit `(slope, intercept)` of the mode count for a calibrated accuracy.
pub fn mode_fit(epsilon: f64) -> Result<(f64, f64)> {
    let close = |x: f64| (epsilon - x).abs() <= 1e-9 * x;
    if close(0.01) {
        Ok((1.5, 3.5))
    } else if close(0.001) {
        Ok((1.7, 4.4))
    } else {
        Err(Error::Unsupported(format!("no mode calibration for accuracy {epsilon}")))
    }
}

/// Modes needed for `n_e` extrema at accuracy `epsilon` in a system of
/// temporal order `o_t`, rounded up.
pub fn estimate_modes(n_e: f64, epsilon: f64, o_t: u32) -> Result<ModeEstimate> {
    if !(n_e >= 0.0) {
        return Err(Error::Domain("extrema count must be non-negative".into()));
    }
    let (slope, intercept) = mode_fit(epsilon)?;
    let raw = slope * n_e + intercept + f64::from(o_t);
    let k_a = (raw - 1e-9).ceil().max(0.0) as usize;
    Ok(ModeEstimate { n_e, epsilon, o_t, k_a })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub seed: u64,
    pub epsilon: f64,
    /// Signals collected for each extrema count 1..=6.
    pub per_bucket: usize,
    /// Upper bound of the per-signal frequency scale on `τ ∈ [−1, 1]`.
    pub omega_max: f64,
    pub max_order: usize,
    pub grid: usize,
    pub max_draws: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { seed: 0, epsilon: 0.01, per_bucket: 30, omega_max: 12.0, max_order: 60, grid: 4000, max_draws: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBucket {
    pub n_e: usize,
    pub count: usize,
    pub mean_k: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub buckets: Vec<CalibrationBucket>,
    pub signals: usize,
    pub draws: usize,
}

struct Signal {
    amp: Vec<f64>,
    omega: Vec<f64>,
    phase: Vec<f64>,
}

impl Signal {
    fn random(rng: &mut ChaCha8Rng, omega_max: f64) -> Self {
        let m = rng.gen_range(2..=6);
        let scale = rng.gen_range(0.0..omega_max);
        Self {
            amp: (0..m).map(|_| rng.gen_range(0.0..1.0)).collect(),
            omega: (0..m).map(|_| scale * rng.gen_range(0.0..1.0)).collect(),
            phase: (0..m).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect(),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        self.amp.iter().zip(&self.omega).zip(&self.phase).map(|((a, w), p)| a * (w * x + p).sin()).sum()
    }
}

/// Smallest `K` whose Lobatto interpolant has max error `≤ epsilon·max|f|` on the grid.
fn minimal_order(f: &Signal, grid: &[f64], values: &[f64], epsilon: f64, max_order: usize) -> Option<usize> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (1..=max_order).find(|&k| {
        let tr = ChebTransform::new(k);
        let nodes: Vec<f64> = lobatto_points(k).iter().map(|&x| f.eval(x)).collect();
        let c = tr.coefficients(&nodes);
        grid.iter().zip(values).all(|(&x, &v)| (clenshaw(&c, x) - v).abs() <= epsilon * peak)
    })
}

/// Empirical mode counts of random aperiodic signals (sums of 2–6 sinusoids
/// with random amplitudes and phases on `[−1, 1]`), bucketed by extrema count.
pub fn calibrate_modes(cfg: &CalibrationConfig) -> Result<CalibrationReport> {
    let (slope, intercept) = mode_fit(cfg.epsilon)?;
    if cfg.per_bucket == 0 || cfg.grid < 3 {
        return Err(Error::Config("per_bucket must be positive and grid >= 3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let grid: Vec<f64> = (0..=cfg.grid).map(|i| -1.0 + 2.0 * i as f64 / cfg.grid as f64).collect();
    let mut sums = [0usize; 6];
    let mut counts = [0usize; 6];
    let mut draws = 0;
    while counts.iter().any(|&c| c < cfg.per_bucket) && draws < cfg.max_draws {
        draws += 1;
        let sig = Signal::random(&mut rng, cfg.omega_max);
        let values: Vec<f64> = grid.iter().map(|&x| sig.eval(x)).collect();
        let n_e = count_extrema(&values)?;
        if !(1..=6).contains(&n_e) || counts[n_e - 1] >= cfg.per_bucket {
            continue;
        }
        if let Some(k) = minimal_order(&sig, &grid, &values, cfg.epsilon, cfg.max_order) {
            sums[n_e - 1] += k;
            counts[n_e - 1] += 1;
        }
    }
    let buckets = (1..=6)
        .map(|n_e| {
            let count = counts[n_e - 1];
            CalibrationBucket {
                n_e,
                count,
                mean_k: if count == 0 { f64::NAN } else { sums[n_e - 1] as f64 / count as f64 },
                predicted: slope * n_e as f64 + intercept,
            }
        })
        .collect();
    Ok(CalibrationReport { buckets, signals: counts.iter().sum(), draws })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{lorenz84, robertson};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_and_rotation() {
        let d = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, -2.0, 0.0], vec![0.0, 0.0, 3.0]]);
        let e = eigenvalues_small(&d).unwrap();
        for (got, want) in e.iter().zip([3.0, 1.0, -2.0]) {
            assert_abs_diff_eq!(got.re, want, epsilon = 1e-13);
            assert_eq!(got.im, 0.0);
        }
        let r = eigenvalues_small(&Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]])).unwrap();
        assert_abs_diff_eq!(r[0].im, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1].im, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[0].re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lorenz_exponents() {
        let p = lorenz84(0.25, 4.0, 8.0, 1.0);
        let rep = lle(&p, 0.0, p.u0(), &ClassifyConfig::default(), None).unwrap();
        let want = [c(1.9, 0.0), c(-1.1, 4.5), c(-1.1, -4.5)];
        for (g, w) in rep.eigenvalues.iter().zip(want) {
            assert!((g.re - w.re).abs() <= 0.05 && (g.im - w.im).abs() <= 0.05, "{g} vs {w}");
        }
        assert_eq!(rep.classification, Classification::Chaotic);
    }

    #[test]
    fn robertson_exponents() {
        let p = robertson(0.04, 1e4, 3e7);
        let rep = lle(&p, 0.0, &[1.0, 0.0, 0.0], &ClassifyConfig::default(), Some(2.0)).unwrap();
        assert_eq!(rep.eigenvalues, vec![c(0.0, 0.0), c(0.0, 0.0), c(-0.04, 0.0)]);
        assert_eq!(rep.classification, Classification::Neutral);
        assert_eq!(rep.gamma_dt.unwrap(), vec![0.0, 0.0, 0.08]);
        let rep = lle(&p, 0.0, &[1.0, 1e-6, 0.0], &ClassifyConfig::default(), None).unwrap();
        let e = &rep.eigenvalues;
        assert!(e[0].re.abs() < 1e-9);
        assert_abs_diff_eq!(e[1].re, -0.05, epsilon = 0.005);
        assert_abs_diff_eq!(e[2].re, -60.0, epsilon = 0.5);
    }

    #[test]
    fn classification_examples() {
        let cfg = ClassifyConfig::default();
        assert_eq!(classify(&[c(0.0, 0.0), c(0.0, 0.0), c(-0.04, 0.0)], &cfg), Classification::Neutral);
        assert_eq!(classify(&[c(0.0, 0.0), c(-0.05, 0.0), c(-2400.0, 0.0)], &cfg), Classification::Stiff);
        assert_eq!(classify(&[c(1.9, 0.0), c(-1.1, 4.5), c(-1.1, -4.5)], &cfg), Classification::Chaotic);
        assert_eq!(classify(&[c(1.9, 0.0), c(-1.0, 0.0), c(-2400.0, 0.0)], &cfg), Classification::Both);
    }

    #[test]
    fn quartic_with_two_pairs() {
        // Block diagonal rotations with growth/decay: 1 ± 2i, −3 ± 0.5i.
        let j = Matrix::from_rows(&[
            vec![1.0, -2.0, 0.0, 0.0],
            vec![2.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, -3.0, 0.5],
            vec![0.0, 0.0, -0.5, -3.0],
        ]);
        let e = eigenvalues_small(&j).unwrap();
        let want = [c(1.0, 2.0), c(1.0, -2.0), c(-3.0, 0.5), c(-3.0, -0.5)];
        for (g, w) in e.iter().zip(want) {
            assert!((g - w).norm() < 1e-12, "{g} vs {w}");
            let v = eigenvector(&j, *g);
            assert!(eigen_residual(&j, *g, &v) <= 1e-8 * j.norm_inf());
        }
    }

    #[test]
    fn oversized_and_non_finite_rejected() {
        assert!(matches!(eigenvalues_small(&Matrix::identity(5)), Err(Error::Unsupported(_))));
        let bad = Matrix::from_rows(&[vec![f64::NAN]]);
        assert!(matches!(eigenvalues_small(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn extrema_examples() {
        let sin: Vec<f64> = (0..1000).map(|i| (std::f64::consts::TAU * i as f64 / 999.0).sin()).collect();
        assert_eq!(count_extrema(&sin).unwrap(), 2);
        let decay: Vec<f64> = (0..100).map(|i| (-(i as f64) / 10.0).exp()).collect();
        assert_eq!(count_extrema(&decay).unwrap(), 0);
        assert_eq!(count_extrema(&[0.0, 1.0, 1.0, 1.0, 0.0]).unwrap(), 1);
        assert!(count_extrema(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn mode_estimates() {
        assert_eq!(estimate_modes(1.0, 0.01, 0).unwrap().k_a, 5);
        assert_eq!(estimate_modes(2.0, 0.001, 0).unwrap().k_a, 8);
        assert_eq!(estimate_modes(0.72, 0.001, 3).unwrap().k_a, 9);
        assert!(matches!(estimate_modes(1.0, 0.05, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn calibration_is_reproducible() {
        let cfg = CalibrationConfig { per_bucket: 3, ..CalibrationConfig::default() };
        let a = calibrate_modes(&cfg).unwrap();
        assert_eq!(a, calibrate_modes(&cfg).unwrap());
        assert_eq!(a.signals, 18);
    }
}
