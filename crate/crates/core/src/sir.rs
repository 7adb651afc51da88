//! Fixed-point solver for `x = φ(x)`.
//!
//! Three modes share one driver:
//!
//! * `Picard` iterates `x ← φ(x)`.
//! * `Newton` applies `x ← x + (I − J_φ)⁻¹ (φ(x) − x)`, refreshing `J_φ`
//!   every `jacobian_reuse` iterations.
//! * `SemiImplicit` scales the Newton step by a damping factor β, halving β
//!   whenever the residual fails to decrease and doubling it (up to 1) after
//!   each successful step. A stale Jacobian is refreshed before β is cut.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    Picard,
    Newton,
    SemiImplicit,
}

impl std::str::FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "picard" => Ok(Self::Picard),
            "newton" => Ok(Self::Newton),
            "semi_implicit" | "semi-implicit" | "sir" => Ok(Self::SemiImplicit),
            other => Err(Error::Config(format!("unknown solver mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Bound on `‖φ(x) − x‖_∞`.
    pub tol: f64,
    pub max_iters: usize,
    /// Iterations between Jacobian refreshes.
    pub jacobian_reuse: usize,
    pub damping_init: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::SemiImplicit,
            tol: 1e-10,
            max_iters: 60,
            jacobian_reuse: 3,
            damping_init: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn newton(tol: f64) -> Self {
        Self { mode: SolverMode::Newton, tol, jacobian_reuse: 1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config("solver tol must be positive".into()));
        }
        if self.max_iters == 0 || self.jacobian_reuse == 0 {
            return Err(Error::Config("max_iters and jacobian_reuse must be >= 1".into()));
        }
        if !(self.damping_init > 0.0 && self.damping_init <= 1.0) {
            return Err(Error::Config("damping_init must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub final_residual: f64,
    pub jacobian_evals: usize,
    pub map_evals: usize,
    pub converged: bool,
}

/// A map whose fixed point is sought.
pub trait FixedPointMap {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `∂φ/∂x`; finite differences unless the map knows better.
    fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        jacobian_fd(|v| self.apply(v), x)
    }
}

impl<F> FixedPointMap for F
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self(x))
    }
}

/// Forward-difference Jacobian, step `max(1e-7, 1e-7·|x_j|)` per column.
pub fn jacobian_fd<F>(phi: F, x: &[f64]) -> Result<Matrix>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let f0 = phi(x)?;
    check_finite(&f0)?;
    let mut jac = Matrix::zeros(f0.len(), x.len());
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        let h = (1e-7 * x[j].abs()).max(1e-7);
        probe[j] = x[j] + h;
        let f = phi(&probe)?;
        check_finite(&f)?;
        probe[j] = x[j];
        for (i, (a, b)) in f.iter().zip(&f0).enumerate() {
            jac[(i, j)] = (a - b) / h;
        }
    }
    Ok(jac)
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::Evaluation(format!("non-finite map value at index {i}"))),
        None => Ok(()),
    }
}

fn residual(fx: &[f64], x: &[f64]) -> (Vec<f64>, f64) {
    let r: Vec<f64> = fx.iter().zip(x).map(|(a, b)| a - b).collect();
    let norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (r, if norm.is_nan() { f64::INFINITY } else { norm })
}

fn newton_factor<M: FixedPointMap + ?Sized>(map: &M, x: &[f64]) -> Result<Lu> {
    let mut a = map.jacobian(x)?;
    if !a.is_finite() {
        return Err(Error::Evaluation("non-finite Jacobian".into()));
    }
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let d = if i == j { 1.0 } else { 0.0 };
            a[(i, j)] = d - a[(i, j)];
        }
    }
    a.lu()
}

/// Solves `x = φ(x)` from `x0`.
///
/// On success the returned point satisfies `‖φ(x) − x‖_∞ ≤ cfg.tol`.
/// Exhausting `max_iters` yields [`Error::NotConverged`]; a non-finite
/// iterate yields [`Error::Divergence`].
pub fn solve_fixed_point<M>(map: &M, x0: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveStats)>
where
    M: FixedPointMap + ?Sized,
{
    cfg.validate()?;
    let mut stats = SolveStats::default();
    let mut x = x0.to_vec();
    let mut fx = map.apply(&x)?;
    stats.map_evals += 1;
    if fx.len() != x.len() {
        return Err(Error::Shape { expected: x.len(), got: fx.len() });
    }
    let (mut r, mut res) = residual(&fx, &x);
    if !res.is_finite() {
        return Err(Error::Divergence { iterations: 0 });
    }
    let mut lu: Option<Lu> = None;
    let mut since_refresh = 0usize;
    let mut beta = cfg.damping_init;

    loop {
        stats.final_residual = res;
        if res <= cfg.tol {
            stats.converged = true;
            return Ok((x, stats));
        }
        if stats.iterations >= cfg.max_iters {
            return Err(Error::NotConverged(stats));
        }
        stats.iterations += 1;

        match cfg.mode {
            SolverMode::Picard => {
                x = fx;
                fx = map.apply(&x)?;
                stats.map_evals += 1;
                (r, res) = residual(&fx, &x);
                if !res.is_finite() {
                    return Err(Error::Divergence { iterations: stats.iterations });
                }
            }
            SolverMode::Newton | SolverMode::SemiImplicit => {
                let fresh = lu.is_none() || since_refresh >= cfg.jacobian_reuse;
                if fresh {
                    lu = Some(newton_factor(map, &x)?);
                    stats.jacobian_evals += 1;
                    since_refresh = 0;
                }
                let step = lu.as_ref().expect("factor present").solve(&r);
                since_refresh += 1;
                let damping = if cfg.mode == SolverMode::Newton { 1.0 } else { beta };
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + damping * d).collect();
                let f_trial = map.apply(&trial);
                stats.map_evals += 1;
                let evaluated = match f_trial {
                    Ok(f) if f.iter().all(|v| v.is_finite()) => {
                        let (r_t, res_t) = residual(&f, &trial);
                        Some((f, r_t, res_t))
                    }
                    Ok(_) | Err(Error::Evaluation(_)) => None,
                    Err(e) => return Err(e),
                };
                if cfg.mode == SolverMode::Newton {
                    let Some((f, r_t, res_t)) = evaluated else {
                        return Err(Error::Divergence { iterations: stats.iterations });
                    };
                    (x, fx, r, res) = (trial, f, r_t, res_t);
                    continue;
                }
                match evaluated {
                    Some((f, r_t, res_t)) if res_t < res => {
                        (x, fx, r, res) = (trial, f, r_t, res_t);
                        beta = (2.0 * beta).min(1.0);
                    }
                    _ if !fresh => {
                        // Retry from the same point with a fresh Jacobian.
                        lu = None;
                    }
                    _ => {
                        beta *= 0.5;
                        if beta < 1e-8 {
                            return Err(Error::NotConverged(stats));
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(mode: SolverMode) -> SolverConfig {
        SolverConfig { mode, tol: 1e-12, max_iters: 200, ..SolverConfig::default() }
    }

    #[test]
    fn linear_fixed_point_all_modes() {
        let phi = |x: &[f64]| vec![0.5 * x[0] + 1.0];
        for mode in [SolverMode::Picard, SolverMode::Newton, SolverMode::SemiImplicit] {
            let (x, st) = solve_fixed_point(&phi, &[0.0], &cfg(mode)).unwrap();
            assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-11);
            assert!(st.converged && st.final_residual <= 1e-12);
        }
    }

    #[test]
    fn cosine_fixed_point_matches_picard_oracle() {
        // Oracle: plain iteration of cos until it stops moving.
        let mut oracle = 1.0f64;
        for _ in 0..10_000 {
            oracle = oracle.cos();
        }
        let phi = |x: &[f64]| vec![x[0].cos()];
        for mode in [SolverMode::Picard, SolverMode::Newton, SolverMode::SemiImplicit] {
            let (x, _) = solve_fixed_point(&phi, &[1.0], &cfg(mode)).unwrap();
            assert_abs_diff_eq!(x[0], oracle, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(oracle, 0.7390851, epsilon = 1e-7);
    }

    /// `φ(x) = A x + c` with its exact Jacobian.
    struct Affine {
        a: Matrix,
        c: Vec<f64>,
    }

    impl FixedPointMap for Affine {
        fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(self.a.mul_vec(x).iter().zip(&self.c).map(|(p, q)| p + q).collect())
        }

        fn jacobian(&self, _: &[f64]) -> Result<Matrix> {
            Ok(self.a.clone())
        }
    }

    #[test]
    fn newton_is_exact_on_linear_maps() {
        let phi = Affine {
            a: Matrix::from_rows(&[vec![0.3, -0.2], vec![0.1, 0.4]]),
            c: vec![1.0, -2.0],
        };
        let (_, st) = solve_fixed_point(&phi, &[5.0, -3.0], &SolverConfig::newton(1e-12)).unwrap();
        assert_eq!(st.iterations, 1);
    }

    #[test]
    fn budget_exhaustion_reports_stats() {
        let phi = |x: &[f64]| vec![0.99 * x[0] + 1.0];
        let c = SolverConfig { mode: SolverMode::Picard, tol: 1e-12, max_iters: 5, ..SolverConfig::default() };
        match solve_fixed_point(&phi, &[0.0], &c) {
            Err(Error::NotConverged(st)) => assert_eq!((st.iterations, st.converged), (5, false)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn singular_newton_system_is_reported() {
        // J_φ = I makes I − J_φ singular.
        let phi = Affine { a: Matrix::identity(1), c: vec![1.0] };
        assert!(matches!(
            solve_fixed_point(&phi, &[0.0], &SolverConfig::newton(1e-10)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn picard_divergence_is_reported() {
        let phi = |x: &[f64]| vec![x[0] * x[0] * 1e100 + 1.0];
        let c = SolverConfig { mode: SolverMode::Picard, ..SolverConfig::default() };
        assert!(matches!(solve_fixed_point(&phi, &[1.0], &c), Err(Error::Divergence { .. })));
    }

    #[test]
    fn fd_jacobian_examples() {
        let a = [[1.0, -2.0, 0.5], [0.0, 3.0, 4.0]];
        let lin = |x: &[f64]| -> Result<Vec<f64>> {
            Ok(a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect())
        };
        let j = jacobian_fd(lin, &[0.3, -1.0, 2.0]).unwrap();
        for i in 0..2 {
            for k in 0..3 {
                assert_abs_diff_eq!(j[(i, k)], a[i][k], epsilon = 1e-6);
            }
        }
        let j = jacobian_fd(|_: &[f64]| Ok(vec![1.0, 2.0]), &[4.0, 5.0]).unwrap();
        assert!(j.as_slice().iter().all(|v| *v == 0.0));
        let j = jacobian_fd(|x: &[f64]| Ok(vec![x[1] * x[1], x[0]]), &[2.0, 3.0]).unwrap();
        for (v, e) in j.as_slice().iter().zip([0.0, 6.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-5);
        }
        assert!(jacobian_fd(|_: &[f64]| Ok(vec![f64::NAN]), &[1.0]).is_err());
    }
}
