//! Reference time-steppers: classical RK4 and the implicit trapezoid rule,
//! both with step-doubling error control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problems::OdeProblem;
use crate::sir::{solve_fixed_point, FixedPointMap, SolverConfig, SolverMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    Stagnated { reason: String },
    Failed { last_good_time: f64, reason: String },
}

/// Accepted steps of a time-stepper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub steps_taken: usize,
    pub steps_rejected: usize,
    /// Normalised local error estimate of each accepted adaptive step (≤ 1).
    pub error_estimates: Vec<f64>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    fn start(p: &OdeProblem) -> Self {
        Self {
            labels: p.labels().to_vec(),
            times: vec![p.span().0],
            states: vec![p.u0().to_vec()],
            steps_taken: 0,
            steps_rejected: 0,
            error_estimates: Vec::new(),
            status: TrajectoryStatus::Completed,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial point")
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial point")
    }

    /// State recorded exactly at `t`, if a step landed there.
    pub fn state_at(&self, t: f64) -> Option<&[f64]> {
        let i = self.times.partition_point(|&s| s < t);
        (self.times.get(i) == Some(&t)).then(|| self.states[i].as_slice())
    }

    /// Time reached after `n` accepted steps.
    pub fn time_after(&self, n: usize) -> f64 {
        self.times[n.min(self.times.len() - 1)]
    }

    /// Values of one component along the trajectory.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h0: f64,
    pub h_min: f64,
    #[serde(with = "crate::serde_float")]
    pub h_max: f64,
    pub max_steps: usize,
    /// Accepted steps that together advancing less than `1e-6·span` count as stagnation.
    pub stagnation_window: usize,
    /// Times the stepper must land on exactly.
    pub checkpoints: Vec<f64>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-6,
            h0: 1e-2,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
            stagnation_window: 10_000,
            checkpoints: Vec::new(),
        }
    }
}

impl StepperConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { rel_tol: tol, abs_tol: tol, ..Self::default() }
    }

    /// `rel_tol = tol`, `abs_tol = tol · p.abs_scale()`.
    pub fn for_problem(p: &OdeProblem, tol: f64) -> Self {
        Self { rel_tol: tol, abs_tol: tol * p.abs_scale(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_min > 0.0 && self.h_min <= self.h0 && self.h0 <= self.h_max) {
            return Err(Error::Config("need 0 < h_min <= h0 <= h_max".into()));
        }
        if self.max_steps == 0 || !(self.rel_tol >= 0.0 && self.abs_tol >= 0.0) {
            return Err(Error::Config("max_steps must be >= 1 and tolerances >= 0".into()));
        }
        if self.rel_tol == 0.0 && self.abs_tol == 0.0 {
            return Err(Error::Config("at least one tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step(p: &OdeProblem, t: f64, u: &[f64], h: f64) -> Vec<f64> {
    let axpy = |a: &[f64], s: f64, k: &[f64]| -> Vec<f64> {
        a.iter().zip(k).map(|(x, y)| x + s * y).collect()
    };
    let k1 = p.rhs(t, u);
    let k2 = p.rhs(t + 0.5 * h, &axpy(u, 0.5 * h, &k1));
    let k3 = p.rhs(t + 0.5 * h, &axpy(u, 0.5 * h, &k2));
    let k4 = p.rhs(t + h, &axpy(u, h, &k3));
    u.iter()
        .enumerate()
        .map(|(i, x)| x + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

struct TrapezoidStage<'a> {
    p: &'a OdeProblem,
    base: Vec<f64>,
    t1: f64,
    half_h: f64,
}

impl FixedPointMap for TrapezoidStage<'_> {
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let f = self.p.rhs(self.t1, v);
        Ok(self.base.iter().zip(f).map(|(b, g)| b + self.half_h * g).collect())
    }

    fn jacobian(&self, v: &[f64]) -> Result<Matrix> {
        let j = self.p.jacobian(self.t1, v);
        let data = j.as_slice().iter().map(|x| self.half_h * x).collect();
        Ok(Matrix::from_row_major(j.rows(), j.cols(), data))
    }
}

/// One implicit trapezoid step `u1 = u + h/2 (F(t, u) + F(t + h, u1))`.
pub fn trapezoid_step(
    p: &OdeProblem,
    t: f64,
    u: &[f64],
    h: f64,
    newton: &SolverConfig,
) -> Result<Vec<f64>> {
    let f0 = p.rhs(t, u);
    let base: Vec<f64> = u.iter().zip(&f0).map(|(x, g)| x + 0.5 * h * g).collect();
    let stage = TrapezoidStage { p, base, t1: t + h, half_h: 0.5 * h };
    // Start from the current state; an explicit predictor overshoots on stiff problems.
    solve_fixed_point(&stage, u, newton).map(|(x, _)| x)
}

/// Newton settings for the trapezoid stage.
pub fn default_trapezoid_newton() -> SolverConfig {
    SolverConfig {
        mode: SolverMode::Newton,
        tol: 1e-12,
        max_iters: 20,
        jacobian_reuse: 2,
        damping_init: 1.0,
    }
}

fn error_norm(small: &[f64], big: &[f64], prev: &[f64], denom: f64, cfg: &StepperConfig) -> f64 {
    small
        .iter()
        .zip(big)
        .zip(prev)
        .map(|((s, b), p)| {
            let scale = cfg.abs_tol + cfg.rel_tol * s.abs().max(p.abs());
            (s - b).abs() / denom / scale
        })
        .fold(0.0f64, |m, e| if e.is_nan() { f64::INFINITY } else { m.max(e) })
}

enum Attempt {
    Done { u: Vec<f64>, err: f64 },
    Failed,
}

fn adaptive<S>(p: &OdeProblem, cfg: &StepperConfig, order: i32, mut attempt: S) -> Result<Trajectory>
where
    S: FnMut(f64, &[f64], f64) -> Attempt,
{
    cfg.validate()?;
    let (t0, t_end) = p.span();
    let span = t_end - t0;
    let mut traj = Trajectory::start(p);
    let mut t = t0;
    let mut u = p.u0().to_vec();
    let mut h = cfg.h0.min(cfg.h_max);
    let exponent = 1.0 / (order as f64 + 1.0);
    let mut checkpoints: Vec<f64> =
        cfg.checkpoints.iter().copied().filter(|&c| c > t0 && c < t_end).collect();
    checkpoints.sort_by(f64::total_cmp);
    let mut next_cp = 0usize;

    while t < t_end {
        if traj.steps_taken >= cfg.max_steps {
            traj.status = TrajectoryStatus::Stagnated {
                reason: format!("step budget {} exhausted at t = {t:.6e}", cfg.max_steps),
            };
            return Ok(traj);
        }
        let target = checkpoints.get(next_cp).copied().unwrap_or(t_end);
        let mut step = h.min(target - t);
        let lands = step >= target - t;
        if lands {
            step = target - t;
        }
        match attempt(t, &u, step) {
            Attempt::Done { u: u_new, err } if err <= 1.0 => {
                t = if lands { target } else { t + step };
                if lands && next_cp < checkpoints.len() {
                    next_cp += 1;
                }
                u = u_new;
                traj.times.push(t);
                traj.states.push(u.clone());
                traj.steps_taken += 1;
                traj.error_estimates.push(err);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-exponent)).clamp(0.2, 5.0) };
                // Do not let a short step onto a checkpoint shrink the controller.
                h = if lands { h.max(step * factor) } else { step * factor }.min(cfg.h_max);
                let w = cfg.stagnation_window;
                if w > 0 && traj.steps_taken >= w {
                    let advanced = t - traj.times[traj.times.len() - 1 - w];
                    if advanced < 1e-6 * span {
                        traj.status = TrajectoryStatus::Stagnated {
                            reason: format!("{w} steps advanced only {advanced:.3e} at t = {t:.6e}"),
                        };
                        return Ok(traj);
                    }
                }
            }
            outcome => {
                traj.steps_rejected += 1;
                let factor = match outcome {
                    Attempt::Done { err, .. } if err.is_finite() => (0.9 * err.powf(-exponent)).clamp(0.2, 1.0),
                    _ => 0.2,
                };
                let failed_hard = matches!(outcome, Attempt::Failed)
                    || matches!(outcome, Attempt::Done { err, .. } if !err.is_finite());
                if step <= cfg.h_min {
                    traj.status = if failed_hard {
                        TrajectoryStatus::Failed {
                            last_good_time: t,
                            reason: "non-finite state or failed stage solve at minimum step".into(),
                        }
                    } else {
                        TrajectoryStatus::Stagnated { reason: format!("step below h_min at t = {t:.6e}") }
                    };
                    return Ok(traj);
                }
                h = (step * factor).max(cfg.h_min);
            }
        }
    }
    Ok(traj)
}

/// Adaptive RK4; the local error is estimated by step doubling,
/// `‖u_{2×h/2} − u_h‖ / 15`.
pub fn rk4_adaptive(p: &OdeProblem, cfg: &StepperConfig) -> Result<Trajectory> {
    adaptive(p, cfg, 4, |t, u, h| {
        let big = rk4_step(p, t, u, h);
        let half = rk4_step(p, t, u, 0.5 * h);
        let small = rk4_step(p, t + 0.5 * h, &half, 0.5 * h);
        if !small.iter().all(|v| v.is_finite()) {
            return Attempt::Failed;
        }
        let err = error_norm(&small, &big, u, 15.0, cfg);
        Attempt::Done { u: small, err }
    })
}

/// Adaptive implicit trapezoid; local error by step halving, `‖u_{2×h/2} − u_h‖ / 3`.
pub fn trapezoid_adaptive(p: &OdeProblem, cfg: &StepperConfig, newton: &SolverConfig) -> Result<Trajectory> {
    newton.validate()?;
    adaptive(p, cfg, 2, |t, u, h| {
        let solve = || -> Result<(Vec<f64>, Vec<f64>)> {
            let big = trapezoid_step(p, t, u, h, newton)?;
            let half = trapezoid_step(p, t, u, 0.5 * h, newton)?;
            let small = trapezoid_step(p, t + 0.5 * h, &half, 0.5 * h, newton)?;
            Ok((small, big))
        };
        match solve() {
            Ok((small, big)) if small.iter().all(|v| v.is_finite()) => {
                let err = error_norm(&small, &big, u, 3.0, cfg);
                Attempt::Done { u: small, err }
            }
            _ => Attempt::Failed,
        }
    })
}

fn fixed<S>(p: &OdeProblem, h: f64, steps: usize, mut step: S) -> Result<Trajectory>
where
    S: FnMut(f64, &[f64], f64) -> Result<Vec<f64>>,
{
    let mut traj = Trajectory::start(p);
    let mut t = p.span().0;
    for n in 1..=steps {
        let u = step(t, traj.last_state(), h)?;
        t = p.span().0 + h * n as f64;
        let finite = u.iter().all(|v| v.is_finite());
        if !finite {
            traj.status = TrajectoryStatus::Failed {
                last_good_time: traj.last_time(),
                reason: "non-finite state".into(),
            };
            return Ok(traj);
        }
        traj.times.push(t);
        traj.states.push(u);
        traj.steps_taken += 1;
    }
    Ok(traj)
}

/// `steps` RK4 steps of size `h` from the start of the span.
pub fn rk4_fixed(p: &OdeProblem, h: f64, steps: usize) -> Result<Trajectory> {
    fixed(p, h, steps, |t, u, h| Ok(rk4_step(p, t, u, h)))
}

/// `steps` trapezoid steps of size `h` from the start of the span.
pub fn trapezoid_fixed(p: &OdeProblem, h: f64, steps: usize, newton: &SolverConfig) -> Result<Trajectory> {
    fixed(p, h, steps, |t, u, h| trapezoid_step(p, t, u, h, newton))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{linear_test, lorenz84};
    use approx::assert_abs_diff_eq;

    #[test]
    fn rk4_single_step_matches_taylor_polynomial() {
        let p = linear_test(-1.0, 1.0);
        let h: f64 = 0.1;
        let expected = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert_abs_diff_eq!(rk4_step(&p, 0.0, &[1.0], h)[0], expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.9048375, epsilon = 1e-7);
    }

    #[test]
    fn trapezoid_single_step_matches_stability_function() {
        let p = linear_test(-1.0, 1.0);
        let u = trapezoid_step(&p, 0.0, &[1.0], 0.1, &default_trapezoid_newton()).unwrap();
        assert_abs_diff_eq!(u[0], 0.95 / 1.05, epsilon = 1e-14);
    }

    #[test]
    fn trapezoid_decays_on_stiff_linear_problem() {
        let p = linear_test(-2400.0, 1.0);
        let tr = trapezoid_fixed(&p, 0.1, 20, &default_trapezoid_newton()).unwrap();
        let mags: Vec<f64> = tr.states.iter().map(|s| s[0].abs()).collect();
        assert!(mags.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn adaptive_runs_are_monotone_and_accurate() {
        let p = linear_test(-1.0, 1.0).with_span(0.0, 3.0);
        let cfg = StepperConfig::with_tol(1e-8);
        for traj in [
            rk4_adaptive(&p, &cfg).unwrap(),
            trapezoid_adaptive(&p, &cfg, &default_trapezoid_newton()).unwrap(),
        ] {
            assert!(traj.is_complete());
            assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(traj.last_time(), 3.0);
            assert_abs_diff_eq!(traj.last_state()[0], (-3.0f64).exp(), epsilon = 1e-6);
        }
    }

    #[test]
    fn checkpoints_are_hit_exactly() {
        let p = lorenz84(0.25, 4.0, 8.0, 1.0).with_span(0.0, 2.0);
        let cfg = StepperConfig { checkpoints: vec![0.5, 1.0, 1.5], ..StepperConfig::with_tol(1e-8) };
        let traj = rk4_adaptive(&p, &cfg).unwrap();
        for c in [0.5, 1.0, 1.5, 2.0] {
            assert!(traj.state_at(c).is_some(), "missing checkpoint {c}");
        }
    }

    #[test]
    fn budget_exhaustion_is_stagnation() {
        let p = linear_test(-1.0, 1.0).with_span(0.0, 100.0);
        let cfg = StepperConfig { max_steps: 10, h0: 1e-3, h_max: 1e-3, ..StepperConfig::with_tol(1e-6) };
        let traj = rk4_adaptive(&p, &cfg).unwrap();
        assert!(matches!(traj.status, TrajectoryStatus::Stagnated { .. }));
        assert_eq!(traj.steps_taken, 10);
    }

    #[test]
    fn blow_up_reports_failure() {
        let p = OdeProblem::new("blowup", vec![1.0], (0.0, 2.0), |_, u, du| du[0] = u[0] * u[0]);
        let cfg = StepperConfig { h_min: 1e-10, ..StepperConfig::with_tol(1e-6) };
        let traj = rk4_adaptive(&p, &cfg).unwrap();
        assert!(!traj.is_complete());
        assert!(traj.last_time() < 1.0 + 1e-4);
    }
}
