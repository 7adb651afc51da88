use gwrm_core::problems::{linear_exact, linear_test, lorenz84, robertson};
use gwrm_core::refsolvers::{
    default_trapezoid_newton, rk4_adaptive, rk4_fixed, trapezoid_adaptive, trapezoid_fixed, StepperConfig, Trajectory,
};

fn observed_order(error: impl Fn(f64) -> f64) -> (f64, f64) {
    let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| error(h)).collect();
    ((e[0] / e[1]).log2(), (e[1] / e[2]).log2())
}

fn final_error(traj: &Trajectory) -> f64 {
    assert!((traj.last_time() - 1.0).abs() < 1e-12);
    (traj.last_state()[0] - linear_exact(-1.0, 1.0, 1.0)).abs()
}

#[test]
fn rk4_is_fourth_order() {
    let p = linear_test(-1.0, 1.0);
    let (a, b) = observed_order(|h| final_error(&rk4_fixed(&p, h, (1.0 / h).round() as usize).unwrap()));
    for o in [a, b] {
        assert!((o - 4.0).abs() <= 0.2, "{o}");
    }
}

#[test]
fn trapezoid_is_second_order() {
    let p = linear_test(-1.0, 1.0);
    let newton = default_trapezoid_newton();
    let (a, b) =
        observed_order(|h| final_error(&trapezoid_fixed(&p, h, (1.0 / h).round() as usize, &newton).unwrap()));
    for o in [a, b] {
        assert!((o - 2.0).abs() <= 0.1, "{o}");
    }
}

#[test]
fn trapezoid_is_a_stable() {
    let p = linear_test(-2400.0, 1.0);
    let traj = trapezoid_fixed(&p, 0.1, 10, &default_trapezoid_newton()).unwrap();
    let mags: Vec<f64> = traj.states.iter().map(|s| s[0].abs()).collect();
    assert!(mags.windows(2).all(|w| w[1] < w[0]), "{mags:?}");

    // The adaptive controller is limited by accuracy only, not stability.
    let cfg = StepperConfig { h0: 0.1, ..StepperConfig::with_tol(1e-3) };
    let traj = trapezoid_adaptive(&p, &cfg, &default_trapezoid_newton()).unwrap();
    assert!(traj.is_complete());
    assert!(traj.steps_taken < 200, "{}", traj.steps_taken);
}

fn check_trajectory(traj: &Trajectory) {
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(traj.error_estimates.len(), traj.steps_taken);
    assert!(traj.error_estimates.iter().all(|&e| e <= 1.0));
    assert_eq!(traj.states.len(), traj.times.len());
}

#[test]
fn accepted_steps_meet_tolerance() {
    let lor = lorenz84(0.25, 4.0, 8.0, 1.0).with_span(0.0, 5.0);
    let cfg = StepperConfig::for_problem(&lor, 1e-6);
    check_trajectory(&rk4_adaptive(&lor, &cfg).unwrap());
    check_trajectory(&trapezoid_adaptive(&lor, &cfg, &default_trapezoid_newton()).unwrap());
}

#[test]
fn robertson_trajectories_conserve_mass() {
    let p = robertson(0.04, 1e4, 3e7);
    let cfg = StepperConfig { max_steps: 100_000, ..StepperConfig::for_problem(&p, 1e-3) };
    let trap = trapezoid_adaptive(&p, &cfg, &default_trapezoid_newton()).unwrap();
    assert!(trap.is_complete());
    let rk4 = rk4_adaptive(&p, &cfg).unwrap();
    for traj in [&trap, &rk4] {
        check_trajectory(traj);
        let worst = traj.states.iter().map(|s| (s.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst <= 10.0 * cfg.rel_tol, "{worst:e}");
    }
}

#[test]
fn checkpoints_are_hit_exactly() {
    let p = lorenz84(0.25, 4.0, 8.0, 1.0).with_span(0.0, 1.0);
    let cfg = StepperConfig { checkpoints: vec![0.3, 0.1, 0.7], ..StepperConfig::with_tol(1e-8) };
    let traj = rk4_adaptive(&p, &cfg).unwrap();
    for t in [0.1, 0.3, 0.7, 1.0] {
        assert!(traj.state_at(t).is_some(), "{t}");
    }
}
