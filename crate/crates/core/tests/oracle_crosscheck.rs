use approx::assert_relative_eq;
use timemap_core::error::Error;
use timemap_core::operators::OperatorKind;
use timemap_core::oracle::{
    brackets, default_step, positive_part_drift, scan_alpha, shoot, shooting_search,
};
use timemap_core::problem::{BoundaryCondition, ProblemSpec, WeightSpec};
use timemap_core::profile::reconstruct_neumann;
use timemap_core::quadrature::{integrate, QuadratureConfig};
use timemap_core::solver::{
    bifurcation_curve, linear_problem_solvable, principal_eigenvalue, solve_reduced,
};
use timemap_core::timemap::time_on_positive_part;
use timemap_core::verify::{eigen_residual, oracle_deviation};

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn spec(op: OperatorKind, gamma: f64, tau: f64) -> ProblemSpec {
    let w = WeightSpec::new(1.0, 2.0, tau, 3.0).unwrap();
    ProblemSpec::new(op, gamma, w, BoundaryCondition::Neumann).unwrap()
}

#[test]
fn superlinear_alpha_matches_shooting() {
    let s = spec(OperatorKind::Linear, 3.0, 1.0);
    let red = solve_reduced(&s, &q()).unwrap();
    let r = shoot(red.alpha, &s, default_step(&s)).unwrap();
    assert!(r.residual_neumann.unwrap().abs() < 1e-6);
    let a = shooting_search(&s, 81, default_step(&s)).unwrap();
    assert_relative_eq!(a, red.alpha, max_relative = 1e-6);
}

#[test]
fn singular_exponent_has_one_root_in_scan() {
    // gamma = -3 with abar = 1.2 > 0
    let s = spec(OperatorKind::Linear, -3.0, 2.4);
    let scan = scan_alpha(&s, 1e-4, 1e4, 81, default_step(&s)).unwrap();
    assert_eq!(brackets(&scan).len(), 1);
}

#[test]
fn wrong_sign_has_no_bracket() {
    let s = spec(OperatorKind::Linear, 3.0, 2.4);
    let err = shooting_search(&s, 81, default_step(&s)).unwrap_err();
    assert!(matches!(err, Error::NoBracket { .. }));
}

#[test]
fn residual_changes_sign_across_alpha_hat() {
    let s = spec(OperatorKind::PLaplacian { p: 3.0 }, 4.0, 1.0);
    let red = solve_reduced(&s, &q()).unwrap();
    let step = default_step(&s);
    let below = shoot(0.9 * red.alpha, &s, step).unwrap().signed_residual;
    let above = shoot(1.1 * red.alpha, &s, step).unwrap().signed_residual;
    assert!(below * above < 0.0);
    assert!(below.abs() > 1e-6 && above.abs() > 1e-6);
}

#[test]
fn rk4_drift_is_fourth_order() {
    // from alpha = 2 the singular case stays clear of x = 0 on [0, tau]
    for (op, gamma, alpha) in [
        (OperatorKind::Linear, 3.0, 1.0),
        (OperatorKind::Linear, -3.0, 2.0),
    ] {
        let s = spec(op, gamma, 1.0);
        let d1 = positive_part_drift(&s, alpha, 1.0 / 20.0).unwrap();
        let d2 = positive_part_drift(&s, alpha, 1.0 / 40.0).unwrap();
        assert!(d1 / d2 >= 15.0, "gamma {gamma}: drift ratio {}", d1 / d2);
    }
}

#[test]
fn profile_follows_rk_trajectory() {
    for (op, gamma, tau) in [
        (OperatorKind::Linear, 3.0, 1.0),
        (OperatorKind::PLaplacian { p: 3.0 }, -5.0, 2.4),
        (OperatorKind::PLaplacian { p: 1.5 }, 2.0, 1.0),
    ] {
        let s = spec(op, gamma, tau);
        let red = solve_reduced(&s, &q()).unwrap();
        let prof = reconstruct_neumann(&red, &s, 301, &q()).unwrap();
        let dev = oracle_deviation(&prof.grid, &prof.x, red.alpha, &s).unwrap();
        assert!(dev < 1e-5, "{op:?}, gamma {gamma}: deviation {dev}");
        assert!(prof.diagnostics.level_set_drift < 1e-6);
    }
}

#[test]
fn symmetric_times_on_positive_level_line() {
    // time from (x+, y+) up to (alpha, 0) equals time from (alpha, 0) down to (x-, y-)
    for op in [
        OperatorKind::Linear,
        OperatorKind::PLaplacian { p: 3.0 },
        OperatorKind::Minkowski,
    ] {
        let s = spec(op, 3.0, 1.0);
        let g = s.nonlinearity;
        let (omega, drop) = (g.big_g(1.0), 0.7 * g.big_g(1.0));
        let down = time_on_positive_part(omega, drop, &s, &q()).unwrap();
        let kernel = &s.kernel;
        let up = integrate(
            |n| 1.0 / (kernel.h(kernel.big_h_inv_right(n.from_right)) * g.l_g(n.x)),
            omega - drop,
            omega,
            &q(),
        )
        .unwrap();
        assert_relative_eq!(down, up, max_relative = 1e-8);
    }
}

#[test]
fn principal_eigenvalue_example() {
    let s = spec(OperatorKind::Linear, 1.0, 1.0);
    let l1 = principal_eigenvalue(&s, &q()).unwrap();
    assert!(eigen_residual(&s, l1).unwrap().abs() < 1e-6);
    assert!(eigen_residual(&s, 1.1 * l1).unwrap().abs() > 1e-2);
    assert!(linear_problem_solvable(&s, l1, &q()).unwrap());
    assert!(!linear_problem_solvable(&s, 0.9 * l1, &q()).unwrap());
}

#[test]
fn bifurcation_points_match_solved_rescaled_problems() {
    // lambda a(t) is another weight; its reduced omega must sit on the curve
    let s = spec(OperatorKind::Linear, 3.0, 1.0);
    let lambdas = [0.05, 0.3, 2.0];
    let pts = bifurcation_curve(&s, &lambdas, &q()).unwrap();
    for (p, &l) in pts.iter().zip(&lambdas) {
        let scaled = s.with_weight(s.weight.scaled(l)).unwrap();
        let red = solve_reduced(&scaled, &q()).unwrap();
        assert_relative_eq!(p.omega.unwrap(), red.omega, max_relative = 1e-9);
        assert_relative_eq!(p.alpha.unwrap(), red.alpha, max_relative = 1e-9);
    }
    // omega ~ lambda^{-2} at gamma = 3
    let r = pts[0].omega.unwrap() / pts[1].omega.unwrap();
    assert_relative_eq!(r, (0.3f64 / 0.05).powi(2), max_relative = 1e-10);
}

#[test]
fn minkowski_trajectory_respects_speed_limit() {
    let s = spec(OperatorKind::Minkowski, 3.0, 1.0);
    let r = shoot(0.5, &s, default_step(&s)).unwrap();
    let h = &s.kernel;
    assert!(r.trajectory.iter().all(|p| h.h(p.y).abs() < 1.0));
}
