use proptest::prelude::*;
use timemap_core::operators::{make_operator, OperatorKind, PowerNonlinearity};
use timemap_core::problem::{BoundaryCondition, ProblemSpec, WeightSpec};
use timemap_core::quadrature::QuadratureConfig;
use timemap_core::solver::{classify_existence, solve_reduced, ExistenceStatus};
use timemap_core::timemap::{F_quotient, RhoDomain, RhoSide};

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn kind() -> impl Strategy<Value = OperatorKind> {
    prop_oneof![
        Just(OperatorKind::Linear),
        (1.2f64..6.0).prop_map(|p| OperatorKind::PLaplacian { p }),
        Just(OperatorKind::Minkowski),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_identities(k in kind(), y in -5.0f64..5.0) {
        let h = make_operator(k).unwrap();
        prop_assert!((h.h(-y) + h.h(y)).abs() <= 1e-12 * (1.0 + h.h(y).abs()));
        prop_assert!((h.phi(h.h(y)) - y).abs() <= 1e-9 * (1.0 + y.abs()));
        let big = h.big_h(y);
        prop_assert!(big >= 0.0);
        let back = if y < 0.0 { h.big_h_inv_left(big) } else { h.big_h_inv_right(big) };
        prop_assert!((back - y).abs() <= 1e-8 * (1.0 + y.abs()));
        // L_h(xi) = h(H_l^{-1}(xi)) <= 0
        prop_assert!(h.l_h(big) <= 0.0);
    }

    #[test]
    fn primitive_inverse_roundtrip(gamma in -6.0f64..6.0, x in 1e-3f64..50.0) {
        prop_assume!((gamma + 1.0).abs() > 1e-3);
        let g = PowerNonlinearity::new(gamma).unwrap();
        let xi = g.big_g(x);
        prop_assert!((g.big_g_inv(xi) - x).abs() <= 1e-9 * x);
        prop_assert_eq!(xi.signum(), g.sign());
    }

    /// Scaling both weights by c changes neither F nor rho-hat.
    #[test]
    fn quotient_is_scale_free(c in 0.1f64..10.0, s in 0.05f64..0.95, gamma in prop_oneof![-3.5f64..-1.2, -0.9f64..-0.1, 0.1f64..0.9, 1.2f64..4.0]) {
        let w = WeightSpec::new(1.0, 2.0, 1.0, 3.0).unwrap();
        let a = ProblemSpec::new(OperatorKind::Linear, gamma, w, BoundaryCondition::Neumann).unwrap();
        let b = a.with_weight(w.scaled(c)).unwrap();
        let dom = RhoDomain::for_spec(&a);
        let rho = match dom.side {
            RhoSide::BelowRatio => 2.0 * s,
            RhoSide::AboveRatio => 2.0 + 20.0 * s,
        };
        let fa = F_quotient(rho, &a, &q()).unwrap();
        let fb = F_quotient(rho, &b, &q()).unwrap();
        prop_assert!((fa - fb).abs() <= 1e-9 * fa.abs().max(1.0));
    }

    #[test]
    fn reduced_solution_invariants(
        p in prop_oneof![Just(2.0), 1.5f64..4.0],
        pick in 0usize..2,
        gamma_seed in 0.0f64..1.0,
        tau in 0.3f64..2.7,
    ) {
        let lower = (1.0 - 2.0 * p) / (p - 1.0);
        let gamma = if pick == 0 { lower - 3.0 * gamma_seed } else { p - 0.9 + 3.0 * gamma_seed };
        let w = WeightSpec::new(1.0, 2.0, tau, 3.0).unwrap();
        let op = if p == 2.0 { OperatorKind::Linear } else { OperatorKind::PLaplacian { p } };
        let spec = ProblemSpec::new(op, gamma, w, BoundaryCondition::Neumann).unwrap();
        let verdict = classify_existence(&spec).unwrap();
        prop_assume!(verdict.status == ExistenceStatus::UniqueExists);
        let r = solve_reduced(&spec, &q()).unwrap();
        prop_assert!(0.0 < r.beta && r.beta < r.x_star && r.x_star < r.alpha);
        prop_assert!(r.y_star <= 0.0);
        prop_assert!(r.residuals.0.abs() <= 1e-8 * tau);
        prop_assert!(r.residuals.1.abs() <= 1e-8 * (3.0 - tau));
        let g = spec.nonlinearity;
        let mu = w.mu();
        prop_assert!((r.sigma - w.a_plus / w.a_minus * r.omega * r.rho).abs() <= 1e-12 * r.sigma.abs());
        prop_assert!((g.big_g(r.x_star) - (mu * r.omega + (1.0 - mu) * r.sigma)).abs() <= 1e-10 * r.omega.abs().max(1.0));
        let level = spec.kernel.big_h(r.y_star) + w.a_plus * g.big_g(r.x_star) - w.a_plus * g.big_g(r.alpha);
        prop_assert!(level.abs() <= 1e-8 * (w.a_plus * r.omega).abs().max(1.0));
        // necessary sign condition
        prop_assert!(gamma * w.mean_weight() < 0.0);
    }

    #[test]
    fn periodic_and_halved_neumann_share_rho(gamma in prop_oneof![-5.0f64..-3.0, 1.1f64..4.0], tau in 0.2f64..2.8) {
        let w = WeightSpec::new(1.0, 2.0, tau, 3.0).unwrap();
        let n = ProblemSpec::new(OperatorKind::Linear, gamma, w, BoundaryCondition::Neumann).unwrap();
        let p = n.with_bc(BoundaryCondition::Periodic).unwrap();
        match (solve_reduced(&n, &q()), solve_reduced(&p, &q())) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a.rho - b.rho).abs() <= 1e-12 * a.rho.max(1.0));
                prop_assert_eq!(b.targets, (0.5 * tau, 0.5 * (3.0 - tau)));
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "neumann {:?} vs periodic {:?}", a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn quotient_increasing_in_monotone_range(p in prop_oneof![Just(2.0), 1.5f64..4.0], seed in 0.0f64..1.0, s in 0.05f64..0.9) {
        let lower = (1.0 - 2.0 * p) / (p - 1.0);
        let gamma = monotone_gamma_at(p, lower, seed);
        let w = WeightSpec::new(1.0, 2.0, 1.0, 3.0).unwrap();
        let op = if p == 2.0 { OperatorKind::Linear } else { OperatorKind::PLaplacian { p } };
        let spec = ProblemSpec::new(op, gamma, w, BoundaryCondition::Neumann).unwrap();
        let (r0, r1) = match RhoDomain::for_spec(&spec).side {
            RhoSide::BelowRatio => (2.0 * s, 2.0 * (s + 0.05)),
            RhoSide::AboveRatio => (2.0 + 10.0 * s, 2.0 + 10.0 * (s + 0.05)),
        };
        let f0 = F_quotient(r0, &spec, &q()).unwrap();
        let f1 = F_quotient(r1, &spec, &q()).unwrap();
        prop_assert!(f1 > f0, "gamma {gamma}: F({r0}) = {f0} >= F({r1}) = {f1}");
    }
}

/// Exponent in the uniqueness ranges of the p-laplacian.
fn monotone_gamma_at(p: f64, lower: f64, seed: f64) -> f64 {
    if seed < 0.5 {
        lower - 6.0 * seed
    } else {
        p - 1.0 + 0.05 + 6.0 * (seed - 0.5)
    }
}
