//! The acceptance matrix: figure reproduction, exact forms, the sign-rule
//! matrix against the shooting oracle, reconstruction, periodic extension,
//! the eigenvalue dichotomy and monotonicity properties.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::OperatorKind;
use crate::oracle::{
    brackets, default_step, scan_alpha, shoot_linear, shoot_residual, shoot_sampled, shooting_solve,
};
use crate::problem::{BoundaryCondition, ProblemSpec, WeightSpec};
use crate::profile::{reconstruct, reconstruct_neumann, DEFAULT_POINTS};
use crate::quadrature::QuadratureConfig;
use crate::solver::{
    classify_existence_with, count_solutions, principal_eigenvalue, solve_reduced, ExistenceStatus,
};
use crate::timemap::{i1_derivative, integral_i1, integral_i2, quotient_exponent, F_quotient, K0};

/// Points `(gamma, rho, F)` read off the plotted curves for `a+ = 1`, `a- = 2`
/// on `]0, 2[`.
pub const FIGURE_1_POINTS: [(f64, f64, f64); 20] = [
    (-0.4, 0.004, 7.99401),
    (-0.4, 0.04, 7.07515),
    (-0.4, 0.2, 5.11821),
    (-0.4, 1.0, 2.73439),
    (-0.4, 1.6, 2.21047),
    (-0.2, 0.004, 3.59797),
    (-0.2, 0.4, 2.60518),
    (-0.2, 1.0, 2.24823),
    (-0.2, 1.8, 2.03557),
    (0.0, 0.6, 2.0),
    (0.0, 1.4, 2.0),
    (0.2, 0.004, 1.26484),
    (0.2, 0.4, 1.67537),
    (0.2, 1.0, 1.85032),
    (0.2, 1.6, 1.95075),
    (0.8, 0.004, 0.5093),
    (0.8, 0.2, 1.03488),
    (0.8, 0.6, 1.39831),
    (0.8, 1.0, 1.62598),
    (0.8, 1.96, 1.98806),
];

/// Points `(gamma, rho, F)` on `]2, 20]` for `a+ = 1`, `a- = 2`.
pub const FIGURE_2_POINTS: [(f64, f64, f64); 20] = [
    (-1.5, 3.0, 4.5589),
    (-1.5, 5.0, 13.4742),
    (-1.5, 10.0, 63.8671),
    (-1.5, 20.0, 326.929),
    (-1.6, 4.0, 7.05907),
    (-1.6, 8.0, 26.7533),
    (-1.6, 13.0, 70.8455),
    (-1.6, 17.0, 122.747),
    (-1.8, 3.0, 3.69256),
    (-1.8, 7.0, 13.886),
    (-1.8, 12.0, 33.3365),
    (-1.8, 19.0, 71.5674),
    (-2.0, 4.0, 5.0882),
    (-2.0, 10.0, 18.1801),
    (-2.0, 15.0, 32.4058),
    (-2.0, 20.0, 49.0586),
    (-3.0, 5.0, 5.0),
    (-3.0, 10.0, 10.0),
    (-3.0, 15.0, 15.0),
    (-3.0, 20.0, 20.0),
];

pub const FIGURE_1_TOL: f64 = 5e-4;
pub const FIGURE_2_TOL: f64 = 1e-2;
pub const EXACT_TOL: f64 = 1e-8;
pub const K0_WORKED_TOL: f64 = 1e-6;
pub const ALPHA_REL_TOL: f64 = 1e-6;
pub const FD_TOL: f64 = 1e-4;
pub const BC_TOL: f64 = 1e-6;
pub const RK_DEV_TOL: f64 = 1e-5;
pub const PERIODIC_TOL: f64 = 1e-6;
pub const SYMMETRY_TOL: f64 = 1e-8;
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-6;
pub const OFF_EIGEN_MIN: f64 = 1e-2;
pub const DERIVATIVE_TOL: f64 = 1e-5;

const FIGURE_BUDGET: Duration = Duration::from_secs(10);
const MATRIX_BUDGET: Duration = Duration::from_secs(60);
const ALPHA_SCAN_POINTS: usize = 81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    /// Failing checks, each named.
    pub failures: Vec<String>,
    pub elapsed_ms: u128,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "[{status}] criterion {}: {} ({} checks, {} ms)",
            self.id, self.name, self.checks, self.elapsed_ms
        );
        if let Some(first) = self.failures.first() {
            s.push_str(&format!("; first failure: {first}"));
            if self.failures.len() > 1 {
                s.push_str(&format!(" (+{} more)", self.failures.len() - 1));
            }
        }
        s
    }
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn result<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        self.checks += 1;
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.failures.push(format!("{}: {e}", what()));
                None
            }
        }
    }

    fn finish(self, id: u8, name: &str, start: Instant) -> CriterionReport {
        CriterionReport {
            id,
            name: name.to_string(),
            passed: self.failures.is_empty(),
            checks: self.checks,
            failures: self.failures,
            elapsed_ms: start.elapsed().as_millis(),
        }
    }
}

fn linear_spec(gamma: f64, w: WeightSpec, bc: BoundaryCondition) -> Result<ProblemSpec> {
    ProblemSpec::new(OperatorKind::Linear, gamma, w, bc)
}

fn operator_for(p: f64) -> OperatorKind {
    if p == 2.0 {
        OperatorKind::Linear
    } else {
        OperatorKind::PLaplacian { p }
    }
}

/// Weight with `a+ = 1`, `a- = 2` on `[0, 3]`; the switch time is irrelevant
/// to `F`.
fn figure_weight() -> WeightSpec {
    WeightSpec {
        a_plus: 1.0,
        a_minus: 2.0,
        tau: 1.0,
        period: 3.0,
    }
}

fn figure_check(
    id: u8,
    name: &str,
    points: &[(f64, f64, f64)],
    tol: f64,
    q: &QuadratureConfig,
) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for &(gamma, rho, expected) in points {
        let what = || format!("gamma = {gamma}, rho = {rho}");
        let Some(spec) = t.result(
            linear_spec(gamma, figure_weight(), BoundaryCondition::Neumann),
            what,
        ) else {
            continue;
        };
        if let Some(f) = t.result(F_quotient(rho, &spec, q), what) {
            t.check((f - expected).abs() <= tol, || {
                format!("gamma = {gamma}, rho = {rho}: F = {f}, expected {expected} +- {tol}")
            });
        }
    }
    let elapsed = start.elapsed();
    t.check(elapsed < FIGURE_BUDGET, || {
        format!("runtime {elapsed:?} over {FIGURE_BUDGET:?}")
    });
    t.finish(id, name, start)
}

pub fn criterion_1(q: &QuadratureConfig) -> CriterionReport {
    figure_check(1, "first figure curves", &FIGURE_1_POINTS, FIGURE_1_TOL, q)
}

pub fn criterion_2(q: &QuadratureConfig) -> CriterionReport {
    figure_check(2, "second figure curves", &FIGURE_2_POINTS, FIGURE_2_TOL, q)
}

pub fn criterion_3(q: &QuadratureConfig) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let w = figure_weight();
    let ratio = w.weight_ratio();
    if let Some(s0) = t.result(linear_spec(0.0, w, BoundaryCondition::Neumann), || {
        "gamma = 0".into()
    }) {
        for i in 0..100 {
            let rho = ratio * (i as f64 + 0.5) / 100.0;
            if let Some(f) = t.result(F_quotient(rho, &s0, q), || {
                format!("gamma = 0, rho = {rho}")
            }) {
                t.check((f - ratio).abs() <= EXACT_TOL, || {
                    format!("gamma = 0, rho = {rho}: F = {f} != {ratio}")
                });
            }
        }
    }
    if let Some(s3) = t.result(linear_spec(-3.0, w, BoundaryCondition::Neumann), || {
        "gamma = -3".into()
    }) {
        for i in 0..100 {
            let rho = ratio + 0.18 * (i + 1) as f64;
            if let Some(f) = t.result(F_quotient(rho, &s3, q), || {
                format!("gamma = -3, rho = {rho}")
            }) {
                t.check((f - rho).abs() <= EXACT_TOL, || {
                    format!("gamma = -3, rho = {rho}: F = {f}")
                });
            }
        }
    }
    if let Some(k) = t.result(K0(0.0, 1.0, 2.0, q), || "K0(0)".into()) {
        t.check((k - 2.0).abs() <= EXACT_TOL, || format!("K0(0) = {k} != 2"));
    }
    if let Some(k) = t.result(K0(-0.5, 1.0, 1.0, q), || "K0(-1/2)".into()) {
        t.check((k - 5.0).abs() <= K0_WORKED_TOL, || {
            format!("K0(-1/2) = {k} != 5")
        });
    }
    t.finish(3, "exact-form identities", start)
}

/// Weights of the sign-rule matrix: `abar = -3` and `abar = 1.2`.
pub fn matrix_weights() -> [WeightSpec; 2] {
    [
        WeightSpec {
            a_plus: 1.0,
            a_minus: 2.0,
            tau: 1.0,
            period: 3.0,
        },
        WeightSpec {
            a_plus: 1.0,
            a_minus: 2.0,
            tau: 2.4,
            period: 3.0,
        },
    ]
}

/// `(p, gamma)` pairs of the sign-rule matrix.
pub fn matrix_exponents() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for p in [2.0, 3.0] {
        for gamma in [-5.0, (1.0 - 2.0 * p) / (p - 1.0), p - 1.0 + 0.5, 4.0] {
            v.push((p, gamma));
        }
    }
    v
}

pub fn criterion_4(q: &QuadratureConfig) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for (p, gamma) in matrix_exponents() {
        for w in matrix_weights() {
            let label = format!("p = {p}, gamma = {gamma}, abar = {}", w.mean_weight());
            let Some(spec) = t.result(
                ProblemSpec::new(operator_for(p), gamma, w, BoundaryCondition::Neumann),
                || label.clone(),
            ) else {
                continue;
            };
            let Some(verdict) = t.result(classify_existence_with(&spec, q), || label.clone())
            else {
                continue;
            };
            let expected = if gamma * w.mean_weight() < 0.0 {
                ExistenceStatus::UniqueExists
            } else {
                ExistenceStatus::NoneExists
            };
            t.check(verdict.status == expected, || {
                format!(
                    "{label}: verdict {:?}, sign rule says {expected:?}",
                    verdict.status
                )
            });
            let step = default_step(&spec);
            if expected == ExistenceStatus::UniqueExists {
                let Some(red) = t.result(solve_reduced(&spec, q), || label.clone()) else {
                    continue;
                };
                if let Some(c) = t.result(count_solutions(&spec, 200, q), || label.clone()) {
                    t.check(c.count == 1, || format!("{label}: {} crossings", c.count));
                }
                let Some(scan) = t.result(
                    scan_alpha(&spec, 1e-4, 1e4, ALPHA_SCAN_POINTS, step),
                    || label.clone(),
                ) else {
                    continue;
                };
                let b = brackets(&scan);
                t.check(b.len() == 1, || {
                    format!("{label}: {} alpha brackets", b.len())
                });
                if let Some(&br) = b.first() {
                    if let Some(a) = t.result(shooting_solve(&spec, br, step), || label.clone()) {
                        let rel = (a - red.alpha).abs() / red.alpha;
                        t.check(rel <= ALPHA_REL_TOL, || {
                            format!(
                                "{label}: oracle alpha {a} vs reduced {} (rel {rel:e})",
                                red.alpha
                            )
                        });
                    }
                }
            } else if let Some(scan) = t.result(
                scan_alpha(&spec, 1e-4, 1e4, ALPHA_SCAN_POINTS, step),
                || label.clone(),
            ) {
                let b = brackets(&scan);
                t.check(b.is_empty(), || {
                    format!("{label}: oracle found bracket {:?}", b[0])
                });
            }
        }
    }
    let elapsed = start.elapsed();
    t.check(elapsed < MATRIX_BUDGET, || {
        format!("runtime {elapsed:?} over {MATRIX_BUDGET:?}")
    });
    t.finish(4, "sign-rule matrix against the shooting oracle", start)
}

/// Linear instances used for the reconstruction checks: `(gamma, tau)` with
/// `a+ = 1`, `a- = 2`, `T = 3`.
pub const RECONSTRUCTION_CASES: [(f64, f64); 4] =
    [(3.0, 1.0), (4.0, 1.0), (-3.0, 2.4), (-5.0, 2.4)];
pub const PERIODIC_CASES: [(f64, f64); 2] = [(3.0, 1.0), (-3.0, 2.4)];

fn solved(
    gamma: f64,
    tau: f64,
    bc: BoundaryCondition,
    q: &QuadratureConfig,
) -> Result<(ProblemSpec, crate::solver::ReducedSolution)> {
    let w = WeightSpec::new(1.0, 2.0, tau, 3.0)?;
    let spec = linear_spec(gamma, w, bc)?;
    let red = solve_reduced(&spec, q)?;
    Ok((spec, red))
}

/// Largest `|x_profile - x_rk|` on the profile grid.
pub fn oracle_deviation(grid: &[f64], x: &[f64], alpha: f64, spec: &ProblemSpec) -> Result<f64> {
    let rk = shoot_sampled(alpha, spec, default_step(spec), grid)?;
    let mut worst: f64 = 0.0;
    let mut j = 0;
    for (&t, &xp) in grid.iter().zip(x) {
        while j < rk.trajectory.len() && rk.trajectory[j].t < t - 1e-12 {
            j += 1;
        }
        let Some(p) = rk.trajectory.get(j) else {
            return Err(Error::Internal(format!("oracle stopped before t = {t}")));
        };
        worst = worst.max((p.x - xp).abs());
    }
    Ok(worst)
}

pub fn criterion_5(q: &QuadratureConfig) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for (gamma, tau) in RECONSTRUCTION_CASES {
        let label = format!("gamma = {gamma}, tau = {tau}");
        let Some((spec, red)) = t.result(solved(gamma, tau, BoundaryCondition::Neumann, q), || {
            label.clone()
        }) else {
            continue;
        };
        let Some(prof) = t.result(reconstruct_neumann(&red, &spec, DEFAULT_POINTS, q), || {
            label.clone()
        }) else {
            continue;
        };
        let d = &prof.diagnostics;
        t.check(d.fd_residual < FD_TOL, || {
            format!("{label}: FD residual {:e}", d.fd_residual)
        });
        let (y0, y1) = d.bc_residuals;
        t.check(y0.abs() < BC_TOL && y1.abs() < BC_TOL, || {
            format!("{label}: boundary residuals ({y0:e}, {y1:e})")
        });
        if let Some(dev) = t.result(
            oracle_deviation(&prof.grid, &prof.x, red.alpha, &spec),
            || label.clone(),
        ) {
            t.check(dev < RK_DEV_TOL, || {
                format!("{label}: RK deviation {dev:e}")
            });
        }
    }
    t.finish(5, "reconstruction fidelity", start)
}

pub fn criterion_6(q: &QuadratureConfig) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for (gamma, tau) in PERIODIC_CASES {
        let label = format!("periodic gamma = {gamma}, tau = {tau}");
        let Some((spec, red)) = t
            .result(solved(gamma, tau, BoundaryCondition::Periodic, q), || {
                label.clone()
            })
        else {
            continue;
        };
        let Some(prof) = t.result(reconstruct(&red, &spec, DEFAULT_POINTS, q), || {
            label.clone()
        }) else {
            continue;
        };
        let n = prof.len();
        let period = spec.weight.period;
        t.check(
            (prof.x[n - 1] - prof.x[0]).abs() <= PERIODIC_TOL
                && (prof.y[n - 1] - prof.y[0]).abs() <= PERIODIC_TOL,
            || format!("{label}: endpoint mismatch"),
        );
        // even symmetry about tau/2, taken modulo T
        let mut sym: f64 = 0.0;
        for i in 0..n {
            let mirror = (tau - prof.grid[i]).rem_euclid(period);
            let j = prof.grid.partition_point(|&s| s < mirror - 1e-12 * period);
            if j < n && (prof.grid[j] - mirror).abs() <= 1e-9 {
                sym = sym.max((prof.x[j] - prof.x[i]).abs());
            } else if mirror > 1e-12 {
                sym = f64::INFINITY;
            }
        }
        t.check(sym <= SYMMETRY_TOL, || {
            format!("{label}: symmetry defect {sym:e}")
        });
        let cell = period / (DEFAULT_POINTS - 1) as f64;
        let sm = prof.summary();
        t.check((sm.t_of_max - 0.5 * tau).abs() <= cell, || {
            format!("{label}: max at t = {}", sm.t_of_max)
        });
        t.check((sm.t_of_min - 0.5 * (period + tau)).abs() <= cell, || {
            format!("{label}: min at t = {}", sm.t_of_min)
        });
        // independent: one RK period from the maximum closes up
        if let Some(s) = t.result(
            shoot_residual(red.alpha, &spec, default_step(&spec)),
            || label.clone(),
        ) {
            match s.residual_periodic {
                Some((dx, dy)) => t
                    .check(dx.abs() <= PERIODIC_TOL && dy.abs() <= PERIODIC_TOL, || {
                        format!("{label}: RK period residual ({dx:e}, {dy:e})")
                    }),
                None => t.check(false, || format!("{label}: RK trajectory collapsed")),
            }
        }
    }
    t.finish(6, "periodic construction", start)
}

/// `y(T)` of `u'' + lambda a(t) u = 0` from `(1, 0)`.
pub fn eigen_residual(spec: &ProblemSpec, lambda: f64) -> Result<f64> {
    let scaled = spec.with_weight(spec.weight.scaled(lambda))?;
    let s = shoot_linear(1.0, &scaled, default_step(&scaled))?;
    s.residual_neumann
        .ok_or_else(|| Error::Internal("linear trajectory blew up".into()))
}

pub fn criterion_7(q: &QuadratureConfig) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let w = matrix_weights()[0];
    if let Some(spec) = t.result(linear_spec(1.0, w, BoundaryCondition::Neumann), || {
        "gamma = 1".into()
    }) {
        if let Some(l1) = t.result(principal_eigenvalue(&spec, q), || "lambda_1".into()) {
            if let Some(r) = t.result(eigen_residual(&spec, l1), || "residual at lambda_1".into()) {
                t.check(r.abs() < EIGEN_RESIDUAL_TOL, || {
                    format!("y(T) = {r:e} at lambda_1 = {l1}")
                });
            }
            if let Some(r) = t.result(eigen_residual(&spec, 1.1 * l1), || {
                "residual at 1.1 lambda_1".into()
            }) {
                t.check(r.abs() > OFF_EIGEN_MIN, || {
                    format!("y(T) = {r:e} at 1.1 lambda_1")
                });
            }
        }
    }
    t.finish(7, "eigenvalue dichotomy", start)
}

/// Grid inside the rho-domain, away from both ends, for monotonicity checks.
pub fn monotonicity_grid(spec: &ProblemSpec, n: usize) -> Vec<f64> {
    let dom = crate::timemap::RhoDomain::for_spec(spec);
    let r = dom.ratio();
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            match dom.side {
                crate::timemap::RhoSide::BelowRatio => r * (0.01 + 0.98 * s),
                crate::timemap::RhoSide::AboveRatio => r * (1.01 + 9.0 * s),
            }
        })
        .collect()
}

pub fn criterion_8(q: &QuadratureConfig) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let w = figure_weight();
    for (p, gamma) in matrix_exponents() {
        let label = format!("p = {p}, gamma = {gamma}");
        let Some(spec) = t.result(
            ProblemSpec::new(operator_for(p), gamma, w, BoundaryCondition::Neumann),
            || label.clone(),
        ) else {
            continue;
        };
        let grid = monotonicity_grid(&spec, 200);
        let values: Result<Vec<f64>> = grid.iter().map(|&r| F_quotient(r, &spec, q)).collect();
        if let Some(v) = t.result(values, || label.clone()) {
            let bad = v.windows(2).position(|w| w[1] <= w[0]);
            t.check(bad.is_none(), || {
                let i = bad.unwrap_or(0);
                format!("{label}: F not increasing at rho = {}", grid[i])
            });
        }
        let Some(e) = t.result(quotient_exponent(&spec), || label.clone()) else {
            continue;
        };
        for &rho in [grid[20], grid[100], grid[180]].iter() {
            let h = 1e-4 * rho;
            let cd = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
                Ok((f(rho + h)? - f(rho - h)?) / (2.0 * h))
            };
            let i1p = cd(&|r| integral_i1(r, &spec, q));
            let i2p = cd(&|r| integral_i2(r, &spec, q));
            let exact = i1_derivative(rho, &spec);
            if let (Some(i1p), Some(i2p), Some(exact)) = (
                t.result(i1p, || label.clone()),
                t.result(i2p, || label.clone()),
                t.result(exact, || label.clone()),
            ) {
                let rel1 = (i1p - exact).abs() / exact.abs();
                t.check(rel1 <= DERIVATIVE_TOL, || {
                    format!("{label}, rho = {rho}: I1' {i1p} vs closed form {exact}")
                });
                let predicted = rho.powf(e - 1.0) * i1p;
                let rel2 = (i2p - predicted).abs() / predicted.abs();
                t.check(rel2 <= DERIVATIVE_TOL, || {
                    format!("{label}, rho = {rho}: I2' {i2p} vs rho^(e-1) I1' {predicted}")
                });
            }
        }
    }
    let gammas: Vec<f64> = (1..190).map(|k| -0.95 + 0.01 * k as f64).collect();
    let k0: Result<Vec<f64>> = gammas.iter().map(|&g| K0(g, 1.0, 2.0, q)).collect();
    if let Some(k0) = t.result(k0, || "K0 grid".into()) {
        let bad = k0.windows(2).position(|w| w[1] >= w[0]);
        t.check(bad.is_none(), || {
            format!("K0 not decreasing at gamma = {}", gammas[bad.unwrap_or(0)])
        });
    }
    t.finish(8, "monotonicity properties", start)
}

pub type Criterion = fn(&QuadratureConfig) -> CriterionReport;

pub const CRITERIA: [Criterion; 8] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
];

/// Runs every criterion in order.
pub fn run_all(q: &QuadratureConfig) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|c| c(q)).collect()
}
