//! Existence classification, reduced-system solve, solution counting and
//! the eigenvalue / bifurcation curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::OperatorKind;
use crate::problem::{BoundaryCondition, ProblemSpec};
use crate::quadrature::QuadratureConfig;
use crate::timemap::{
    first_equation_constant, generic_M, integral_i1, quotient_exponent, F_limits, F_quotient,
    RhoDomain, RhoSide, K0, RATIO_EXCLUSION,
};

/// Bracket width at which the bisection on `rho` stops.
pub const RHO_TOL: f64 = 1e-12;
const GAMMA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceStatus {
    UniqueExists,
    NoneExists,
    EigenvalueDegenerate,
    OutsideTheory,
}

/// Which statement decided the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionRule {
    /// `gamma * abar < 0` in the uniqueness ranges of the exponent.
    SignRule,
    /// `K0(gamma) < tau/(T-tau) < a-/a+`, `gamma` in `]0,1[`.
    Cond41,
    /// `a-/a+ < tau/(T-tau) < K0(gamma)`, `gamma` in `]-1,0[` (sufficient only).
    Cond42,
    /// `abar > 0`, `gamma` in `]-3,-1[`.
    Prop43,
    /// Necessary sign condition on `abar` alone.
    NecessarySign,
    /// `gamma = p - 1`: homogeneous (eigenvalue) case.
    EigenvalueCase,
    /// `gamma = 0`: `F` is constant.
    ConstantQuotient,
    /// Non-homogeneous operator; no reduced-system theory available.
    NonHomogeneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub rule: ConditionRule,
    pub statement: String,
    pub holds: bool,
    /// `Some(true)`/`Some(false)` when existence of a positive solution is
    /// settled, `None` when it is open.
    pub existence: Option<bool>,
    pub gamma: f64,
    pub mean_weight: f64,
    pub target_ratio: f64,
    pub weight_ratio: f64,
    pub k0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceVerdict {
    pub status: ExistenceStatus,
    pub condition_report: ConditionReport,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= GAMMA_EPS * a.abs().max(b.abs()).max(1.0)
}

/// Existence/uniqueness verdict for a problem, following the sign rule in
/// the uniqueness ranges of `gamma` and the `K0` conditions for `p = 2`.
pub fn classify_existence(spec: &ProblemSpec) -> Result<ExistenceVerdict> {
    classify_existence_with(spec, &QuadratureConfig::default())
}

pub fn classify_existence_with(
    spec: &ProblemSpec,
    q: &QuadratureConfig,
) -> Result<ExistenceVerdict> {
    let gamma = spec.gamma();
    let w = &spec.weight;
    let abar = w.mean_weight();
    let r = w.target_ratio();
    let ratio = w.weight_ratio();
    let report = |rule, statement: String, holds, existence, k0| ConditionReport {
        rule,
        statement,
        holds,
        existence,
        gamma,
        mean_weight: abar,
        target_ratio: r,
        weight_ratio: ratio,
        k0,
    };
    let verdict = |status, condition_report| ExistenceVerdict {
        status,
        condition_report,
    };
    // abar == 0 up to rounding of a+ tau - a- (T - tau)
    let abar_zero = abar.abs() <= 1e-12 * (w.a_plus * w.tau + w.a_minus * (w.period - w.tau));
    let necessary = if gamma > 0.0 { abar < 0.0 } else { abar > 0.0 } && !abar_zero;

    let Some(p) = spec.p() else {
        return Ok(verdict(
            ExistenceStatus::OutsideTheory,
            report(
                ConditionRule::NonHomogeneous,
                format!(
                    "non-homogeneous operator; necessary condition gamma*abar < 0 is {}",
                    if necessary { "satisfied" } else { "violated" }
                ),
                necessary,
                if necessary { None } else { Some(false) },
                None,
            ),
        ));
    };

    if gamma == 0.0 {
        return Ok(if abar_zero {
            verdict(
                ExistenceStatus::EigenvalueDegenerate,
                report(
                    ConditionRule::ConstantQuotient,
                    format!("gamma = 0 and tau/(T-tau) = a-/a+ = {ratio}: a one-parameter family"),
                    true,
                    Some(true),
                    None,
                ),
            )
        } else {
            verdict(
                ExistenceStatus::NoneExists,
                report(
                    ConditionRule::ConstantQuotient,
                    format!("gamma = 0 needs abar = 0, got abar = {abar}"),
                    false,
                    Some(false),
                    None,
                ),
            )
        });
    }

    if close(gamma, p - 1.0) {
        return Ok(verdict(
            ExistenceStatus::EigenvalueDegenerate,
            report(
                ConditionRule::EigenvalueCase,
                format!(
                    "gamma = p - 1 = {}: solvable only on the principal eigenvalue",
                    p - 1.0
                ),
                necessary,
                None,
                None,
            ),
        ));
    }

    let boundary = (1.0 - 2.0 * p) / (p - 1.0);
    if gamma < boundary || close(gamma, boundary) || gamma > p - 1.0 {
        let holds = gamma * abar < 0.0 && !abar_zero;
        return Ok(verdict(
            if holds {
                ExistenceStatus::UniqueExists
            } else {
                ExistenceStatus::NoneExists
            },
            report(
                ConditionRule::SignRule,
                format!("gamma * abar = {} < 0", gamma * abar),
                holds,
                Some(holds),
                None,
            ),
        ));
    }

    if p == 2.0 {
        if gamma > 0.0 && gamma < 1.0 {
            let k0 = K0(gamma, w.a_plus, w.a_minus, q)?;
            let holds = k0 < r && r < ratio;
            return Ok(verdict(
                if holds {
                    ExistenceStatus::UniqueExists
                } else {
                    ExistenceStatus::NoneExists
                },
                report(
                    ConditionRule::Cond41,
                    format!("K0 = {k0} < tau/(T-tau) = {r} < a-/a+ = {ratio}"),
                    holds,
                    Some(holds),
                    Some(k0),
                ),
            ));
        }
        if gamma > -1.0 && gamma < 0.0 {
            let k0 = K0(gamma, w.a_plus, w.a_minus, q)?;
            let holds = ratio < r && r < k0;
            let existence = if holds {
                Some(true)
            } else if !necessary {
                Some(false)
            } else {
                None
            };
            let status = if existence == Some(false) {
                ExistenceStatus::NoneExists
            } else {
                ExistenceStatus::OutsideTheory
            };
            return Ok(verdict(
                status,
                report(
                    ConditionRule::Cond42,
                    format!("a-/a+ = {ratio} < tau/(T-tau) = {r} < K0 = {k0}"),
                    holds,
                    existence,
                    Some(k0),
                ),
            ));
        }
        // gamma in ]-3, -1[
        let holds = abar > 0.0 && !abar_zero;
        return Ok(verdict(
            if holds {
                ExistenceStatus::OutsideTheory
            } else {
                ExistenceStatus::NoneExists
            },
            report(
                ConditionRule::Prop43,
                format!("abar = {abar} > 0"),
                holds,
                Some(holds),
                None,
            ),
        ));
    }

    Ok(verdict(
        if necessary {
            ExistenceStatus::OutsideTheory
        } else {
            ExistenceStatus::NoneExists
        },
        report(
            ConditionRule::NecessarySign,
            format!("gamma * abar = {} < 0 (necessary only)", gamma * abar),
            necessary,
            if necessary { None } else { Some(false) },
            None,
        ),
    ))
}

/// Solution `(omega, rho)` of the reduced system and the recovered phase-plane data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSolution {
    pub rho: f64,
    pub omega: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub x_star: f64,
    pub y_star: f64,
    /// `I1(rho)` at the solution.
    pub i1: f64,
    /// `(M_I - t1, M_II - t2)` evaluated through the kernel-generic integrals.
    pub residuals: (f64, f64),
    /// Times `(t1, t2)` the two equations were solved for.
    pub targets: (f64, f64),
    /// Start of the Neumann window (`0`, or `tau/2` for the periodic problem).
    pub window_start: f64,
    pub bc: BoundaryCondition,
    /// Number of roots of the quotient equation seen by the search.
    pub roots_found: usize,
}

/// Finds `rho` with `F(rho) = target` assuming `F` is increasing between its
/// analytic limits.
pub fn find_rho_monotone(spec: &ProblemSpec, target: f64, q: &QuadratureConfig) -> Result<f64> {
    let lim = F_limits(spec, q)?;
    let dom = RhoDomain::for_spec(spec);
    let ratio = dom.ratio();
    let (low_lim, high_lim) = match dom.side {
        RhoSide::BelowRatio => (lim.at_far_end, lim.at_ratio),
        RhoSide::AboveRatio => (lim.at_ratio, lim.at_far_end),
    };
    if !(low_lim < target && target < high_lim) {
        return Err(Error::NoSolution(format!(
            "tau/(T-tau) = {target} outside the range ]{low_lim}, {high_lim}[ of F"
        )));
    }
    let f = |rho: f64| F_quotient(rho, spec, q).map(|v| v - target);
    let (mut lo, mut hi) = match dom.side {
        RhoSide::BelowRatio => {
            let mut lo = 0.5 * ratio;
            let mut n = 0;
            while f(lo)? >= 0.0 {
                lo *= 0.5;
                n += 1;
                if n > 1000 || lo == 0.0 {
                    return Err(Error::NoSolution(format!(
                        "no lower bracket for F = {target} above rho = {lo}"
                    )));
                }
            }
            let mut gap = 0.5;
            let mut hi = ratio * (1.0 - gap);
            while f(hi)? <= 0.0 {
                gap *= 0.5;
                hi = ratio * (1.0 - gap);
                if ratio - hi <= 2.0 * RATIO_EXCLUSION * ratio.max(1.0) {
                    return Err(Error::NoSolution(format!(
                        "F = {target} is too close to the limit a-/a+ = {ratio} to bracket"
                    )));
                }
            }
            (lo, hi)
        }
        RhoSide::AboveRatio => {
            let start = ratio * (1.0 + 1e-3);
            if f(start)? < 0.0 {
                let mut lo = start;
                let mut hi = 2.0 * start;
                while f(hi)? <= 0.0 {
                    lo = hi;
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return Err(Error::NoSolution(format!(
                            "no upper bracket for F = {target}"
                        )));
                    }
                }
                (lo, hi)
            } else {
                let mut gap = 1e-3;
                let hi = start;
                let mut lo = ratio * (1.0 + 0.5 * gap);
                while f(lo)? >= 0.0 {
                    gap *= 0.5;
                    lo = ratio * (1.0 + gap);
                    if lo - ratio <= 2.0 * RATIO_EXCLUSION * ratio.max(1.0) {
                        return Err(Error::NoSolution(format!(
                            "F = {target} is too close to the limit a-/a+ = {ratio} to bracket"
                        )));
                    }
                }
                (lo, hi)
            }
        }
    };
    bisect(&f, &mut lo, &mut hi)
}

/// Bisection on an increasing-crossing bracket (`f(lo) < 0 < f(hi)` or the reverse).
fn bisect<F>(f: &F, lo: &mut f64, hi: &mut f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let f_lo = f(*lo)?;
    let lo_negative = f_lo < 0.0;
    for _ in 0..200 {
        let tol = RHO_TOL.max(4.0 * f64::EPSILON * hi.abs());
        if *hi - *lo <= tol {
            break;
        }
        let mid = 0.5 * (*lo + *hi);
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if (v < 0.0) == lo_negative {
            *lo = mid;
        } else {
            *hi = mid;
        }
    }
    Ok(0.5 * (*lo + *hi))
}

/// Solves the reduced system for `(omega, rho)` and recovers
/// `(alpha, beta, x*, y*)`.
///
/// The quotient equation `F(rho) = t1/t2` is solved by bracketed bisection;
/// the first equation is a pure power of `|omega|` and is inverted in closed
/// form. Periodic problems are solved on the half-window with targets
/// `(tau/2, (T-tau)/2)`.
pub fn solve_reduced(spec: &ProblemSpec, q: &QuadratureConfig) -> Result<ReducedSolution> {
    let p = spec.require_p("solve_reduced")?;
    let gamma = spec.gamma();
    let verdict = classify_existence_with(spec, q)?;
    let (t1, t2) = spec.targets();
    let target = t1 / t2;

    let (rho, roots_found) = match verdict.status {
        ExistenceStatus::EigenvalueDegenerate => {
            return Err(if gamma == 0.0 {
                Error::DegenerateFamily(format!(
                    "F is identically a-/a+ at gamma = 0; rho is indeterminate ({})",
                    verdict.condition_report.statement
                ))
            } else {
                Error::EigenvalueDegenerate(format!(
                    "exponent 1/(gamma+1) - 1/p vanishes at gamma = p - 1 = {}",
                    p - 1.0
                ))
            });
        }
        ExistenceStatus::NoneExists => {
            return Err(Error::NoSolution(format!(
                "condition violated: {}",
                verdict.condition_report.statement
            )));
        }
        ExistenceStatus::UniqueExists => (find_rho_monotone(spec, target, q)?, 1),
        ExistenceStatus::OutsideTheory => {
            let count = count_solutions(spec, DEFAULT_SCAN_POINTS, q)?;
            match count.crossings.first() {
                Some(&rho) => (rho, count.count),
                None => {
                    return Err(Error::NoSolution(format!(
                        "no crossing of F = {target} found on the scan grid ({})",
                        verdict.condition_report.statement
                    )))
                }
            }
        }
    };

    let sol = recover(spec, rho, q, roots_found)?;

    let abar = spec.weight.mean_weight();
    if (gamma > 0.0 && abar >= 0.0) || (gamma < 0.0 && abar <= 0.0) {
        return Err(Error::Internal(format!(
            "solution found with gamma = {gamma} and abar = {abar}, violating the necessary sign condition"
        )));
    }
    Ok(sol)
}

/// Builds the full [`ReducedSolution`] from a root `rho` of the quotient equation.
pub fn recover(
    spec: &ProblemSpec,
    rho: f64,
    q: &QuadratureConfig,
    roots_found: usize,
) -> Result<ReducedSolution> {
    let p = spec.require_p("recover")?;
    let g = spec.nonlinearity;
    let w = &spec.weight;
    let (t1, t2) = spec.targets();
    let k = 1.0 / (g.gamma() + 1.0) - 1.0 / p;
    if k == 0.0 {
        return Err(Error::EigenvalueDegenerate(
            "first equation does not depend on omega".into(),
        ));
    }
    let i1 = integral_i1(rho, spec, q)?;
    let c = first_equation_constant(spec)?;
    let omega = g.sign() * (t1 / (c * i1.abs())).powf(1.0 / k);
    let sigma = w.a_plus / w.a_minus * omega * rho;
    let mu = w.mu();
    let star = mu * omega * (rho + 1.0);
    let alpha = g.big_g_inv(omega);
    let beta = g.big_g_inv(sigma);
    let x_star = g.big_g_inv(star);
    // a+ (G(alpha) - G(x*)) = a+ omega (1 - mu (rho+1)) = a+ omega mu (a-/a+ - rho)
    let drop = w.a_plus * omega * mu * (w.weight_ratio() - rho);
    let y_star = spec.kernel.big_h_inv_left(drop);
    let (m1, m2) = generic_M(omega, sigma, spec, q)?;
    Ok(ReducedSolution {
        rho,
        omega,
        sigma,
        alpha,
        beta,
        x_star,
        y_star,
        i1,
        residuals: (m1 - t1, m2 - t2),
        targets: (t1, t2),
        window_start: spec.window_start(),
        bc: spec.bc,
        roots_found,
    })
}

pub const DEFAULT_SCAN_POINTS: usize = 400;

/// Crossings of `F(rho) = tau/(T-tau)` found on a scan of the rho-domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCount {
    pub count: usize,
    pub crossings: Vec<f64>,
    /// Grid points skipped because the quadrature failed there.
    pub skipped: usize,
    pub target: f64,
}

/// Scan grid of the rho-domain, log-spaced towards both ends.
///
/// Below the ratio: `rho = r / (1 + exp(-z))`, `z` uniform in
/// `[-ln 1e9, ln 1e9]`. Above: `rho = r (1 + exp(z))`, `z` uniform in
/// `[ln 1e-9, ln 1e7]`.
pub fn scan_grid(spec: &ProblemSpec, n: usize) -> Vec<f64> {
    let dom = RhoDomain::for_spec(spec);
    let r = dom.ratio();
    let n = n.max(2);
    let (z0, z1) = match dom.side {
        RhoSide::BelowRatio => (-(1e9f64).ln(), (1e9f64).ln()),
        RhoSide::AboveRatio => ((1e-9f64).ln(), (1e7f64).ln()),
    };
    (0..n)
        .map(|i| {
            let z = z0 + (z1 - z0) * i as f64 / (n - 1) as f64;
            match dom.side {
                RhoSide::BelowRatio => r / (1.0 + (-z).exp()),
                RhoSide::AboveRatio => r * (1.0 + z.exp()),
            }
        })
        .collect()
}

/// Counts sign changes of `F(rho) - tau/(T-tau)` on a `grid_size`-point scan,
/// each refined by bisection.
pub fn count_solutions(
    spec: &ProblemSpec,
    grid_size: usize,
    q: &QuadratureConfig,
) -> Result<SolutionCount> {
    spec.require_p("count_solutions")?;
    if spec.gamma() == 0.0 {
        return Err(Error::DegenerateFamily(
            "F is constant at gamma = 0; crossings are not isolated".into(),
        ));
    }
    quotient_exponent(spec)?;
    let target = spec.weight.target_ratio();
    let grid = scan_grid(spec, grid_size);
    let values: Vec<Option<f64>> = grid
        .par_iter()
        .map(|&rho| F_quotient(rho, spec, q).ok().map(|v| v - target))
        .collect();
    let skipped = values.iter().filter(|v| v.is_none()).count();
    if skipped > 0 {
        log::warn!("count_solutions: {skipped} grid points skipped after quadrature failures");
    }

    let f = |rho: f64| F_quotient(rho, spec, q).map(|v| v - target);
    let mut crossings = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for (&rho, v) in grid.iter().zip(values.iter()) {
        let Some(v) = *v else { continue };
        if v == 0.0 {
            crossings.push(rho);
            prev = None;
            continue;
        }
        if let Some((r0, v0)) = prev {
            if (v0 < 0.0) != (v < 0.0) {
                let (mut lo, mut hi) = (r0, rho);
                crossings.push(bisect(&f, &mut lo, &mut hi)?);
            }
        }
        prev = Some((rho, v));
    }
    Ok(SolutionCount {
        count: crossings.len(),
        crossings,
        skipped,
        target,
    })
}

/// A point `(lambda, omega)` on the bifurcation curve of
/// `u'' + lambda a(t) u^gamma = 0`. For `gamma = 1` only the principal
/// eigenvalue is returned and `omega`, `alpha` are free (`None`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub lambda: f64,
    pub omega: Option<f64>,
    pub alpha: Option<f64>,
}

fn require_linear_monotone(spec: &ProblemSpec) -> Result<()> {
    if spec.p() != Some(2.0) {
        return Err(Error::Unsupported(
            "the bifurcation curve is implemented for p = 2".into(),
        ));
    }
    let gamma = spec.gamma();
    if gamma > -3.0 && gamma < 1.0 {
        return Err(Error::Domain(format!(
            "gamma = {gamma}: rho is unique only for gamma <= -3 or gamma >= 1"
        )));
    }
    Ok(())
}

/// Principal eigenvalue `lambda_1 = (I1(rho)/(2 t1))^2` of `u'' + lambda a(t) u = 0`.
pub fn principal_eigenvalue(spec: &ProblemSpec, q: &QuadratureConfig) -> Result<f64> {
    require_linear_monotone(spec)?;
    if spec.gamma() != 1.0 {
        return Err(Error::Domain(
            "the principal eigenvalue needs gamma = 1".into(),
        ));
    }
    let (t1, t2) = spec.targets();
    let rho = find_rho_monotone(spec, t1 / t2, q)?;
    let i1 = integral_i1(rho, spec, q)?;
    Ok((i1 / (2.0 * t1)).powi(2))
}

/// Whether `u'' + lambda a(t) u = 0` has a positive solution, which happens
/// exactly on the principal eigenvalue.
pub fn linear_problem_solvable(
    spec: &ProblemSpec,
    lambda: f64,
    q: &QuadratureConfig,
) -> Result<bool> {
    let l1 = principal_eigenvalue(spec, q)?;
    Ok((lambda - l1).abs() <= 1e-9 * l1)
}

pub fn bifurcation_curve(
    spec: &ProblemSpec,
    lambda_grid: &[f64],
    q: &QuadratureConfig,
) -> Result<Vec<BifurcationPoint>> {
    require_linear_monotone(spec)?;
    let gamma = spec.gamma();
    if gamma == 1.0 {
        let lambda = principal_eigenvalue(spec, q)?;
        return Ok(vec![BifurcationPoint {
            lambda,
            omega: None,
            alpha: None,
        }]);
    }
    let (t1, t2) = spec.targets();
    let rho = find_rho_monotone(spec, t1 / t2, q)?;
    let i1 = integral_i1(rho, spec, q)?;
    let g = spec.nonlinearity;
    let base = (2.0f64.sqrt() * t1 / ((gamma + 1.0).abs().powf(-g.theta()) * i1.abs()))
        .powf(2.0 * (gamma + 1.0) / (1.0 - gamma));
    let expo = (gamma + 1.0) / (1.0 - gamma);
    lambda_grid
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "lambda = {lambda} must be positive"
                )));
            }
            let omega = g.sign() * base * lambda.powf(expo);
            Ok(BifurcationPoint {
                lambda,
                omega: Some(omega),
                alpha: Some(g.big_g_inv(omega)),
            })
        })
        .collect()
}

/// Kernel kind short-hand used in reports.
pub fn operator_label(kind: OperatorKind) -> String {
    match kind {
        OperatorKind::Linear => "linear".into(),
        OperatorKind::PLaplacian { p } => format!("p-laplacian(p={p})"),
        OperatorKind::Minkowski => "minkowski".into(),
    }
}
