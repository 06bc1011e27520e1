//! Time-map integrals of the reduced two-equation system.
//!
//! With `omega = G(alpha)`, `sigma = G(beta)` and
//! `rho = a- sigma / (a+ omega)`, a positive decreasing Neumann solution
//! exists exactly when the times spent on the two level lines match the two
//! weight intervals. For homogeneous operators and power nonlinearities the
//! `omega` dependence factors out and everything is driven by the two
//! one-dimensional integrals
//!
//! ```text
//! I1(rho) = int_{mu(rho+1)}^{1}         dxi / (|a+ - a+ xi|^{1/p} |xi|^{theta})
//! I2(rho) = int_{a+/a-}^{mu(rho+1)/rho} dxi / (|a- xi - a+|^{1/p} |xi|^{theta})
//! ```
//!
//! with `theta = gamma/(gamma+1)`, and by the quotient
//! `F(rho) = rho^{-1 + theta + 1/p} I1(rho) / I2(rho)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::quadrature::{integrate, integrate_log_from, QuadratureConfig};

/// Distance below which `rho` counts as sitting on the ratio `a-/a+`.
pub const RATIO_EXCLUSION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoSide {
    /// `]0, a-/a+[`, cases (i) and (ii).
    BelowRatio,
    /// `]a-/a+, +inf[`, case (iv).
    AboveRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoDomain {
    pub lower: f64,
    pub upper: f64,
    pub side: RhoSide,
}

impl RhoDomain {
    pub fn for_spec(spec: &ProblemSpec) -> Self {
        let ratio = spec.weight.weight_ratio();
        if spec.gamma() > -1.0 {
            Self {
                lower: 0.0,
                upper: ratio,
                side: RhoSide::BelowRatio,
            }
        } else {
            Self {
                lower: ratio,
                upper: f64::INFINITY,
                side: RhoSide::AboveRatio,
            }
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, rho: f64) -> bool {
        rho > self.lower && rho < self.upper
    }

    /// The endpoint shared by both sides, `a-/a+`.
    pub fn ratio(&self) -> f64 {
        match self.side {
            RhoSide::BelowRatio => self.upper,
            RhoSide::AboveRatio => self.lower,
        }
    }
}

/// `-1 + theta + 1/p`, the power of `rho` in the quotient `F`.
pub fn quotient_exponent(spec: &ProblemSpec) -> Result<f64> {
    let p = spec.require_p("the quotient F")?;
    Ok(-1.0 + spec.nonlinearity.theta() + 1.0 / p)
}

fn check_side(rho: f64, spec: &ProblemSpec, allow_zero: bool) -> Result<()> {
    let dom = RhoDomain::for_spec(spec);
    let ok = match dom.side {
        RhoSide::BelowRatio => (rho > 0.0 || (allow_zero && rho == 0.0)) && rho <= dom.upper,
        RhoSide::AboveRatio => rho >= dom.lower && rho.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "rho = {rho} outside [{}, {}] for gamma = {}",
            dom.lower,
            dom.upper,
            spec.gamma()
        )))
    }
}

/// `I1(rho)`, oriented as written: negative when `gamma < -1`.
pub fn integral_i1(rho: f64, spec: &ProblemSpec, q: &QuadratureConfig) -> Result<f64> {
    let p = spec.require_p("I1")?;
    check_side(rho, spec, true)?;
    let w = &spec.weight;
    let theta = spec.nonlinearity.theta();
    let lower = w.mu() * (rho + 1.0);
    let a = w.a_plus;
    let from_one = integrate_log_from(
        |xi, d| (a * d).powf(-1.0 / p) * xi.powf(-theta),
        1.0,
        lower,
        q,
    )?;
    Ok(-from_one)
}

/// `I2(rho)`, oriented as written: negative when `gamma < -1`.
pub fn integral_i2(rho: f64, spec: &ProblemSpec, q: &QuadratureConfig) -> Result<f64> {
    let p = spec.require_p("I2")?;
    check_side(rho, spec, false)?;
    let w = &spec.weight;
    let theta = spec.nonlinearity.theta();
    let c = w.a_plus / w.a_minus;
    let upper = w.mu() * (rho + 1.0) / rho;
    let am = w.a_minus;
    integrate_log_from(
        |xi, d| (am * d).powf(-1.0 / p) * xi.powf(-theta),
        c,
        upper,
        q,
    )
}

/// Closed-form `dI1/drho`:
/// `-mu^{1 - theta - 1/p} / (|a- - a+ rho|^{1/p} (rho+1)^{theta})`.
pub fn i1_derivative(rho: f64, spec: &ProblemSpec) -> Result<f64> {
    let p = spec.require_p("I1'")?;
    let w = &spec.weight;
    let theta = spec.nonlinearity.theta();
    Ok(-w.mu().powf(1.0 - theta - 1.0 / p)
        / ((w.a_minus - w.a_plus * rho).abs().powf(1.0 / p) * (rho + 1.0).powf(theta)))
}

/// Closed-form `dI2/drho = rho^{-2 + theta + 1/p} dI1/drho`.
pub fn i2_derivative(rho: f64, spec: &ProblemSpec) -> Result<f64> {
    let e = quotient_exponent(spec)?;
    Ok(rho.powf(e - 1.0) * i1_derivative(rho, spec)?)
}

/// `F_p(rho) = rho^{-1 + theta + 1/p} I1(rho) / I2(rho)` on the open domain.
#[allow(non_snake_case)]
pub fn F_quotient(rho: f64, spec: &ProblemSpec, q: &QuadratureConfig) -> Result<f64> {
    let e = quotient_exponent(spec)?;
    let dom = RhoDomain::for_spec(spec);
    let ratio = dom.ratio();
    if !dom.contains(rho) || (rho - ratio).abs() <= RATIO_EXCLUSION * ratio.max(1.0) {
        return Err(Error::Domain(format!(
            "rho = {rho} is not strictly inside ]{}, {}[ (use the limit values at the boundary)",
            dom.lower, dom.upper
        )));
    }
    let i1 = integral_i1(rho, spec, q)?;
    let i2 = integral_i2(rho, spec, q)?;
    Ok(rho.powf(e) * i1 / i2)
}

/// `F_quotient` at every point of `rhos`, evaluated in parallel and returned
/// in input order.
#[allow(non_snake_case)]
pub fn F_curve(rhos: &[f64], spec: &ProblemSpec, q: &QuadratureConfig) -> Vec<Result<f64>> {
    rhos.par_iter().map(|&r| F_quotient(r, spec, q)).collect()
}

/// Analytic limits of `F` at the two ends of its domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FLimits {
    /// Limit as `rho -> a-/a+`; always `a-/a+`.
    pub at_ratio: f64,
    /// Limit at `0+` (gamma > -1) or `+inf` (gamma < -1).
    pub at_far_end: f64,
}

#[allow(non_snake_case)]
pub fn F_limits(spec: &ProblemSpec, q: &QuadratureConfig) -> Result<FLimits> {
    let p = spec.require_p("F limits")?;
    let w = &spec.weight;
    let gamma = spec.gamma();
    let ratio = w.weight_ratio();
    let far = if gamma < -1.0 {
        f64::INFINITY
    } else if gamma == 0.0 {
        ratio
    } else if gamma >= p - 1.0 {
        0.0
    } else if p == 2.0 {
        K0(gamma, w.a_plus, w.a_minus, q)?
    } else {
        return Err(Error::Unsupported(format!(
            "rho -> 0+ limit for p = {p} and gamma in ]-1, p-1[ (only derived for p = 2)"
        )));
    };
    Ok(FLimits {
        at_ratio: ratio,
        at_far_end: far,
    })
}

/// `lim_{rho -> 0+} F_2(rho)` for `gamma` in `]-1, 1[`.
#[allow(non_snake_case)]
pub fn K0(gamma: f64, a_plus: f64, a_minus: f64, q: &QuadratureConfig) -> Result<f64> {
    if !(gamma > -1.0 && gamma < 1.0) {
        return Err(Error::Domain(format!(
            "K0 is defined for gamma in ]-1, 1[, got {gamma}"
        )));
    }
    if !(a_plus > 0.0 && a_minus > 0.0) {
        return Err(Error::InvalidParameter("weights must be positive".into()));
    }
    let theta = gamma / (gamma + 1.0);
    let kappa = (1.0 - gamma) / (2.0 * (gamma + 1.0));
    let mu = a_plus / (a_plus + a_minus);
    let integral = -integrate_log_from(|xi, d| d.powf(-0.5) * xi.powf(-theta), 1.0, mu, q)?;
    Ok(kappa * ((a_plus + a_minus) / a_plus).powf(kappa) * (a_minus / a_plus).sqrt() * integral)
}

/// `|gamma+1|^{-theta} / (p/(p-1))^{1/p}`, the constant of the first equation.
pub fn first_equation_constant(spec: &ProblemSpec) -> Result<f64> {
    let p = spec.require_p("the first reduced equation")?;
    let gamma = spec.gamma();
    Ok((gamma + 1.0).abs().powf(-spec.nonlinearity.theta()) / (p / (p - 1.0)).powf(1.0 / p))
}

/// `(F_I(omega, rho), F_II(omega, rho))` through the `I1`, `I2` factorisation.
pub fn reduced_maps(
    omega: f64,
    rho: f64,
    spec: &ProblemSpec,
    q: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let p = spec.require_p("the reduced maps")?;
    if omega == 0.0 || omega.signum() != spec.nonlinearity.sign() {
        return Err(Error::Domain(format!(
            "omega = {omega} is not in the range of G"
        )));
    }
    let c = first_equation_constant(spec)?;
    let k = 1.0 - spec.nonlinearity.theta() - 1.0 / p;
    let scale = c * omega.signum() * omega.abs().powf(k);
    let i1 = integral_i1(rho, spec, q)?;
    let i2 = integral_i2(rho, spec, q)?;
    Ok((scale * i1, scale * rho.powf(k) * i2))
}

/// Time to travel the positive-weight level line from `theta = omega - drop`
/// up to `omega` (in `G`-coordinates), for any kernel:
/// `int_{omega-drop}^{omega} dtheta / (-L_h(a+ (omega - theta)) L_g(theta))`.
pub fn time_on_positive_part(
    omega: f64,
    drop: f64,
    spec: &ProblemSpec,
    q: &QuadratureConfig,
) -> Result<f64> {
    let a = spec.weight.a_plus;
    let kernel = &spec.kernel;
    let g = spec.nonlinearity;
    integrate(
        |n| 1.0 / (-kernel.l_h(a * n.from_right) * g.l_g(n.x)),
        omega - drop,
        omega,
        q,
    )
}

/// Time to travel the negative-weight level line from `sigma` up to
/// `sigma + rise`:
/// `int_{sigma}^{sigma+rise} dtheta / (-L_h(a- (theta - sigma)) L_g(theta))`.
pub fn time_on_negative_part(
    sigma: f64,
    rise: f64,
    spec: &ProblemSpec,
    q: &QuadratureConfig,
) -> Result<f64> {
    let a = spec.weight.a_minus;
    let kernel = &spec.kernel;
    let g = spec.nonlinearity;
    integrate(
        |n| 1.0 / (-kernel.l_h(a * n.from_left) * g.l_g(n.x)),
        sigma,
        sigma + rise,
        q,
    )
}

/// `(M_I(omega, sigma), M_II(omega, sigma))` for an arbitrary kernel.
#[allow(non_snake_case)]
pub fn generic_M(
    omega: f64,
    sigma: f64,
    spec: &ProblemSpec,
    q: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let sign = spec.nonlinearity.sign();
    let in_range = |v: f64| v != 0.0 && v.is_finite() && v.signum() == sign;
    if !(omega > sigma) {
        return Err(Error::Domain(format!(
            "(omega, sigma) = ({omega}, {sigma}) needs omega > sigma"
        )));
    }
    if !in_range(omega) || !in_range(sigma) {
        return Err(Error::Domain(format!(
            "(omega, sigma) = ({omega}, {sigma}) not in G(]0, inf[)"
        )));
    }
    let mu = spec.weight.mu();
    let star = mu * omega + (1.0 - mu) * sigma;
    let m1 = time_on_positive_part(omega, omega - star, spec, q)?;
    let m2 = time_on_negative_part(sigma, star - sigma, spec, q)?;
    Ok((m1, m2))
}
