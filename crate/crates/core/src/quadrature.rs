//! Double-exponential (tanh-sinh) quadrature.
//!
//! The integrand receives, besides the abscissa, the distances of the node
//! to both endpoints. These are computed from the transformation itself and
//! stay accurate where `x` has already rounded onto an endpoint, so
//! algebraic endpoint singularities such as `|1 - x|^{-1/p}` can be evaluated
//! without cancellation.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `t` of the transformed variable. At `t = 6.5` the node distance to
/// the endpoint is below `1e-300` of the half width.
const T_MAX: f64 = 6.5;
const MIN_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_levels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_levels: 12,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_levels < MIN_LEVELS {
            return Err(Error::InvalidParameter(format!(
                "max_levels must be at least {MIN_LEVELS}"
            )));
        }
        Ok(())
    }

    /// Same config with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }
}

/// A quadrature node handed to the integrand.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: f64,
    /// `x - a`, accurate near `a`.
    pub from_left: f64,
    /// `b - x`, accurate near `b`.
    pub from_right: f64,
}

/// Oriented integral of `f` from `a` to `b` (`a > b` flips the sign).
///
/// The node distances are always measured on the sorted interval, so
/// `from_left` is the distance to `min(a, b)`.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(Node) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a < b {
        tanh_sinh(&f, a, b, cfg)
    } else {
        tanh_sinh(&f, b, a, cfg).map(|v| -v)
    }
}

/// Oriented integral from `c` to `e` (both positive) of `f(xi, |xi - c|)`,
/// evaluated after the substitution `xi = c exp(v)`.
///
/// `c` is the singular endpoint. The logarithmic map keeps very long
/// intervals (large `e / c`) cheap and the distance `|xi - c| = c |expm1(v)|`
/// is exact near `c`.
pub fn integrate_log_from<F>(f: F, c: f64, e: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    if !(c > 0.0 && e > 0.0) {
        return Err(Error::Domain(format!(
            "logarithmic substitution needs positive limits, got {c} and {e}"
        )));
    }
    if c == e {
        return Ok(0.0);
    }
    let span = (e / c).ln().abs();
    if e > c {
        tanh_sinh(
            &|n: Node| {
                let v = n.from_left;
                let xi = c * v.exp();
                f(xi, c * v.exp_m1()) * xi
            },
            0.0,
            span,
            cfg,
        )
    } else {
        tanh_sinh(
            &|n: Node| {
                let v = n.from_left;
                let xi = c * (-v).exp();
                f(xi, -c * (-v).exp_m1()) * xi
            },
            0.0,
            span,
            cfg,
        )
        .map(|v| -v)
    }
}

fn tanh_sinh<F>(f: &F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(Node) -> f64,
{
    cfg.validate()?;
    let half = 0.5 * (b - a);
    let center = a + half;
    let width = b - a;

    // Sum over the nodes at t = k*h for k in `ks` (t >= 0; mirrored pairs).
    let eval_at = |t: f64| -> Result<Option<f64>> {
        if t == 0.0 {
            let v = f(Node {
                x: center,
                from_left: half,
                from_right: half,
            });
            return checked(v, t).map(|v| Some(half * FRAC_PI_2 * v));
        }
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u).exp();
        let dist = half * 2.0 * e / (1.0 + e);
        let weight = half * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if dist <= 0.0 || weight == 0.0 || !dist.is_normal() {
            return Ok(None);
        }
        let right = f(Node {
            x: b - dist,
            from_left: width - dist,
            from_right: dist,
        });
        let left = f(Node {
            x: a + dist,
            from_left: dist,
            from_right: width - dist,
        });
        let s = checked(right, t)? + checked(left, -t)?;
        Ok(Some(weight * s))
    };

    // Level 0: integer t.
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        let t = k as f64;
        if t > T_MAX {
            break;
        }
        match eval_at(t)? {
            Some(v) => sum += v,
            None => break,
        }
        k += 1;
    }
    let mut h = 1.0;
    let mut estimate = sum * h;
    let mut previous = f64::NAN;

    for level in 1..=cfg.max_levels {
        h *= 0.5;
        let mut k = 1usize;
        loop {
            let t = k as f64 * h;
            if t > T_MAX {
                break;
            }
            match eval_at(t)? {
                Some(v) => sum += v,
                None => break,
            }
            k += 2;
        }
        previous = estimate;
        estimate = sum * h;
        let diff = (estimate - previous).abs();
        if level >= MIN_LEVELS && diff <= cfg.abs_tol.max(cfg.rel_tol * estimate.abs()) {
            return Ok(estimate);
        }
    }
    Err(Error::Quadrature {
        last: estimate,
        previous,
    })
}

fn checked(v: f64, t: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "integrand is not finite ({v}) at transformed node t = {t}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn polynomial() {
        let v = integrate(|n| n.x * n.x, 0.0, 3.0, &cfg()).unwrap();
        assert_relative_eq!(v, 9.0, max_relative = 1e-12);
    }

    #[test]
    fn orientation() {
        let v = integrate(|n| n.x.exp(), 1.0, 0.0, &cfg()).unwrap();
        assert_relative_eq!(v, -(1f64.exp() - 1.0), max_relative = 1e-12);
        assert_eq!(integrate(|n| n.x, 2.0, 2.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn inverse_sqrt_endpoint() {
        // int_{1/3}^{1} dx / sqrt(1 - x) = 2 sqrt(2/3)
        let v = integrate(|n| 1.0 / n.from_right.sqrt(), 1.0 / 3.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(v, 2.0 * (2.0f64 / 3.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn strong_algebraic_singularity() {
        // int_0^1 x^{-0.9} dx = 10
        let v = integrate(|n| n.from_left.powf(-0.9), 0.0, 1.0, &cfg()).unwrap();
        assert_relative_eq!(v, 10.0, max_relative = 1e-9);
    }

    #[test]
    fn log_substitution_long_interval() {
        // int_1^{1e8} dx / ((x - 1)^{1/2} x) = 2 atan(sqrt(x - 1)) |_1^{1e8}
        let e = 1e8;
        let v = integrate_log_from(|xi, d| 1.0 / (d.sqrt() * xi), 1.0, e, &cfg()).unwrap();
        assert_relative_eq!(v, 2.0 * (e - 1.0f64).sqrt().atan(), max_relative = 1e-10);
        // reversed orientation
        let w = integrate_log_from(|_, d| 1.0 / d.sqrt(), 1.0, 0.25, &cfg()).unwrap();
        assert_relative_eq!(w, -2.0 * 0.75f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let tight = QuadratureConfig {
            abs_tol: 1e-300,
            rel_tol: 1e-300,
            max_levels: 3,
        };
        let err = integrate(|n| (n.x * 40.0).sin().abs(), 0.0, 1.0, &tight).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn rejects_bad_config() {
        let bad = QuadratureConfig {
            max_levels: 2,
            ..Default::default()
        };
        assert!(integrate(|n| n.x, 0.0, 1.0, &bad).is_err());
    }
}
