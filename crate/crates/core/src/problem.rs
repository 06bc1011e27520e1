//! Problem data: stepwise weight, boundary condition, operator and nonlinearity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{make_operator, OperatorKernel, OperatorKind, PowerNonlinearity};

/// Stepwise weight `a(t) = a_plus` on `[0, tau[` and `-a_minus` on `[tau, T[`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau: f64,
    /// Interval length / period `T`.
    pub period: f64,
}

impl WeightSpec {
    pub fn new(a_plus: f64, a_minus: f64, tau: f64, period: f64) -> Result<Self> {
        let w = Self {
            a_plus,
            a_minus,
            tau,
            period,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a_plus, self.a_minus, self.tau, self.period]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.a_plus <= 0.0 || self.a_minus <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "weights must be positive and finite (a+ = {}, a- = {})",
                self.a_plus, self.a_minus
            )));
        }
        if !(0.0 < self.tau && self.tau < self.period) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < tau < T (tau = {}, T = {})",
                self.tau, self.period
            )));
        }
        Ok(())
    }

    /// `integral of a over [0, T] = a+ tau - a- (T - tau)`.
    pub fn mean_weight(&self) -> f64 {
        self.a_plus * self.tau - self.a_minus * (self.period - self.tau)
    }

    /// `mu = a+ / (a+ + a-)`.
    pub fn mu(&self) -> f64 {
        self.a_plus / (self.a_plus + self.a_minus)
    }

    /// `a- / a+`, the common endpoint of both rho-domains.
    pub fn weight_ratio(&self) -> f64 {
        self.a_minus / self.a_plus
    }

    /// `tau / (T - tau)`, the right-hand side of the quotient equation.
    pub fn target_ratio(&self) -> f64 {
        self.tau / (self.period - self.tau)
    }

    /// Weight at time `t`, extended `T`-periodically.
    pub fn at(&self, t: f64) -> f64 {
        let s = t.rem_euclid(self.period);
        if s < self.tau {
            self.a_plus
        } else {
            -self.a_minus
        }
    }

    /// Same switching times with both magnitudes multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            a_plus: self.a_plus * c,
            a_minus: self.a_minus * c,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Neumann,
    Periodic,
}

/// Serializable description of a [`ProblemSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub operator: OperatorKind,
    pub gamma: f64,
    pub weight: WeightSpec,
    pub bc: BoundaryCondition,
}

/// `(phi(u'))' + a(t) u^gamma = 0` with Neumann or periodic conditions.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub kernel: OperatorKernel,
    pub nonlinearity: PowerNonlinearity,
    pub weight: WeightSpec,
    pub bc: BoundaryCondition,
}

impl ProblemSpec {
    pub fn new(
        operator: OperatorKind,
        gamma: f64,
        weight: WeightSpec,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        let kernel = make_operator(operator)?;
        Self::with_kernel(kernel, gamma, weight, bc)
    }

    pub fn with_kernel(
        kernel: OperatorKernel,
        gamma: f64,
        weight: WeightSpec,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        weight.validate()?;
        let nonlinearity = PowerNonlinearity::new(gamma)?;
        if bc == BoundaryCondition::Periodic && !kernel.is_odd() {
            return Err(Error::InvalidParameter(
                "the periodic problem needs an odd h = phi^{-1}".into(),
            ));
        }
        Ok(Self {
            kernel,
            nonlinearity,
            weight,
            bc,
        })
    }

    pub fn from_config(c: &ProblemConfig) -> Result<Self> {
        Self::new(c.operator, c.gamma, c.weight, c.bc)
    }

    pub fn config(&self) -> ProblemConfig {
        ProblemConfig {
            operator: self.kernel.kind(),
            gamma: self.nonlinearity.gamma(),
            weight: self.weight,
            bc: self.bc,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.nonlinearity.gamma()
    }

    /// Homogeneity exponent of the operator, `None` for Minkowski.
    pub fn p(&self) -> Option<f64> {
        self.kernel.homogeneity()
    }

    pub(crate) fn require_p(&self, what: &str) -> Result<f64> {
        self.p().ok_or_else(|| {
            Error::Unsupported(format!(
                "{what} is only available for homogeneous (linear / p-laplacian) operators"
            ))
        })
    }

    /// Time lengths `(t1, t2)` of the positive and negative weight parts of
    /// the Neumann window: `(tau, T - tau)` for Neumann and
    /// `(tau/2, (T - tau)/2)` for the periodic half-window.
    pub fn targets(&self) -> (f64, f64) {
        let w = &self.weight;
        match self.bc {
            BoundaryCondition::Neumann => (w.tau, w.period - w.tau),
            BoundaryCondition::Periodic => (0.5 * w.tau, 0.5 * (w.period - w.tau)),
        }
    }

    /// Start of the Neumann window: `0` or `tau/2` for the periodic problem.
    pub fn window_start(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Neumann => 0.0,
            BoundaryCondition::Periodic => 0.5 * self.weight.tau,
        }
    }

    /// Same problem with the weight replaced.
    pub fn with_weight(&self, weight: WeightSpec) -> Result<Self> {
        Self::with_kernel(self.kernel.clone(), self.gamma(), weight, self.bc)
    }

    /// Same problem with the boundary condition replaced.
    pub fn with_bc(&self, bc: BoundaryCondition) -> Result<Self> {
        Self::with_kernel(self.kernel.clone(), self.gamma(), self.weight, bc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_validation() {
        assert!(WeightSpec::new(1.0, 2.0, 1.0, 3.0).is_ok());
        assert!(WeightSpec::new(0.0, 2.0, 1.0, 3.0).is_err());
        assert!(WeightSpec::new(1.0, 2.0, 3.0, 3.0).is_err());
        assert!(WeightSpec::new(1.0, -2.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn derived_quantities() {
        let w = WeightSpec::new(1.0, 2.0, 1.0, 3.0).unwrap();
        assert_eq!(w.mean_weight(), -3.0);
        assert_eq!(w.mu(), 1.0 / 3.0);
        assert_eq!(w.weight_ratio(), 2.0);
        assert_eq!(w.target_ratio(), 0.5);
        assert_eq!(w.at(0.5), 1.0);
        assert_eq!(w.at(1.0), -2.0);
        assert_eq!(w.at(3.5), 1.0);
    }

    #[test]
    fn periodic_targets_are_halved() {
        let w = WeightSpec::new(1.0, 2.0, 1.0, 3.0).unwrap();
        let n = ProblemSpec::new(OperatorKind::Linear, 3.0, w, BoundaryCondition::Neumann).unwrap();
        let p = n.with_bc(BoundaryCondition::Periodic).unwrap();
        assert_eq!(n.targets(), (1.0, 2.0));
        assert_eq!(p.targets(), (0.5, 1.0));
        assert_eq!(p.window_start(), 0.5);
        assert_eq!(p.config().bc, BoundaryCondition::Periodic);
    }

    #[test]
    fn rejects_log_primitive() {
        let w = WeightSpec::new(1.0, 2.0, 1.0, 3.0).unwrap();
        assert!(
            ProblemSpec::new(OperatorKind::Linear, -1.0, w, BoundaryCondition::Neumann).is_err()
        );
    }
}
