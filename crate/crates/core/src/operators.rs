//! Operator kernels and power nonlinearities.
//!
//! Each differential operator `u -> (phi(u'))'` enters the time-map integrals
//! only through `h = phi^{-1}`, its primitive `H` (with `H(0) = 0`), the
//! inverses of the two monotone branches of `H`, and the composite
//! `L_h = h o H_l^{-1}`. Kernels implement [`PhiKernel`] and are looked up by
//! name in a [`KernelRegistry`], so new operators can be plugged in without
//! touching the solver.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form kernel of a phi-Laplacian operator.
pub trait PhiKernel: fmt::Debug + Send + Sync {
    /// Registry name.
    fn name(&self) -> &'static str;

    fn kind(&self) -> OperatorKind;

    /// `h = phi^{-1}`, odd and strictly increasing with `h(0) = 0`.
    fn h(&self, y: f64) -> f64;

    /// Primitive `H` of `h` with `H(0) = 0`.
    fn big_h(&self, y: f64) -> f64;

    /// Inverse of `H` restricted to `]-inf, 0]`; returns a value `<= 0`.
    fn big_h_inv_left(&self, xi: f64) -> f64 {
        -self.big_h_inv_right(xi)
    }

    /// Inverse of `H` restricted to `[0, +inf[`.
    fn big_h_inv_right(&self, xi: f64) -> f64;

    /// `L_h(xi) = h(H_l^{-1}(xi))` for `xi >= 0`.
    fn l_h(&self, xi: f64) -> f64 {
        self.h(self.big_h_inv_left(xi))
    }

    /// The operator `phi` itself (inverse of `h`).
    fn phi(&self, s: f64) -> f64;

    /// Homogeneity exponent `p` when `phi(s) = |s|^{p-2} s`, `None` otherwise.
    fn homogeneity(&self) -> Option<f64>;

    /// Whether `h` is odd (required for the periodic reflection).
    fn is_odd(&self) -> bool {
        true
    }
}

/// Shared handle to a kernel.
pub type OperatorKernel = Arc<dyn PhiKernel>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    Linear,
    PLaplacian { p: f64 },
    Minkowski,
}

impl OperatorKind {
    pub fn registry_name(&self) -> &'static str {
        match self {
            OperatorKind::Linear => "linear",
            OperatorKind::PLaplacian { .. } => "p-laplacian",
            OperatorKind::Minkowski => "minkowski",
        }
    }

    pub fn p(&self) -> Option<f64> {
        match self {
            OperatorKind::Linear => Some(2.0),
            OperatorKind::PLaplacian { p } => Some(*p),
            OperatorKind::Minkowski => None,
        }
    }
}

/// `phi(s) = s`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Linear;

impl PhiKernel for Linear {
    fn name(&self) -> &'static str {
        "linear"
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Linear
    }
    fn h(&self, y: f64) -> f64 {
        y
    }
    fn big_h(&self, y: f64) -> f64 {
        0.5 * y * y
    }
    fn big_h_inv_right(&self, xi: f64) -> f64 {
        (2.0 * xi).sqrt()
    }
    fn l_h(&self, xi: f64) -> f64 {
        -(2.0 * xi).sqrt()
    }
    fn phi(&self, s: f64) -> f64 {
        s
    }
    fn homogeneity(&self) -> Option<f64> {
        Some(2.0)
    }
}

/// `phi(s) = |s|^{p-2} s`, `p > 1`.
#[derive(Debug, Clone, Copy)]
pub struct PLaplacian {
    p: f64,
    // 1/(p-1), the exponent of h = phi_q
    h_exp: f64,
    // (p/(p-1))^{1/p}
    l_coeff: f64,
}

impl PLaplacian {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p = {p}: operator not a homeomorphism (need p > 1)"
            )));
        }
        Ok(Self {
            p,
            h_exp: 1.0 / (p - 1.0),
            l_coeff: (p / (p - 1.0)).powf(1.0 / p),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl PhiKernel for PLaplacian {
    fn name(&self) -> &'static str {
        "p-laplacian"
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::PLaplacian { p: self.p }
    }
    fn h(&self, y: f64) -> f64 {
        signed_pow(y, self.h_exp)
    }
    fn big_h(&self, y: f64) -> f64 {
        let p = self.p;
        (p - 1.0) / p * y.abs().powf(p / (p - 1.0))
    }
    fn big_h_inv_right(&self, xi: f64) -> f64 {
        let p = self.p;
        (p / (p - 1.0)).powf((p - 1.0) / p) * xi.abs().powf((p - 1.0) / p)
    }
    fn l_h(&self, xi: f64) -> f64 {
        -self.l_coeff * xi.abs().powf(1.0 / self.p)
    }
    fn phi(&self, s: f64) -> f64 {
        signed_pow(s, self.p - 1.0)
    }
    fn homogeneity(&self) -> Option<f64> {
        Some(self.p)
    }
}

/// Lorentz-Minkowski mean curvature, `phi(s) = s / sqrt(1 - s^2)` on `]-1, 1[`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Minkowski;

impl PhiKernel for Minkowski {
    fn name(&self) -> &'static str {
        "minkowski"
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Minkowski
    }
    fn h(&self, y: f64) -> f64 {
        y / (1.0 + y * y).sqrt()
    }
    fn big_h(&self, y: f64) -> f64 {
        // sqrt(1+y^2) - 1 without cancellation
        let y2 = y * y;
        y2 / ((1.0 + y2).sqrt() + 1.0)
    }
    fn big_h_inv_right(&self, xi: f64) -> f64 {
        (xi * (xi + 2.0)).sqrt()
    }
    fn l_h(&self, xi: f64) -> f64 {
        -(xi * (xi + 2.0)).sqrt() / (1.0 + xi)
    }
    fn phi(&self, s: f64) -> f64 {
        s / (1.0 - s * s).sqrt()
    }
    fn homogeneity(&self) -> Option<f64> {
        None
    }
}

/// Builder stored in the registry. Receives the optional `p` parameter.
pub type KernelBuilder = fn(Option<f64>) -> Result<OperatorKernel>;

/// Name-indexed collection of operator kernels.
#[derive(Clone)]
pub struct KernelRegistry {
    builders: BTreeMap<&'static str, KernelBuilder>,
}

impl fmt::Debug for KernelRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.builders.keys()).finish()
    }
}

impl KernelRegistry {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    /// Registry holding the three built-in kernels.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("linear", |_| Ok(Arc::new(Linear)));
        reg.register("p-laplacian", |p| {
            let p = p.ok_or_else(|| {
                Error::InvalidParameter("the p-laplacian kernel needs a value of p".into())
            })?;
            Ok(Arc::new(PLaplacian::new(p)?))
        });
        reg.register("minkowski", |_| Ok(Arc::new(Minkowski)));
        reg
    }

    pub fn register(&mut self, name: &'static str, builder: KernelBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.builders.keys().copied()
    }

    pub fn build(&self, name: &str, p: Option<f64>) -> Result<OperatorKernel> {
        let builder = self
            .builders
            .get(name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown operator kernel `{name}`")))?;
        builder(p)
    }
}

impl Default for KernelRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

/// Builds the kernel for `kind` through the built-in registry.
pub fn make_operator(kind: OperatorKind) -> Result<OperatorKernel> {
    KernelRegistry::with_builtins().build(kind.registry_name(), kind.p())
}

/// Four-way classification of `g` by the limits `G_0`, `G_{+inf}` of its primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseClass {
    /// `G_0` finite, `G_{+inf} = +inf`.
    CaseI,
    /// `G_0` and `G_{+inf}` finite.
    CaseII,
    /// `G_0 = -inf`, `G_{+inf}` finite.
    CaseIV,
}

/// `g(u) = u^gamma` with `gamma != -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerNonlinearity {
    gamma: f64,
}

impl PowerNonlinearity {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {gamma}")));
        }
        if gamma == -1.0 {
            return Err(Error::LogarithmicPrimitive);
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `gamma / (gamma + 1)`.
    pub fn theta(&self) -> f64 {
        self.gamma / (self.gamma + 1.0)
    }

    /// `sign(gamma + 1)`: the sign of `G` on `]0, inf[`.
    pub fn sign(&self) -> f64 {
        if self.gamma > -1.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        x.powf(self.gamma)
    }

    pub fn big_g(&self, x: f64) -> f64 {
        x.powf(self.gamma + 1.0) / (self.gamma + 1.0)
    }

    /// Inverse of `G` on `sign(gamma+1) * ]0, inf[`.
    pub fn big_g_inv(&self, xi: f64) -> f64 {
        let k = self.gamma + 1.0;
        (k.abs() * xi.abs()).powf(1.0 / k)
    }

    /// `L_g(xi) = g(G^{-1}(xi)) = |gamma+1|^{theta} |xi|^{theta}`.
    pub fn l_g(&self, xi: f64) -> f64 {
        ((self.gamma + 1.0).abs() * xi.abs()).powf(self.theta())
    }

    /// `lim_{x -> 0+} G(x)`.
    pub fn g_at_zero(&self) -> f64 {
        if self.gamma > -1.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `lim_{x -> +inf} G(x)`.
    pub fn g_at_infinity(&self) -> f64 {
        if self.gamma > -1.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    pub fn case_class(&self) -> CaseClass {
        classify_limits(self.g_at_zero(), self.g_at_infinity())
            .expect("power nonlinearities never fall in case (iii)")
    }
}

/// Maps the limits of `G` to a case class. Case (iii) (`G_0 = -inf`,
/// `G_{+inf} = +inf`) is not supported and yields `None`.
pub fn classify_limits(g0: f64, g_inf: f64) -> Option<CaseClass> {
    match (g0.is_finite(), g_inf.is_finite()) {
        (true, false) => Some(CaseClass::CaseI),
        (true, true) => Some(CaseClass::CaseII),
        (false, true) => Some(CaseClass::CaseIV),
        (false, false) => None,
    }
}

pub fn classify_nonlinearity(gamma: f64) -> Result<CaseClass> {
    Ok(PowerNonlinearity::new(gamma)?.case_class())
}

/// `sign(x) |x|^e`.
pub(crate) fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn kernels() -> Vec<OperatorKernel> {
        vec![
            make_operator(OperatorKind::Linear).unwrap(),
            make_operator(OperatorKind::PLaplacian { p: 3.0 }).unwrap(),
            make_operator(OperatorKind::PLaplacian { p: 1.5 }).unwrap(),
            make_operator(OperatorKind::Minkowski).unwrap(),
        ]
    }

    #[test]
    fn p_laplacian_examples() {
        let k = make_operator(OperatorKind::PLaplacian { p: 2.0 }).unwrap();
        assert_relative_eq!(k.l_h(2.0), -2.0, max_relative = 1e-15);

        let k3 = make_operator(OperatorKind::PLaplacian { p: 3.0 }).unwrap();
        let expected = -(1.5f64).powf(1.0 / 3.0);
        assert_relative_eq!(k3.l_h(1.0), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, -1.144714, epsilon = 1e-6);
        // cross-check by inverting H numerically on ]-inf, 0]
        let (mut lo, mut hi) = (-10.0f64, 0.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if k3.big_h(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(k3.h(0.5 * (lo + hi)), expected, max_relative = 1e-12);
    }

    #[test]
    fn minkowski_at_zero() {
        let k = make_operator(OperatorKind::Minkowski).unwrap();
        assert_eq!(k.l_h(0.0), 0.0);
        assert!(k.h(1e6) < 1.0);
    }

    #[test]
    fn rejects_non_homeomorphic_p() {
        assert!(matches!(
            make_operator(OperatorKind::PLaplacian { p: 1.0 }),
            Err(Error::InvalidParameter(_))
        ));
        assert!(make_operator(OperatorKind::PLaplacian { p: 0.5 }).is_err());
    }

    #[test]
    fn registry_lookup() {
        let reg = KernelRegistry::with_builtins();
        let names: Vec<_> = reg.names().collect();
        assert_eq!(names, vec!["linear", "minkowski", "p-laplacian"]);
        assert!(reg.build("p-laplacian", None).is_err());
        assert!(reg.build("curvature", None).is_err());
        assert_eq!(reg.build("minkowski", None).unwrap().name(), "minkowski");
    }

    #[test]
    fn case_classification() {
        assert_eq!(classify_nonlinearity(3.0).unwrap(), CaseClass::CaseI);
        assert_eq!(classify_nonlinearity(-3.0).unwrap(), CaseClass::CaseIV);
        assert_eq!(classify_nonlinearity(0.5).unwrap(), CaseClass::CaseI);
        assert_eq!(classify_nonlinearity(-0.5).unwrap(), CaseClass::CaseI);
        assert_eq!(
            classify_nonlinearity(-1.0).unwrap_err(),
            Error::LogarithmicPrimitive
        );
        assert_eq!(classify_limits(0.0, 1.0), Some(CaseClass::CaseII));
        assert_eq!(classify_limits(f64::NEG_INFINITY, f64::INFINITY), None);
    }

    #[test]
    fn kernel_identities_on_grid() {
        for k in kernels() {
            for i in 0..=200 {
                let y = -5.0 + 0.05 * i as f64;
                assert_relative_eq!(k.h(-y), -k.h(y), max_relative = 1e-12);
                assert_relative_eq!(k.big_h(-y), k.big_h(y), max_relative = 1e-12);
                assert!(k.big_h(y) >= 0.0);
                if y >= 0.0 {
                    assert_relative_eq!(
                        k.big_h_inv_right(k.big_h(y)),
                        y,
                        max_relative = 1e-10,
                        epsilon = 1e-300
                    );
                } else {
                    assert_relative_eq!(k.big_h_inv_left(k.big_h(y)), y, max_relative = 1e-10);
                    assert_relative_eq!(k.l_h(k.big_h(y)), k.h(y), max_relative = 1e-10);
                }
                assert_relative_eq!(k.phi(k.h(y)), y, max_relative = 1e-10, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn closed_forms_of_l_h() {
        let lin = Linear;
        let mk = Minkowski;
        for xi in [0.0, 0.1, 1.0, 7.5] {
            assert_relative_eq!(lin.l_h(xi), -(2.0 * xi).sqrt());
            assert_relative_eq!(mk.l_h(xi), -(xi * xi + 2.0 * xi).sqrt() / (1.0 + xi));
            assert!(mk.l_h(xi) <= 0.0);
        }
    }
}
