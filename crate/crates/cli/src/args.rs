use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use timemap_core::operators::KernelRegistry;
use timemap_core::problem::{BoundaryCondition, ProblemSpec, WeightSpec};
use timemap_core::quadrature::QuadratureConfig;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Bc {
    Neumann,
    Periodic,
}

impl From<Bc> for BoundaryCondition {
    fn from(b: Bc) -> Self {
        match b {
            Bc::Neumann => BoundaryCondition::Neumann,
            Bc::Periodic => BoundaryCondition::Periodic,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OperatorArgs {
    /// Operator kernel: linear, p-laplacian or minkowski.
    #[arg(long, default_value = "p-laplacian")]
    pub operator: String,
    /// Exponent p of the p-laplacian.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// Exponent of the nonlinearity u^gamma.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a_plus: f64,
    #[arg(long, default_value_t = 2.0)]
    pub a_minus: f64,
    /// Switch time of the weight.
    #[arg(long)]
    pub tau: f64,
    /// Interval length / period T.
    #[arg(long = "period", short = 'T')]
    pub period: f64,
    #[arg(long, value_enum, default_value_t = Bc::Neumann)]
    pub bc: Bc,
}

#[derive(Args, Debug, Clone)]
pub struct QuadArgs {
    #[arg(long, default_value_t = QuadratureConfig::default().abs_tol)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = QuadratureConfig::default().rel_tol)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = QuadratureConfig::default().max_levels)]
    pub max_levels: usize,
}

impl QuadArgs {
    pub fn config(&self) -> Result<QuadratureConfig> {
        let q = QuadratureConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_levels: self.max_levels,
        };
        q.validate()?;
        Ok(q)
    }
}

pub fn build_spec(
    op: &OperatorArgs,
    gamma: f64,
    weight: WeightSpec,
    bc: BoundaryCondition,
) -> Result<ProblemSpec> {
    let p = (op.operator == "p-laplacian").then_some(op.p);
    let kernel = KernelRegistry::with_builtins()
        .build(&op.operator, p)
        .with_context(|| format!("operator `{}`", op.operator))?;
    Ok(ProblemSpec::with_kernel(kernel, gamma, weight, bc)?)
}

impl ProblemArgs {
    pub fn spec(&self) -> Result<ProblemSpec> {
        let w = WeightSpec::new(self.a_plus, self.a_minus, self.tau, self.period)?;
        build_spec(&self.operator, self.gamma, w, self.bc.into())
    }
}
