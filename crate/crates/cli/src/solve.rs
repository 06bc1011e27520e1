use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Serialize;
use timemap_core::error::Error;
use timemap_core::oracle::{default_step, shoot_residual, shooting_solve};
use timemap_core::problem::{ProblemConfig, ProblemSpec};
use timemap_core::profile::{reconstruct, reconstruct_neumann, ProfileSummary, SolutionProfile};
use timemap_core::quadrature::QuadratureConfig;
use timemap_core::solver::{
    classify_existence_with, solve_reduced, ExistenceVerdict, ReducedSolution,
};
use timemap_core::verify::oracle_deviation;

use crate::args::{ProblemArgs, QuadArgs};
use crate::output;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProfileFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct Opts {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of profile nodes.
    #[arg(long, default_value_t = timemap_core::profile::DEFAULT_POINTS)]
    points: usize,
    /// RK4 step of the shooting cross-check (default T/1e5).
    #[arg(long)]
    step: Option<f64>,
    /// Skip the shooting cross-check.
    #[arg(long)]
    no_oracle: bool,
    /// Report path (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write the full profile here.
    #[arg(long)]
    profile_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProfileFormat::Csv)]
    profile_format: ProfileFormat,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Serialize)]
pub struct ErrorInfo {
    pub code: &'static str,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        Self {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub step: f64,
    pub alpha_shooting: Option<f64>,
    pub alpha_relative_delta: Option<f64>,
    /// `y` at the end of the Neumann window when shooting from the reduced alpha.
    pub residual_at_reduced_alpha: Option<f64>,
    /// Largest `|x_profile - x_rk|` on the Neumann window.
    pub profile_max_deviation: Option<f64>,
    pub error: Option<ErrorInfo>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub problem: ProblemConfig,
    pub verdict: Option<ExistenceVerdict>,
    pub solution: Option<ReducedSolution>,
    pub profile: Option<ProfileSummary>,
    pub oracle: Option<OracleReport>,
    pub error: Option<ErrorInfo>,
}

fn oracle_report(
    spec: &ProblemSpec,
    red: &ReducedSolution,
    half: &SolutionProfile,
    step: f64,
) -> OracleReport {
    let mut rep = OracleReport {
        step,
        alpha_shooting: None,
        alpha_relative_delta: None,
        residual_at_reduced_alpha: None,
        profile_max_deviation: None,
        error: None,
    };
    let result = (|| -> timemap_core::error::Result<()> {
        rep.residual_at_reduced_alpha = shoot_residual(red.alpha, spec, step)?.residual_neumann;
        rep.profile_max_deviation = Some(oracle_deviation(&half.grid, &half.x, red.alpha, spec)?);
        let a = shooting_solve(spec, (0.5 * red.alpha, 2.0 * red.alpha), step)?;
        rep.alpha_shooting = Some(a);
        rep.alpha_relative_delta = Some((a - red.alpha).abs() / red.alpha);
        Ok(())
    })();
    if let Err(e) = result {
        rep.error = Some((&e).into());
    }
    rep
}

pub fn build_report(
    spec: &ProblemSpec,
    q: &QuadratureConfig,
    points: usize,
    step: Option<f64>,
) -> (Report, Option<SolutionProfile>) {
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        problem: spec.config(),
        verdict: None,
        solution: None,
        profile: None,
        oracle: None,
        error: None,
    };
    match classify_existence_with(spec, q) {
        Ok(v) => report.verdict = Some(v),
        Err(e) => {
            report.error = Some((&e).into());
            return (report, None);
        }
    }
    let red = match solve_reduced(spec, q) {
        Ok(r) => r,
        Err(e) => {
            report.error = Some((&e).into());
            return (report, None);
        }
    };
    let half = reconstruct_neumann(&red, spec, points, q);
    let full = half
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|_| reconstruct(&red, spec, points, q));
    match (&half, &full) {
        (Ok(h), Ok(f)) => {
            report.profile = Some(f.summary());
            if let Some(step) = step {
                report.oracle = Some(oracle_report(spec, &red, h, step));
            }
        }
        (Err(e), _) | (_, Err(e)) => report.error = Some(e.into()),
    }
    report.solution = Some(red);
    (report, full.ok())
}

pub fn run(o: Opts) -> Result<ExitCode> {
    let spec = o.problem.spec()?;
    let q = o.quad.config()?;
    let step = if o.no_oracle {
        None
    } else {
        Some(o.step.unwrap_or_else(|| default_step(&spec)))
    };
    let (report, profile) = build_report(&spec, &q, o.points, step);
    output::write_json(o.output.as_deref(), &report)?;
    if let (Some(path), Some(p)) = (o.profile_out.as_deref(), profile) {
        let mut out = output::open(Some(path))?;
        match o.profile_format {
            ProfileFormat::Csv => p.write_csv(&mut out)?,
            ProfileFormat::Json => writeln!(out, "{}", p.to_json()?)?,
        }
        out.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}
