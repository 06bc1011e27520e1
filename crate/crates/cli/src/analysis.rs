use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Args;
use timemap_core::solver::{bifurcation_curve, count_solutions, DEFAULT_SCAN_POINTS};

use crate::args::{Format, ProblemArgs, QuadArgs};
use crate::output;

#[derive(Args, Debug)]
pub struct CountOpts {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = DEFAULT_SCAN_POINTS)]
    grid: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

pub fn count(o: CountOpts) -> Result<ExitCode> {
    let spec = o.problem.spec()?;
    let c = count_solutions(&spec, o.grid, &o.quad.config()?)?;
    output::write_json(o.output.as_deref(), &c)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args, Debug)]
pub struct BifurcationOpts {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Values of lambda (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2,5,10")]
    lambda: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

pub fn bifurcation(o: BifurcationOpts) -> Result<ExitCode> {
    let spec = o.problem.spec()?;
    let points = bifurcation_curve(&spec, &o.lambda, &o.quad.config()?)?;
    match o.format {
        Format::Json => output::write_json(o.output.as_deref(), &points)?,
        Format::Csv => {
            let mut out = output::open(o.output.as_deref())?;
            writeln!(out, "lambda,omega,alpha")?;
            let cell = |v: Option<f64>| v.map_or_else(|| "free".to_string(), |v| v.to_string());
            for p in &points {
                writeln!(out, "{},{},{}", p.lambda, cell(p.omega), cell(p.alpha))?;
            }
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
