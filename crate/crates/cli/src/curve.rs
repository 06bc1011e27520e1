use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;
use timemap_core::problem::{BoundaryCondition, ProblemSpec, WeightSpec};
use timemap_core::quadrature::QuadratureConfig;
use timemap_core::timemap::{F_curve, F_limits, RhoDomain, RhoSide};

use crate::args::{build_spec, Format, OperatorArgs, QuadArgs};
use crate::output;

#[derive(Args, Debug)]
pub struct Opts {
    /// Reproduce the data of figure 1 or 2 (a+ = 1, a- = 2, p = 2).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), conflicts_with_all = ["gamma", "rho_min", "rho_max", "n"])]
    figure: Option<u8>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "figure")]
    gamma: Option<f64>,
    #[command(flatten)]
    operator: OperatorArgs,
    #[arg(long, default_value_t = 1.0)]
    a_plus: f64,
    #[arg(long, default_value_t = 2.0)]
    a_minus: f64,
    #[arg(long)]
    rho_min: Option<f64>,
    #[arg(long)]
    rho_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Serialize)]
struct Row {
    gamma: f64,
    rho: f64,
    #[serde(rename = "F")]
    f: Option<f64>,
    /// `far_end` or `ratio` on boundary rows carrying an analytic limit.
    limit: Option<&'static str>,
    error: Option<String>,
}

pub const FIGURE_1_GAMMAS: [f64; 5] = [-0.4, -0.2, 0.0, 0.2, 0.8];
pub const FIGURE_2_GAMMAS: [f64; 5] = [-1.5, -1.6, -1.8, -2.0, -3.0];

/// The abscissae of the published curves.
pub fn figure_grid(figure: u8) -> Vec<f64> {
    match figure {
        1 => {
            let mut g = vec![0.0];
            g.extend((1..=10).map(|k| (4 * k) as f64 / 1000.0));
            g.extend((2..=49).map(|k| (4 * k) as f64 / 100.0));
            g.push(2.0);
            g
        }
        _ => (2..=20).map(f64::from).collect(),
    }
}

fn figure_weight(a_plus: f64, a_minus: f64) -> Result<WeightSpec> {
    // F does not depend on the switch time; any admissible one will do
    Ok(WeightSpec::new(a_plus, a_minus, 1.0, 3.0)?)
}

/// Rows for `rhos`; with `limits`, the domain endpoints carry the analytic
/// limits of `F` and a marker instead of being evaluated.
fn rows(spec: &ProblemSpec, rhos: &[f64], q: &QuadratureConfig, limits: bool) -> Vec<Row> {
    let gamma = spec.gamma();
    let dom = RhoDomain::for_spec(spec);
    let marker = |rho: f64| {
        if !limits {
            None
        } else if rho == dom.ratio() {
            Some("ratio")
        } else if rho == 0.0 && dom.side == RhoSide::BelowRatio {
            Some("far_end")
        } else {
            None
        }
    };
    let values = F_curve(rhos, spec, q);
    rhos.iter()
        .zip(values)
        .map(|(&rho, value)| {
            let limit = marker(rho);
            let value = match limit {
                Some(which) => F_limits(spec, q).map(|l| {
                    if which == "ratio" {
                        l.at_ratio
                    } else {
                        l.at_far_end
                    }
                }),
                None => value,
            };
            match value {
                Ok(f) => Row {
                    gamma,
                    rho,
                    f: Some(f),
                    limit,
                    error: None,
                },
                Err(e) => Row {
                    gamma,
                    rho,
                    f: None,
                    limit,
                    error: Some(format!("[{}] {e}", e.code())),
                },
            }
        })
        .collect()
}

pub fn run(o: Opts) -> Result<ExitCode> {
    let q = o.quad.config()?;
    let w = figure_weight(o.a_plus, o.a_minus)?;
    let (rows, figure) = match o.figure {
        Some(fig) => {
            let gammas = if fig == 1 {
                FIGURE_1_GAMMAS
            } else {
                FIGURE_2_GAMMAS
            };
            let grid = figure_grid(fig);
            let op = OperatorArgs {
                operator: "linear".into(),
                p: 2.0,
            };
            let mut out = Vec::new();
            for gamma in gammas {
                let spec = build_spec(&op, gamma, w, BoundaryCondition::Neumann)?;
                out.extend(rows(&spec, &grid, &q, true));
            }
            (out, true)
        }
        None => {
            let gamma = o.gamma.expect("clap enforces --gamma");
            let spec = build_spec(&o.operator, gamma, w, BoundaryCondition::Neumann)?;
            let dom = RhoDomain::for_spec(&spec);
            let lo = o.rho_min.unwrap_or(dom.lower);
            let hi = o.rho_max.unwrap_or(if dom.upper.is_finite() {
                dom.upper
            } else {
                10.0 * dom.ratio()
            });
            let n = o.n.unwrap_or(101);
            if n < 2 || !(hi > lo) {
                bail!("need --n >= 2 and rho_max > rho_min (got {n}, [{lo}, {hi}])");
            }
            let grid: Vec<f64> = (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect();
            (rows(&spec, &grid, &q, false), false)
        }
    };

    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "gamma = {}, rho = {}: {}",
            r.gamma,
            r.rho,
            r.error.as_deref().unwrap_or_default()
        );
    }

    let path = o.output.as_deref();
    match o.format {
        Format::Json => output::write_json(path, &rows)?,
        Format::Csv => {
            let mut out = output::open(path)?;
            if figure {
                writeln!(out, "gamma,rho,F,limit")?;
            } else {
                writeln!(out, "rho,F")?;
            }
            for r in &rows {
                let f = r.f.map(|v| v.to_string()).unwrap_or_default();
                if figure {
                    writeln!(out, "{},{},{},{}", r.gamma, r.rho, f, r.limit.unwrap_or(""))?;
                } else if r.f.is_some() {
                    writeln!(out, "{},{}", r.rho, f)?;
                }
            }
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
