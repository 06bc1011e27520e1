use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::Args;
use timemap_core::verify::CRITERIA;

use crate::args::QuadArgs;
use crate::output;

#[derive(Args, Debug)]
pub struct Opts {
    /// Multiply both quadrature tolerances by this factor.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    /// Run only these criteria (1-8, comma separated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    /// Also write the reports as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

pub fn run(o: Opts) -> Result<ExitCode> {
    if !(o.tol_scale > 0.0) {
        bail!("--tol-scale must be positive");
    }
    if let Some(bad) = o.only.iter().find(|&&i| !(1..=8).contains(&i)) {
        bail!("unknown criterion {bad}");
    }
    let q = o.quad.config()?.scaled(o.tol_scale);
    let mut reports = Vec::new();
    for (i, criterion) in CRITERIA.iter().enumerate() {
        let id = i as u8 + 1;
        if !o.only.is_empty() && !o.only.contains(&id) {
            continue;
        }
        let r = criterion(&q);
        println!("{}", r.line());
        for f in r.failures.iter().skip(1) {
            println!("    {f}");
        }
        reports.push(r);
    }
    if let Some(path) = o.json.as_deref() {
        output::write_json(Some(path), &reports)?;
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).collect();
    if let Some(first) = failed.first() {
        eprintln!(
            "{} of {} criteria failed; first: criterion {}",
            failed.len(),
            reports.len(),
            first.id
        );
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
