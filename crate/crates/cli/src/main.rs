use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod analysis;
mod args;
mod curve;
mod output;
mod solve;
mod verify;

/// Time-map solver for indefinite phi-Laplacian Neumann and periodic problems.
#[derive(Parser)]
#[command(name = "timemap", version)]
struct Cli {
    /// Log filter, e.g. `warn` or `timemap_core=debug`.
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the quotient F(rho) on a grid or reproduce a figure's data.
    Curve(curve::Opts),
    /// Classify, solve, reconstruct and cross-check one problem.
    Solve(solve::Opts),
    /// Count roots of F(rho) = tau/(T-tau) on a scan of the rho-domain.
    Count(analysis::CountOpts),
    /// Bifurcation curve (lambda, omega) or the principal eigenvalue.
    Bifurcation(analysis::BifurcationOpts),
    /// Run the acceptance matrix.
    Verify(verify::Opts),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    let result = match cli.command {
        Command::Curve(o) => curve::run(o),
        Command::Solve(o) => solve::run(o),
        Command::Count(o) => analysis::count(o),
        Command::Bifurcation(o) => analysis::bifurcation(o),
        Command::Verify(o) => verify::run(o),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
