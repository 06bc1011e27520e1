//! Solution profiles rebuilt from a reduced solution by inverting the time
//! maps node by node, plus the periodic reflection.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{BoundaryCondition, ProblemSpec};
use crate::quadrature::QuadratureConfig;
use crate::solver::ReducedSolution;
use crate::timemap::{time_on_negative_part, time_on_positive_part};

pub const DEFAULT_POINTS: usize = 1001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDiagnostics {
    /// Neumann: `(y(start), y(end))`. Periodic: `(x(T) - x(0), y(T) - y(0))`.
    pub bc_residuals: (f64, f64),
    /// Largest deviation from the level set of the current weight part.
    pub level_set_drift: f64,
    /// Largest three-point residual of `x' = h(y)`, `y' = -a g(x)` at
    /// interior nodes (the switch node excluded).
    pub fd_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub grid: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub bc: BoundaryCondition,
    /// True for a Neumann profile living on the periodic half-window.
    pub half_window: bool,
    pub diagnostics: ProfileDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub points: usize,
    pub x_max: f64,
    pub x_min: f64,
    pub t_of_max: f64,
    pub t_of_min: f64,
    pub diagnostics_bc: (f64, f64),
    pub level_set_drift: f64,
    pub fd_residual: f64,
}

impl SolutionProfile {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn summary(&self) -> ProfileSummary {
        let (mut imax, mut imin) = (0, 0);
        for i in 0..self.x.len() {
            if self.x[i] > self.x[imax] {
                imax = i;
            }
            if self.x[i] < self.x[imin] {
                imin = i;
            }
        }
        ProfileSummary {
            points: self.len(),
            x_max: self.x[imax],
            x_min: self.x[imin],
            t_of_max: self.grid[imax],
            t_of_min: self.grid[imin],
            diagnostics_bc: self.diagnostics.bc_residuals,
            level_set_drift: self.diagnostics.level_set_drift,
            fd_residual: self.diagnostics.fd_residual,
        }
    }

    /// CSV with header `t,x,y`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,x,y")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.grid[i], self.x[i], self.y[i]
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Uniform grid on `[a, b]` with `switch` included exactly (an existing node
/// within a quarter cell is moved onto it).
fn grid_with_switch(a: f64, b: f64, n: usize, switch: f64) -> Vec<f64> {
    let n = n.max(3);
    let dt = (b - a) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { b } else { a + i as f64 * dt })
        .collect();
    match grid.iter().position(|&t| (t - switch).abs() < 0.25 * dt) {
        Some(i) => grid[i] = switch,
        None => {
            let i = grid.partition_point(|&t| t < switch);
            grid.insert(i, switch);
        }
    }
    grid
}

/// Bisection for `d` in `[0, d_max]` with `time(d) = target`, `time` increasing.
fn invert<F>(time: F, target: f64, d_max: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (0.0, d_max);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * d_max.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if time(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Profile of the Neumann problem on its window (`[0, T]`, or the periodic
/// half-window `[tau/2, (T+tau)/2]` when `red` came from a periodic spec).
pub fn reconstruct_neumann(
    red: &ReducedSolution,
    spec: &ProblemSpec,
    n_points: usize,
    q: &QuadratureConfig,
) -> Result<SolutionProfile> {
    if red.bc != spec.bc {
        return Err(Error::Contract(
            "reduced solution and spec disagree on the boundary condition".into(),
        ));
    }
    let w = spec.weight;
    let g = spec.nonlinearity;
    let kernel = &spec.kernel;
    let (t1, t2) = red.targets;
    let start = red.window_start;
    let switch = start + t1;
    let end = switch + t2;
    let omega = red.omega;
    let sigma = red.sigma;
    let star = g.big_g(red.x_star);
    let d1 = omega - star;
    let d2 = star - sigma;

    let grid = grid_with_switch(start, end, n_points, switch);
    let last = grid.len() - 1;
    let nodes: Vec<(f64, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &t)| -> Result<(f64, f64)> {
            if i == 0 {
                return Ok((red.alpha, 0.0));
            }
            if i == last {
                return Ok((red.beta, 0.0));
            }
            if t == switch {
                return Ok((red.x_star, red.y_star));
            }
            if t < switch {
                let d = invert(|d| time_on_positive_part(omega, d, spec, q), t - start, d1)?;
                Ok((g.big_g_inv(omega - d), kernel.big_h_inv_left(w.a_plus * d)))
            } else {
                let e = invert(|e| time_on_negative_part(sigma, e, spec, q), end - t, d2)?;
                Ok((g.big_g_inv(sigma + e), kernel.big_h_inv_left(w.a_minus * e)))
            }
        })
        .collect::<Result<_>>()
        .map_err(|e| Error::Internal(format!("time-map inversion failed: {e}")))?;
    let (x, y): (Vec<f64>, Vec<f64>) = nodes.into_iter().unzip();

    let mut profile = SolutionProfile {
        grid,
        x,
        y,
        bc: BoundaryCondition::Neumann,
        half_window: spec.bc == BoundaryCondition::Periodic,
        diagnostics: ProfileDiagnostics {
            bc_residuals: (0.0, 0.0),
            level_set_drift: 0.0,
            fd_residual: 0.0,
        },
    };
    profile.diagnostics = diagnose(&profile, spec, red, switch);
    Ok(profile)
}

fn diagnose(
    prof: &SolutionProfile,
    spec: &ProblemSpec,
    red: &ReducedSolution,
    switch: f64,
) -> ProfileDiagnostics {
    let w = spec.weight;
    let g = spec.nonlinearity;
    let kernel = &spec.kernel;
    let n = prof.len();
    let e_plus = w.a_plus * g.big_g(red.alpha);
    let e_minus = -w.a_minus * g.big_g(red.beta);
    let mut drift: f64 = 0.0;
    for i in 0..n {
        let (t, x, y) = (prof.grid[i], prof.x[i], prof.y[i]);
        let scale = e_plus.abs().max(1.0);
        if t <= switch {
            drift = drift.max((kernel.big_h(y) + w.a_plus * g.big_g(x) - e_plus).abs() / scale);
        }
        if t >= switch {
            let scale = e_minus.abs().max(1.0);
            drift = drift.max((kernel.big_h(y) - w.a_minus * g.big_g(x) - e_minus).abs() / scale);
        }
    }
    let bc_residuals = match prof.bc {
        BoundaryCondition::Neumann => (prof.y[0], prof.y[n - 1]),
        BoundaryCondition::Periodic => (prof.x[n - 1] - prof.x[0], prof.y[n - 1] - prof.y[0]),
    };
    ProfileDiagnostics {
        bc_residuals,
        level_set_drift: drift,
        fd_residual: fd_residual(prof, spec, &[switch]),
    }
}

/// Largest three-point finite-difference residual of the planar system at
/// interior nodes, skipping nodes listed in `skip` (weight switches).
pub fn fd_residual(prof: &SolutionProfile, spec: &ProblemSpec, skip: &[f64]) -> f64 {
    let g = spec.nonlinearity;
    let kernel = &spec.kernel;
    let t = &prof.grid;
    let mut worst: f64 = 0.0;
    for i in 1..prof.len().saturating_sub(1) {
        if skip
            .iter()
            .any(|&s| (t[i] - s).abs() <= 1e-12 * s.abs().max(1.0))
        {
            continue;
        }
        let (hm, hp) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        let d = |v: &[f64]| {
            -hp / (hm * (hm + hp)) * v[i - 1]
                + (hp - hm) / (hm * hp) * v[i]
                + hm / (hp * (hm + hp)) * v[i + 1]
        };
        let a = spec.weight.at(t[i]);
        let r1 = d(&prof.x) - kernel.h(prof.y[i]);
        let r2 = d(&prof.y) + a * g.g(prof.x[i]);
        worst = worst.max(r1.abs()).max(r2.abs());
    }
    worst
}

/// Periodic solution on `[0, T]` from a half-window Neumann profile, by the
/// reflection `(x, y)(t) -> (x, -y)(tau - t)` taken modulo `T`.
pub fn extend_periodic(half: &SolutionProfile, spec: &ProblemSpec) -> Result<SolutionProfile> {
    if !half.half_window || half.bc != BoundaryCondition::Neumann {
        return Err(Error::Contract(
            "extend_periodic needs a Neumann profile on the periodic half-window".into(),
        ));
    }
    let w = spec.weight;
    let period = w.period;
    let tol = 1e-12 * period;
    let mut pts: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * half.len() + 1);
    for i in 0..half.len() {
        let (s, x, y) = (half.grid[i], half.x[i], half.y[i]);
        pts.push((s, x, y));
        let mut r = w.tau - s;
        if r < -tol {
            r += period;
        }
        pts.push((r.max(0.0), x, -y));
        if r.abs() <= tol {
            pts.push((period, x, -y));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= tol);
    if pts.first().map(|p| p.0) != Some(0.0) || pts.last().map(|p| p.0) != Some(period) {
        return Err(Error::Internal(
            "reflected grid does not cover [0, T]; the half-window must contain tau".into(),
        ));
    }
    let mut prof = SolutionProfile {
        grid: pts.iter().map(|p| p.0).collect(),
        x: pts.iter().map(|p| p.1).collect(),
        y: pts.iter().map(|p| p.2).collect(),
        bc: BoundaryCondition::Periodic,
        half_window: false,
        diagnostics: half.diagnostics.clone(),
    };
    let n = prof.len();
    prof.diagnostics.bc_residuals = (prof.x[n - 1] - prof.x[0], prof.y[n - 1] - prof.y[0]);
    prof.diagnostics.fd_residual = fd_residual(&prof, spec, &[0.0, w.tau, period]);
    Ok(prof)
}

/// Reduced solution and profile on `[0, T]` in one call.
pub fn reconstruct(
    red: &ReducedSolution,
    spec: &ProblemSpec,
    n_points: usize,
    q: &QuadratureConfig,
) -> Result<SolutionProfile> {
    let prof = reconstruct_neumann(red, spec, n_points, q)?;
    match spec.bc {
        BoundaryCondition::Neumann => Ok(prof),
        BoundaryCondition::Periodic => extend_periodic(&prof, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorKind;
    use crate::problem::WeightSpec;
    use crate::solver::solve_reduced;

    fn setup(bc: BoundaryCondition) -> (ProblemSpec, ReducedSolution) {
        let w = WeightSpec::new(1.0, 2.0, 1.0, 3.0).unwrap();
        let s = ProblemSpec::new(OperatorKind::Linear, 3.0, w, bc).unwrap();
        let r = solve_reduced(&s, &QuadratureConfig::default()).unwrap();
        (s, r)
    }

    #[test]
    fn grid_contains_switch() {
        let g = grid_with_switch(0.0, 3.0, 31, 1.0);
        assert_eq!(g.len(), 31);
        assert!(g.contains(&1.0));
        let g = grid_with_switch(0.0, 3.0, 5, 1.0);
        assert_eq!(g.len(), 6);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn endpoints_and_monotonicity() {
        let (s, r) = setup(BoundaryCondition::Neumann);
        let p = reconstruct_neumann(&r, &s, 201, &QuadratureConfig::default()).unwrap();
        assert_eq!(p.x[0], r.alpha);
        assert_eq!(*p.x.last().unwrap(), r.beta);
        let i = p.grid.iter().position(|&t| t == 1.0).unwrap();
        assert_eq!(p.x[i], r.x_star);
        assert!(p.x.windows(2).all(|w| w[1] < w[0]));
        assert!(p.y[1..p.len() - 1].iter().all(|&y| y < 0.0));
        assert!(p.diagnostics.level_set_drift < 1e-10);
        assert!(p.diagnostics.fd_residual < 1e-3);
    }

    #[test]
    fn periodic_extension_contract() {
        let (s, r) = setup(BoundaryCondition::Neumann);
        let p = reconstruct_neumann(&r, &s, 51, &QuadratureConfig::default()).unwrap();
        assert!(matches!(extend_periodic(&p, &s), Err(Error::Contract(_))));
    }

    #[test]
    fn periodic_extension_shape() {
        let (s, r) = setup(BoundaryCondition::Periodic);
        let p = reconstruct(&r, &s, 201, &QuadratureConfig::default()).unwrap();
        assert_eq!(p.grid[0], 0.0);
        assert_eq!(*p.grid.last().unwrap(), 3.0);
        let sm = p.summary();
        assert!((sm.t_of_max - 0.5).abs() < 1e-12);
        assert!((sm.t_of_min - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let (s, r) = setup(BoundaryCondition::Neumann);
        let p = reconstruct_neumann(&r, &s, 11, &QuadratureConfig::default()).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,y"));
        assert_eq!(lines.count(), p.len());
    }
}
