//! Shooting oracle: fixed-step RK4 on `x' = h(y)`, `y' = -a(t) g(x)` with the
//! weight switches landed on exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::OperatorKind;
use crate::problem::{BoundaryCondition, ProblemSpec};

/// Integration stops once `x` falls below this value.
pub const X_FLOOR: f64 = 1e-9;
/// Minkowski guard on `|u'| = |h(y)|`.
pub const SPEED_LIMIT: f64 = 1.0 - 1e-12;
/// Default number of RK4 steps per period.
pub const DEFAULT_STEPS: f64 = 1e5;

pub fn default_step(spec: &ProblemSpec) -> f64 {
    spec.weight.period / DEFAULT_STEPS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    pub alpha: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    /// State at the end of the integration, or the last regular state.
    pub terminal: (f64, f64),
    pub hit_singularity: bool,
    pub singular_time: Option<f64>,
    /// `y` at the end of the Neumann window (`T`, or `(T+tau)/2` for the
    /// periodic half-window).
    pub residual_neumann: Option<f64>,
    /// `(x(t0+T) - x(t0), y(t0+T) - y(t0))`.
    pub residual_periodic: Option<(f64, f64)>,
    /// Neumann residual used for bracketing. A collapse before the window
    /// end counts as `-sign(gamma) * inf`, the side its neighbours fall on.
    pub signed_residual: f64,
}

enum Record<'a> {
    Nothing,
    Every,
    At(&'a [f64]),
}

/// Start of the integration and length of the Neumann window.
fn window(spec: &ProblemSpec) -> (f64, f64) {
    let (t1, t2) = spec.targets();
    (spec.window_start(), t1 + t2)
}

/// Integrates from `(alpha, 0)` at the window start over one period and
/// records every step.
pub fn shoot(alpha: f64, spec: &ProblemSpec, step: f64) -> Result<ShootResult> {
    run(alpha, spec, step, Record::Every, true)
}

/// Residual-only shot for the linear equation (`gamma = 1`) with the
/// positivity guard off, so sign-changing trajectories run to the end.
pub fn shoot_linear(alpha: f64, spec: &ProblemSpec, step: f64) -> Result<ShootResult> {
    if spec.gamma() != 1.0 {
        return Err(Error::InvalidParameter(format!(
            "unguarded shooting needs gamma = 1, got {}",
            spec.gamma()
        )));
    }
    run(alpha, spec, step, Record::Nothing, false)
}

/// Same as [`shoot`] without storing the trajectory.
pub fn shoot_residual(alpha: f64, spec: &ProblemSpec, step: f64) -> Result<ShootResult> {
    run(alpha, spec, step, Record::Nothing, true)
}

/// Same as [`shoot`], recording only at `times` (which become breakpoints).
pub fn shoot_sampled(
    alpha: f64,
    spec: &ProblemSpec,
    step: f64,
    times: &[f64],
) -> Result<ShootResult> {
    run(alpha, spec, step, Record::At(times), true)
}

fn run(
    alpha: f64,
    spec: &ProblemSpec,
    step: f64,
    record: Record<'_>,
    guard: bool,
) -> Result<ShootResult> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must be positive"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step = {step} must be positive"
        )));
    }
    let w = spec.weight;
    let (t0, len) = window(spec);
    let t_end = t0 + w.period;
    let t_neu = t0 + len;

    let mut breaks = vec![t0, t_end, t_neu];
    let mut k = (t0 / w.period).floor();
    while k * w.period < t_end {
        for s in [k * w.period, k * w.period + w.tau] {
            if s > t0 && s < t_end {
                breaks.push(s);
            }
        }
        k += 1.0;
    }
    if let Record::At(times) = record {
        for &s in times {
            if s > t0 && s < t_end {
                breaks.push(s);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * w.period);

    let kernel = &spec.kernel;
    let g = spec.nonlinearity;
    let minkowski = matches!(kernel.kind(), OperatorKind::Minkowski);
    let gamma = g.gamma();
    let rhs = |a: f64, x: f64, y: f64| {
        let gx = if guard {
            g.g(x)
        } else {
            x.signum() * x.abs().powf(gamma)
        };
        (kernel.h(y), -a * gx)
    };

    let mut traj = Vec::new();
    let push = |t: f64, x: f64, y: f64, traj: &mut Vec<TrajectoryPoint>| match record {
        Record::Nothing => {}
        Record::Every => traj.push(TrajectoryPoint { t, x, y }),
        Record::At(times) => {
            if times
                .iter()
                .any(|&s| (s - t).abs() <= 1e-12 * w.period.max(1.0))
            {
                traj.push(TrajectoryPoint { t, x, y });
            }
        }
    };

    let (mut x, mut y) = (alpha, 0.0);
    push(t0, x, y, &mut traj);
    let mut residual_neumann = None;
    let mut singular_time = None;

    'outer: for seg in breaks.windows(2) {
        let (s0, s1) = (seg[0], seg[1]);
        let a = w.at(0.5 * (s0 + s1));
        let n = ((s1 - s0) / step).ceil().max(1.0) as usize;
        let h = (s1 - s0) / n as f64;
        for i in 0..n {
            let (k1x, k1y) = rhs(a, x, y);
            let (k2x, k2y) = rhs(a, x + 0.5 * h * k1x, y + 0.5 * h * k1y);
            let (k3x, k3y) = rhs(a, x + 0.5 * h * k2x, y + 0.5 * h * k2y);
            let (k4x, k4y) = rhs(a, x + h * k3x, y + h * k3y);
            let nx = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            let ny = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            let t = if i + 1 == n {
                s1
            } else {
                s0 + (i + 1) as f64 * h
            };
            let broken = !(nx.is_finite() && ny.is_finite())
                || (guard && nx < X_FLOOR)
                || (minkowski && kernel.h(ny).abs() >= SPEED_LIMIT);
            if broken {
                singular_time = Some(t);
                break 'outer;
            }
            x = nx;
            y = ny;
            if i + 1 == n || matches!(record, Record::Every) {
                push(t, x, y, &mut traj);
            }
        }
        if s1 == t_neu {
            residual_neumann = Some(y);
        }
    }

    let hit = singular_time.is_some();
    Ok(ShootResult {
        alpha,
        trajectory: traj,
        terminal: (x, y),
        hit_singularity: hit,
        singular_time,
        residual_neumann,
        residual_periodic: if hit { None } else { Some((x - alpha, y)) },
        signed_residual: residual_neumann.unwrap_or(-g.sign() * f64::INFINITY),
    })
}

/// Bisection on the Neumann residual `y(t0 + window; alpha)` inside `bracket`.
///
/// Runs until the bracket is relatively narrower than `1e-14`; the residual
/// scale depends on `alpha^gamma`, so no absolute stop on `|y|` is used.
pub fn shooting_solve(spec: &ProblemSpec, bracket: (f64, f64), step: f64) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "alpha bracket [{lo}, {hi}] must satisfy 0 < lo < hi"
        )));
    }
    let r = |a: f64| shoot_residual(a, spec, step).map(|s| s.signed_residual);
    let r_lo = r(lo)?;
    let r_hi = r(hi)?;
    if r_lo == 0.0 {
        return Ok(lo);
    }
    if r_hi == 0.0 {
        return Ok(hi);
    }
    if (r_lo < 0.0) == (r_hi < 0.0) {
        return Err(Error::NoBracket { lo, hi });
    }
    let lo_negative = r_lo < 0.0;
    for _ in 0..200 {
        // geometric midpoint: brackets may span several decades
        let mid = (lo * hi).sqrt();
        let v = r(mid)?;
        if v == 0.0 || (hi - lo) <= 1e-14 * hi {
            return Ok(mid);
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub alpha: f64,
    pub residual: f64,
    pub hit_singularity: bool,
}

/// Signed residuals on `n` log-spaced `alpha` values in `[lo, hi]`.
pub fn scan_alpha(
    spec: &ProblemSpec,
    lo: f64,
    hi: f64,
    n: usize,
    step: f64,
) -> Result<Vec<ScanPoint>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::InvalidParameter(format!(
            "bad scan range [{lo}, {hi}] with {n} points"
        )));
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .into_par_iter()
        .map(|i| {
            let alpha = (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp();
            let s = shoot_residual(alpha, spec, step)?;
            Ok(ScanPoint {
                alpha,
                residual: s.signed_residual,
                hit_singularity: s.hit_singularity,
            })
        })
        .collect()
}

/// Adjacent scan points with residuals of opposite sign.
pub fn brackets(scan: &[ScanPoint]) -> Vec<(f64, f64)> {
    scan.windows(2)
        .filter(|w| (w[0].residual < 0.0) != (w[1].residual < 0.0))
        .map(|w| (w[0].alpha, w[1].alpha))
        .collect()
}

/// Scans `[1e-4, 1e4]` and refines the first sign change, or reports
/// [`Error::NoBracket`].
pub fn shooting_search(spec: &ProblemSpec, n: usize, step: f64) -> Result<f64> {
    let (lo, hi) = (1e-4, 1e4);
    let scan = scan_alpha(spec, lo, hi, n, step)?;
    match brackets(&scan).first() {
        Some(&b) => shooting_solve(spec, b, step),
        None => Err(Error::NoBracket { lo, hi }),
    }
}

/// Largest level-set drift of `H(y) + a+ G(x)` along the positive-weight
/// part of the Neumann window.
pub fn positive_part_drift(spec: &ProblemSpec, alpha: f64, step: f64) -> Result<f64> {
    if spec.bc != BoundaryCondition::Neumann {
        return Err(Error::Contract(
            "drift is measured on the Neumann window".into(),
        ));
    }
    let s = shoot(alpha, spec, step)?;
    let g = spec.nonlinearity;
    let a = spec.weight.a_plus;
    let e0 = a * g.big_g(alpha);
    Ok(s.trajectory
        .iter()
        .filter(|p| p.t <= spec.weight.tau)
        .map(|p| (spec.kernel.big_h(p.y) + a * g.big_g(p.x) - e0).abs())
        .fold(0.0, f64::max))
}
