//! The randomized coordinate descent iteration and its trajectories.
//!
//! One step reads a draw `(i_t, alpha_t)` from the path and updates a
//! single coordinate:
//!
//! ```text
//! x_{t+1} = x_t - alpha_t * partial_i f(x_t) * e_i
//! ```
//!
//! Because the path is a pure function of `(seed, offset + t)` and the
//! update touches one coordinate through one partial evaluation,
//! restarting a run from iterate `x_s` with the path shifted by `s`
//! reproduces the original tail bit-for-bit. Tests lean on that instead
//! of tolerance-laden comparisons.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::objective::ObjectiveSpec;
use crate::sample_path::{CoordinateStepDraw, DrawSequence, StepsizeRange};

/// Iterates beyond this norm terminate the run as divergent.
pub const DIVERGENCE_RADIUS: f64 = 1e12;

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Performed the full iteration budget.
    MaxIter,
    /// Gradient norm at or below the tolerance.
    GradTol,
    /// Left the ball of `escape_radius` around `escape_center`.
    EscapeRadius,
    /// Iterate norm exceeded [`DIVERGENCE_RADIUS`].
    Divergence,
}

/// Stopping rules, checked in order (gradient, escape, divergence,
/// budget) before each step; the first rule that fires names the
/// termination.
#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub max_iter: u64,
    /// Stop when `|grad f(x_t)| <= grad_tol`. Zero disables the check
    /// (and lets escape runs skip the full gradient evaluation).
    pub grad_tol: f64,
    /// Stop when `|x_t - center| > radius`.
    pub escape: Option<(DVector<f64>, f64)>,
}

impl StopRule {
    /// Budget plus gradient tolerance; no escape ball.
    pub fn until_grad_tol(max_iter: u64, grad_tol: f64) -> Self {
        StopRule { max_iter, grad_tol, escape: None }
    }

    /// Budget only.
    pub fn fixed_steps(max_iter: u64) -> Self {
        StopRule { max_iter, grad_tol: 0.0, escape: None }
    }
}

/// What to keep per iterate. Recording everything on a 10^6-step run
/// costs memory proportional to `dim * steps`, so Monte Carlo drivers
/// keep summaries only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RecordOptions {
    pub points: bool,
    pub f_values: bool,
    pub grad_norms: bool,
    pub steps: bool,
}

impl RecordOptions {
    /// Keep every iterate, function value, gradient norm, and draw.
    pub fn full() -> Self {
        RecordOptions { points: true, f_values: true, grad_norms: true, steps: true }
    }

    /// Keep only the summary fields.
    pub fn summary() -> Self {
        RecordOptions::default()
    }
}

/// Run configuration: stop rule, recording, and whether to proceed when
/// `alpha_max >= 1/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub stop: StopRule,
    pub record: RecordOptions,
    /// Explicit opt-in for stepsize ranges that violate the smoothness
    /// contract (and for objectives without a finite Hessian bound).
    pub allow_assumption_violation: bool,
}

impl RunConfig {
    pub fn new(stop: StopRule) -> Self {
        RunConfig { stop, record: RecordOptions::summary(), allow_assumption_violation: false }
    }

    pub fn recording(mut self, record: RecordOptions) -> Self {
        self.record = record;
        self
    }

    pub fn allowing_assumption_violation(mut self) -> Self {
        self.allow_assumption_violation = true;
        self
    }
}

/// A completed run. Optional vectors are populated according to the
/// [`RecordOptions`]; summary fields are always present. When recorded,
/// `points`/`f_values`/`grad_norms` have length `steps_taken + 1`
/// (they include the initial point) and `steps_used` has length
/// `steps_taken`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x0: DVector<f64>,
    pub final_x: DVector<f64>,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub steps_taken: u64,
    pub terminated_by: Termination,
    /// Stepsize range the draws came from; used by norm-ratio checks.
    pub range: StepsizeRange,
    pub points: Option<Vec<DVector<f64>>>,
    pub f_values: Option<Vec<f64>>,
    pub grad_norms: Option<Vec<f64>>,
    pub steps_used: Option<Vec<CoordinateStepDraw>>,
}

/// One coordinate update. Errors if the selected partial evaluates
/// non-finite.
pub fn step(spec: &ObjectiveSpec, x: &DVector<f64>, draw: CoordinateStepDraw) -> Result<DVector<f64>> {
    let g_i = spec.partial(x, draw.coord);
    if !g_i.is_finite() {
        return Err(Error::NumericalError(format!(
            "partial derivative at coordinate {} is {g_i}",
            draw.coord
        )));
    }
    let mut next = x.clone();
    next[draw.coord] -= draw.alpha * g_i;
    Ok(next)
}

/// Runs the iteration from `x0` along `path` until a stop rule fires.
///
/// Validates `alpha_max < 1/M` against the objective's Hessian bound
/// unless the config opts out. The divergence guard (norm above
/// [`DIVERGENCE_RADIUS`]) is always active.
pub fn run<P: DrawSequence>(
    spec: &ObjectiveSpec,
    x0: &DVector<f64>,
    path: &P,
    range: StepsizeRange,
    config: &RunConfig,
) -> Result<Trajectory> {
    if x0.len() != spec.dim() {
        return Err(Error::InvalidParameter(format!(
            "x0 has dim {}, objective has dim {}",
            x0.len(),
            spec.dim()
        )));
    }
    if !config.allow_assumption_violation {
        range.validate_against_bound(spec.hessian_bound())?;
    }

    let record = config.record;
    let mut points = record.points.then(Vec::new);
    let mut f_values = record.f_values.then(Vec::new);
    let mut grad_norms = record.grad_norms.then(Vec::new);
    let mut steps_used = record.steps.then(Vec::new);

    // grad_tol = 0 disables the gradient stop; the norm is then only
    // computed when recorded (escape sweeps skip it entirely).
    let check_grad = config.stop.grad_tol > 0.0;

    let mut x = x0.clone();
    let mut t: u64 = 0;
    let termination = loop {
        let grad_norm = (check_grad || record.grad_norms).then(|| spec.grad_norm(&x));
        if let Some(v) = &mut points {
            v.push(x.clone());
        }
        if let Some(v) = &mut f_values {
            v.push(spec.eval(&x));
        }
        if let Some(v) = &mut grad_norms {
            v.push(grad_norm.unwrap());
        }

        if check_grad && grad_norm.unwrap() <= config.stop.grad_tol {
            break Termination::GradTol;
        }
        if let Some((center, radius)) = &config.stop.escape {
            if (&x - center).norm() > *radius {
                break Termination::EscapeRadius;
            }
        }
        if x.norm() > DIVERGENCE_RADIUS {
            break Termination::Divergence;
        }
        if t >= config.stop.max_iter {
            break Termination::MaxIter;
        }

        let draw = path.draw(t);
        if draw.coord >= spec.dim() {
            return Err(Error::InvalidParameter(format!(
                "draw at t = {t} selects coordinate {} but dim = {}",
                draw.coord,
                spec.dim()
            )));
        }
        x = step(spec, &x, draw)?;
        if let Some(v) = &mut steps_used {
            v.push(draw);
        }
        t += 1;
    };

    let final_f = spec.eval(&x);
    let final_grad_norm = spec.grad_norm(&x);
    Ok(Trajectory {
        x0: x0.clone(),
        final_x: x,
        final_f,
        final_grad_norm,
        steps_taken: t,
        terminated_by: termination,
        range,
        points,
        f_values,
        grad_norms,
        steps_used,
    })
}

/// Checks the two-sided norm contraction/expansion bound
/// `(1 - M alpha_max) |x_t| <= |x_{t+1}| <= (1 + M alpha_max) |x_t|`
/// along a recorded trajectory, with relative slack 1e-12.
///
/// Only meaningful for quadratic objectives (critical point at the
/// origin): the bound compares against the distance to that critical
/// point. Requires recorded points.
pub fn two_sided_norm_check(spec: &ObjectiveSpec, traj: &Trajectory) -> Result<bool> {
    if spec.quadratic_matrix().is_none() {
        return Err(Error::InvalidParameter(
            "two_sided_norm_check applies to quadratic objectives only".into(),
        ));
    }
    let points = traj.points.as_ref().ok_or_else(|| {
        Error::InvalidParameter("two_sided_norm_check needs a trajectory with recorded points".into())
    })?;
    let m_alpha = spec.hessian_bound() * traj.range.alpha_max();
    let (r_minus, r_plus) = (1.0 - m_alpha, 1.0 + m_alpha);
    for w in points.windows(2) {
        let (n0, n1) = (w[0].norm(), w[1].norm());
        let slack = 1e-12 * n0.max(1e-300);
        if n1 < r_minus * n0 - slack || n1 > r_plus * n0 + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Writes a recorded trajectory as CSV: header `t,x0,...,f,grad_norm`,
/// one row per iterate. Requires points, f-values and gradient norms.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let points = traj.points.as_ref().ok_or_else(|| {
        Error::InvalidParameter("CSV export needs recorded points".into())
    })?;
    let f_values = traj.f_values.as_ref().ok_or_else(|| {
        Error::InvalidParameter("CSV export needs recorded f values".into())
    })?;
    let grad_norms = traj.grad_norms.as_ref().ok_or_else(|| {
        Error::InvalidParameter("CSV export needs recorded gradient norms".into())
    })?;
    let io_err = |e: std::io::Error| Error::InvalidParameter(format!("write error: {e}"));
    let dim = traj.x0.len();
    let mut header = String::from("t");
    for i in 0..dim {
        header.push_str(&format!(",x{i}"));
    }
    header.push_str(",f,grad_norm\n");
    out.write_all(header.as_bytes()).map_err(io_err)?;
    for (t, x) in points.iter().enumerate() {
        let mut row = format!("{t}");
        for v in x.iter() {
            row.push_str(&format!(",{v:.17e}"));
        }
        row.push_str(&format!(",{:.17e},{:.17e}\n", f_values[t], grad_norms[t]));
        out.write_all(row.as_bytes()).map_err(io_err)?;
    }
    Ok(())
}

/// Magic bytes opening the binary trajectory format.
pub const TRAJECTORY_MAGIC: &[u8; 8] = b"CGDTRAJ\0";
/// Current binary format version.
pub const TRAJECTORY_FORMAT_VERSION: u32 = 1;

/// Compact binary export of the recorded points.
///
/// Layout (all integers little-endian):
/// - magic: 8 bytes `CGDTRAJ\0`
/// - version: u32
/// - d (dimension): u32
/// - T (number of recorded points, = steps + 1): u64
/// - T * d little-endian f64 iterate coordinates, row-major.
pub fn write_trajectory_binary<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let points = traj.points.as_ref().ok_or_else(|| {
        Error::InvalidParameter("binary export needs recorded points".into())
    })?;
    let io_err = |e: std::io::Error| Error::InvalidParameter(format!("write error: {e}"));
    out.write_all(TRAJECTORY_MAGIC).map_err(io_err)?;
    out.write_all(&TRAJECTORY_FORMAT_VERSION.to_le_bytes()).map_err(io_err)?;
    out.write_all(&(traj.x0.len() as u32).to_le_bytes()).map_err(io_err)?;
    out.write_all(&(points.len() as u64).to_le_bytes()).map_err(io_err)?;
    for x in points {
        for v in x.iter() {
            out.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

/// Reads the binary format back (header validation included).
pub fn read_trajectory_binary(data: &[u8]) -> Result<Vec<DVector<f64>>> {
    let bad = |msg: &str| Error::InvalidParameter(format!("bad trajectory file: {msg}"));
    if data.len() < 24 {
        return Err(bad("truncated header"));
    }
    if &data[0..8] != TRAJECTORY_MAGIC {
        return Err(bad("wrong magic"));
    }
    let version = u32::from_le_bytes(data[8..12].try_into().unwrap());
    if version != TRAJECTORY_FORMAT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let d = u32::from_le_bytes(data[12..16].try_into().unwrap()) as usize;
    let t = u64::from_le_bytes(data[16..24].try_into().unwrap()) as usize;
    let expected = 24 + t * d * 8;
    if data.len() != expected {
        return Err(bad(&format!("expected {expected} bytes, got {}", data.len())));
    }
    let mut points = Vec::with_capacity(t);
    let mut off = 24;
    for _ in 0..t {
        let x = DVector::from_fn(d, |i, _| {
            f64::from_le_bytes(data[off + i * 8..off + i * 8 + 8].try_into().unwrap())
        });
        off += d * 8;
        points.push(x);
    }
    Ok(points)
}
