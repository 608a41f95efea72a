//! Monte Carlo verification harness.
//!
//! Each entry point turns one theoretical claim into a seeded, finite
//! experiment with a serializable report: saddle-escape trials
//! ([`escape_mc`]), convergence classification ([`classify_convergence`]),
//! coordinate-coverage statistics ([`gs_window_stats`]), the per-window
//! decay inequality and its step witness ([`verify_linear_decay`]), and
//! the compounded growth bound ([`verify_growth`]). Trials derive
//! independent seeds from a single experiment seed, so every report is
//! reproducible from its own config echo.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certificate::{decay_constant, decay_delta};
use crate::descent::{run, RunConfig, StopRule, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{range_basis, row_dot, symmetric_eigenvalues_sorted};
use crate::objective::{
    classify_critical_point, CriticalPointClass, CriticalPointKind, ObjectiveSpec,
};
use crate::sample_path::{derive_seed, CounterStream, DrawSequence, SamplePath, StepsizeRange};

/// Uniform point on the unit sphere: normalized Gaussian vector,
/// retrying (fresh counters) in the measure-zero underflow case.
fn unit_sphere_point(stream: &CounterStream, d: usize) -> DVector<f64> {
    let mut attempt = 0u64;
    loop {
        let v = DVector::from_fn(d, |i, _| {
            stream.gaussian_at(attempt * d as u64 + i as u64)
        });
        let norm = v.norm();
        if norm > 1e-150 {
            return v / norm;
        }
        attempt += 1;
    }
}

/// Outcome of a batch of saddle-escape trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub n_trials: u32,
    /// First step with `|x_t - x_star| > escape_radius` per trial;
    /// `None` when the trial stayed inside for all of `t_max` steps.
    pub escape_times: Vec<Option<u64>>,
    /// Escaped trials divided by `n_trials` (0.0 for an empty batch).
    pub fraction_escaped: f64,
    pub median_escape_time: Option<u64>,
    pub max_escape_time: Option<u64>,
    pub x_star: Vec<f64>,
    pub init_radius: f64,
    pub escape_radius: f64,
    pub t_max: u64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub seed: u64,
}

impl EscapeReport {
    /// Fraction of trials still inside the escape ball after `t` steps,
    /// for each requested `t`. Non-increasing in `t` by construction.
    pub fn survival_curve(&self, times: &[u64]) -> Vec<f64> {
        if self.n_trials == 0 {
            return vec![0.0; times.len()];
        }
        times
            .iter()
            .map(|&t| {
                let inside = self
                    .escape_times
                    .iter()
                    .filter(|e| match e {
                        Some(te) => *te > t,
                        None => true,
                    })
                    .count();
                inside as f64 / self.n_trials as f64
            })
            .collect()
    }
}

/// Experiment shape for [`escape_mc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeConfig {
    pub init_radius: f64,
    pub escape_radius: f64,
    pub n_trials: u32,
    pub t_max: u64,
}

/// Runs `n_trials` independent descent trials started uniformly on the
/// sphere of radius `init_radius` around the strict saddle `x_star`,
/// recording the first exit time from the `escape_radius` ball.
///
/// Staying inside for all of `t_max` steps is recorded (`None`), not an
/// error. Trial k derives its own init and path seeds from `seed`, so
/// trials are independent and the report is reproducible.
pub fn escape_mc(
    spec: &ObjectiveSpec,
    x_star: &DVector<f64>,
    range: StepsizeRange,
    config: &EscapeConfig,
    seed: u64,
) -> Result<EscapeReport> {
    let class = classify_critical_point(spec, x_star, 1e-8, 1e-8)?;
    if class.kind != CriticalPointKind::StrictSaddle {
        return Err(Error::NotASaddle { min_eig: class.min_eig });
    }
    if !(config.init_radius > 0.0 && config.init_radius < config.escape_radius) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < init_radius < escape_radius, got {} vs {}",
            config.init_radius, config.escape_radius
        )));
    }
    let d = spec.dim();
    let mut escape_times = Vec::with_capacity(config.n_trials as usize);
    for trial in 0..config.n_trials as u64 {
        let trial_seed = derive_seed(seed, trial);
        let init_stream = CounterStream::new(derive_seed(trial_seed, 0));
        let x0 = x_star + unit_sphere_point(&init_stream, d) * config.init_radius;
        escape_times.push(escape_single(
            spec,
            &x0,
            x_star,
            range,
            config.escape_radius,
            config.t_max,
            derive_seed(trial_seed, 1),
        )?);
    }
    let finite: Vec<u64> = escape_times.iter().filter_map(|e| *e).collect();
    let fraction_escaped = if config.n_trials == 0 {
        0.0
    } else {
        finite.len() as f64 / config.n_trials as f64
    };
    let mut sorted = finite.clone();
    sorted.sort_unstable();
    Ok(EscapeReport {
        n_trials: config.n_trials,
        escape_times,
        fraction_escaped,
        median_escape_time: (!sorted.is_empty()).then(|| sorted[sorted.len() / 2]),
        max_escape_time: sorted.last().copied(),
        x_star: x_star.iter().copied().collect(),
        init_radius: config.init_radius,
        escape_radius: config.escape_radius,
        t_max: config.t_max,
        alpha_min: range.alpha_min(),
        alpha_max: range.alpha_max(),
        seed,
    })
}

/// One escape trial from a fixed start. Returns the first step with
/// `|x_t - x_star| > escape_radius`, or `None` within `t_max` steps.
/// The start must differ from the saddle itself, which is a fixed
/// point.
pub fn escape_single(
    spec: &ObjectiveSpec,
    x0: &DVector<f64>,
    x_star: &DVector<f64>,
    range: StepsizeRange,
    escape_radius: f64,
    t_max: u64,
    path_seed: u64,
) -> Result<Option<u64>> {
    if x0 == x_star {
        return Err(Error::InvalidParameter(
            "escape trial started exactly at the critical point".into(),
        ));
    }
    let path = SamplePath::new(path_seed, spec.dim(), range)?;
    // grad_tol = 0 skips the per-step gradient norm: escape trials only
    // watch the distance from x_star.
    let stop = StopRule {
        max_iter: t_max,
        grad_tol: 0.0,
        escape: Some((x_star.clone(), escape_radius)),
    };
    let traj = run(spec, x0, &path, range, &RunConfig::new(stop))?;
    Ok(match traj.terminated_by {
        Termination::EscapeRadius => Some(traj.steps_taken),
        _ => None,
    })
}

/// Per-trial record of a convergence-classification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u32,
    pub final_x: Vec<f64>,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub steps_taken: u64,
    pub terminated_by: Termination,
    /// Set only for trials that reached the gradient tolerance.
    pub class: Option<CriticalPointClass>,
    /// Index into the objective's known critical points, when the
    /// limit landed within the match radius of one.
    pub matched_known: Option<usize>,
    /// Converged to a strict saddle: the probability-zero event the
    /// escape theory rules out for generic starts.
    pub saddle_limit: bool,
}

/// Aggregated classification of where descent trials end up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n_trials: u32,
    pub n_converged: u32,
    /// Hit the step budget with the gradient still above tolerance;
    /// such trials are never classified.
    pub n_unconverged: u32,
    pub n_diverged: u32,
    pub n_min_candidates: u32,
    pub n_saddle_limits: u32,
    pub n_degenerate: u32,
    pub outcomes: Vec<TrialOutcome>,
    pub grad_tol: f64,
    pub match_radius: f64,
    pub t_max: u64,
    pub init_lo: Vec<f64>,
    pub init_hi: Vec<f64>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub seed: u64,
}

/// Runs descent from `n_trials` starts drawn uniformly from the box
/// `[init_lo, init_hi]` (a degenerate box forces a fixed start), then
/// classifies every limit that reached `grad_tol`.
///
/// Classified limits are matched against the objective's known
/// critical points within `match_radius`; limits whose Hessian has a
/// negative eigenvalue are flagged as saddle limits.
pub fn classify_convergence(
    spec: &ObjectiveSpec,
    init_lo: &DVector<f64>,
    init_hi: &DVector<f64>,
    n_trials: u32,
    t_max: u64,
    grad_tol: f64,
    match_radius: f64,
    range: StepsizeRange,
    seed: u64,
) -> Result<ConvergenceReport> {
    let d = spec.dim();
    if init_lo.len() != d || init_hi.len() != d {
        return Err(Error::InvalidParameter(format!(
            "init box must have dim {d}, got {} and {}",
            init_lo.len(),
            init_hi.len()
        )));
    }
    if init_lo.iter().zip(init_hi.iter()).any(|(lo, hi)| lo > hi) {
        return Err(Error::InvalidParameter("init box has lo > hi".into()));
    }
    if !(grad_tol > 0.0) {
        return Err(Error::InvalidParameter("grad_tol must be positive".into()));
    }

    let mut outcomes = Vec::with_capacity(n_trials as usize);
    for trial in 0..n_trials {
        let trial_seed = derive_seed(seed, trial as u64);
        let init_stream = CounterStream::new(derive_seed(trial_seed, 0));
        let x0 = DVector::from_fn(d, |i, _| {
            init_lo[i] + (init_hi[i] - init_lo[i]) * init_stream.unit_f64_at(i as u64)
        });
        let path = SamplePath::new(derive_seed(trial_seed, 1), d, range)?;
        let stop = StopRule { max_iter: t_max, grad_tol, escape: None };
        let traj = run(spec, &x0, &path, range, &RunConfig::new(stop))?;
        outcomes.push(classify_trial(spec, trial, &traj, grad_tol, match_radius));
    }

    let count = |f: &dyn Fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as u32;
    Ok(ConvergenceReport {
        n_trials,
        n_converged: count(&|o| o.terminated_by == Termination::GradTol),
        n_unconverged: count(&|o| o.terminated_by == Termination::MaxIter),
        n_diverged: count(&|o| o.terminated_by == Termination::Divergence),
        n_min_candidates: count(&|o| {
            o.class.as_ref().map(|c| c.kind) == Some(CriticalPointKind::LocalMinCandidate)
        }),
        n_saddle_limits: count(&|o| o.saddle_limit),
        n_degenerate: count(&|o| {
            o.class.as_ref().map(|c| c.kind) == Some(CriticalPointKind::Degenerate)
        }),
        outcomes,
        grad_tol,
        match_radius,
        t_max,
        init_lo: init_lo.iter().copied().collect(),
        init_hi: init_hi.iter().copied().collect(),
        alpha_min: range.alpha_min(),
        alpha_max: range.alpha_max(),
        seed,
    })
}

fn classify_trial(
    spec: &ObjectiveSpec,
    trial: u32,
    traj: &Trajectory,
    grad_tol: f64,
    match_radius: f64,
) -> TrialOutcome {
    let converged = traj.terminated_by == Termination::GradTol;
    let class = converged
        .then(|| classify_critical_point(spec, &traj.final_x, grad_tol, 1e-8).ok())
        .flatten();
    let matched_known = converged
        .then(|| {
            spec.known_critical_points()
                .iter()
                .enumerate()
                .map(|(idx, kcp)| (idx, (&traj.final_x - &kcp.x).norm()))
                .filter(|(_, dist)| *dist <= match_radius)
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .map(|(idx, _)| idx)
        })
        .flatten();
    let saddle_limit =
        class.as_ref().map(|c| c.kind) == Some(CriticalPointKind::StrictSaddle);
    TrialOutcome {
        trial,
        final_x: traj.final_x.iter().copied().collect(),
        final_f: traj.final_f,
        final_grad_norm: traj.final_grad_norm,
        steps_taken: traj.steps_taken,
        terminated_by: traj.terminated_by,
        class,
        matched_known,
        saddle_limit,
    }
}

/// Coverage statistics of length-m coordinate windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GSWindowStats {
    pub d: usize,
    pub m: usize,
    pub n_windows: u64,
    /// `indicators[k]` is true when draws `[km, (k+1)m)` hit every
    /// coordinate (the generalized Gauss-Seidel event).
    pub indicators: Vec<bool>,
    pub covered_count: u64,
    pub empirical_mean: f64,
    /// Exact coverage probability `d! S(m, d) / d^m` (surjection
    /// count), available for d, m <= 12.
    pub exact_mean: Option<f64>,
    /// `|x_{(k+1)m}| / |x_{km}|` when a trajectory rides along (filled
    /// by the growth verifier; empty for pure coverage runs).
    pub growth_ratios: Vec<f64>,
}

/// Exact probability that m uniform draws from {0..d-1} cover all d
/// coordinates, by inclusion-exclusion over missed coordinates.
/// Exact in i128 for d, m <= 12.
pub fn exact_coverage_probability(d: usize, m: usize) -> Option<f64> {
    if d == 0 || d > 12 || m > 12 {
        return None;
    }
    if m < d {
        return Some(0.0);
    }
    let mut surjections: i128 = 0;
    let mut binomial: i128 = 1; // C(d, j)
    for j in 0..=d {
        let count = (d - j) as i128;
        let term = binomial * count.pow(m as u32);
        surjections += if j % 2 == 0 { term } else { -term };
        binomial = binomial * (d - j) as i128 / (j + 1) as i128;
    }
    Some(surjections as f64 / (d as i128).pow(m as u32) as f64)
}

/// Computes window-coverage indicators for the first `n_windows`
/// aligned length-m blocks of `path`.
pub fn gs_window_stats<P: DrawSequence>(
    path: &P,
    d: usize,
    m: usize,
    n_windows: u64,
) -> Result<GSWindowStats> {
    if d == 0 || m < d {
        return Err(Error::InvalidParameter(format!(
            "coverage windows need m >= d >= 1, got d = {d}, m = {m}"
        )));
    }
    let mut indicators = Vec::with_capacity(n_windows as usize);
    let mut seen = vec![false; d];
    for k in 0..n_windows {
        seen.iter_mut().for_each(|s| *s = false);
        for t in k * m as u64..(k + 1) * m as u64 {
            let coord = path.draw(t).coord;
            if coord >= d {
                return Err(Error::InvalidParameter(format!(
                    "draw at t = {t} selects coordinate {coord} >= d = {d}"
                )));
            }
            seen[coord] = true;
        }
        indicators.push(seen.iter().all(|&s| s));
    }
    let covered_count = indicators.iter().filter(|&&b| b).count() as u64;
    Ok(GSWindowStats {
        d,
        m,
        n_windows,
        covered_count,
        empirical_mean: if n_windows == 0 {
            0.0
        } else {
            covered_count as f64 / n_windows as f64
        },
        exact_mean: exact_coverage_probability(d, m),
        indicators,
        growth_ratios: Vec::new(),
    })
}

/// Result of checking the per-window decay inequality and its witness
/// step on sampled covering windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayVerification {
    pub n_windows: u64,
    /// Windows with `f(x_m) - f(x_0) <= c f(x_0)` (up to rounding
    /// slack).
    pub satisfied: u64,
    pub satisfied_fraction: f64,
    /// Windows containing a step with
    /// `alpha_T |e_T' H y_T| >= delta |y_T|`, where y is the
    /// range-component iterate.
    pub witnesses: u64,
    pub witness_fraction: f64,
    pub c: f64,
    pub delta: f64,
    pub m: usize,
    pub seed: u64,
}

/// One coordinate step of the quadratic-model dynamics, sharing the
/// accumulation order of the descent stepper.
fn quadratic_step(h: &DMatrix<f64>, x: &mut DVector<f64>, coord: usize, alpha: f64) {
    let g = row_dot(h, coord, x);
    x[coord] -= alpha * g;
}

fn quadratic_value(h: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let d = h.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        acc += x[i] * row_dot(h, i, x);
    }
    0.5 * acc
}

/// Samples `n_windows` coordinate-covering windows started on the
/// negative cone of H and checks on each (a) the decay inequality
/// `f(x_m) - f(x_0) <= c f(x_0)` and (b) the existence of a witness
/// step with `alpha |e' H y| >= delta |y|`. Both fractions must be 1.0
/// when the implementation is correct; they are reported, not
/// asserted.
pub fn verify_linear_decay(
    h: &DMatrix<f64>,
    range: StepsizeRange,
    m: usize,
    n_windows: u64,
    seed: u64,
) -> Result<DecayVerification> {
    let c = decay_constant(h, m, range)?;
    let delta = decay_delta(h, m, range)?;
    let d = h.nrows();
    let range_cols = range_basis(h, 1e-12);

    let dir_stream = CounterStream::new(derive_seed(seed, 0));
    let path = SamplePath::new(derive_seed(seed, 1), d, range)?;

    let mut satisfied = 0u64;
    let mut witnesses = 0u64;
    let mut block = 0u64;
    let block_budget = 1000 * n_windows.max(1);
    let mut dir_counter = 0u64;
    for _ in 0..n_windows {
        // Rejection-sample a start with negative quadratic value; the
        // negative cone of a saddle has positive Gaussian measure.
        let mut x = loop {
            let v = DVector::from_fn(d, |i, _| {
                dir_stream.gaussian_at(dir_counter * d as u64 + i as u64)
            });
            dir_counter += 1;
            if dir_counter > 10_000 * n_windows.max(1) {
                return Err(Error::NumericalError(
                    "negative-cone sampling stalled; is lambda_min(H) < 0?".into(),
                ));
            }
            if quadratic_value(h, &v) < 0.0 {
                break v;
            }
        };
        // Rejection-sample an aligned covering window of the path.
        let start = loop {
            if block > block_budget {
                return Err(Error::NumericalError(
                    "window rejection sampling stalled".into(),
                ));
            }
            let t0 = block * m as u64;
            block += 1;
            let mut seen = vec![false; d];
            for t in t0..t0 + m as u64 {
                seen[path.draw(t).coord] = true;
            }
            if seen.iter().all(|&s| s) {
                break t0;
            }
        };

        // y carries the range(H) component of x through the same
        // recursion; for nonsingular H, y == x exactly.
        let mut y = &range_cols * (range_cols.transpose() * &x);
        if range_cols.ncols() == d {
            y = x.clone();
        }
        let f0 = quadratic_value(h, &x);
        let mut witnessed = false;
        for t in start..start + m as u64 {
            let draw = path.draw(t);
            let partial_y = row_dot(h, draw.coord, &y);
            if draw.alpha * partial_y.abs() >= delta * y.norm() * (1.0 - 1e-10) {
                witnessed = true;
            }
            quadratic_step(h, &mut x, draw.coord, draw.alpha);
            quadratic_step(h, &mut y, draw.coord, draw.alpha);
        }
        let f_m = quadratic_value(h, &x);
        if f_m - f0 <= c * f0 + 1e-10 * f0.abs() {
            satisfied += 1;
        }
        if witnessed {
            witnesses += 1;
        }
    }
    let denom = n_windows.max(1) as f64;
    Ok(DecayVerification {
        n_windows,
        satisfied,
        satisfied_fraction: satisfied as f64 / denom,
        witnesses,
        witness_fraction: witnesses as f64 / denom,
        c,
        delta,
        m,
        seed,
    })
}

/// Result of checking the compounded growth bound along one linear
/// trajectory started on the negative cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthVerification {
    pub passed: bool,
    /// `|x_{km}| >= sqrt(2 f(x_0) / lambda_min) (1+c)^(S_k / 2)` held
    /// at every k.
    pub norm_bound_ok: bool,
    /// Some K had `S_k >= (E I_0 / 2) k` for all k in [K, k_max].
    pub slln_ok: bool,
    /// Smallest such K.
    pub first_k: Option<u64>,
    pub k_max: u64,
    pub c: f64,
    pub lambda_min: f64,
    pub f0: f64,
    pub stats: GSWindowStats,
    pub seed: u64,
}

/// Simulates `k_max` windows of the linear dynamics from `x0` with
/// `f(x0) < 0` and checks the norm lower bound window by window, plus
/// the law-of-large-numbers floor on the coverage count.
pub fn verify_growth(
    h: &DMatrix<f64>,
    range: StepsizeRange,
    x0: &DVector<f64>,
    k_max: u64,
    m: usize,
    seed: u64,
) -> Result<GrowthVerification> {
    let d = h.nrows();
    if x0.len() != d {
        return Err(Error::InvalidParameter("x0 dimension mismatch".into()));
    }
    let f0 = quadratic_value(h, x0);
    if !(f0 < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "growth check needs f(x0) < 0, got {f0}"
        )));
    }
    let c = decay_constant(h, m, range)?;
    let lambda_min = symmetric_eigenvalues_sorted(h)[0];
    let path = SamplePath::new(seed, d, range)?;
    let mut stats = gs_window_stats(&path, d, m, k_max)?;

    let base = (2.0 * f0 / lambda_min).sqrt();
    let mut x = x0.clone();
    let mut coverage_sum = 0u64; // S_k after k windows
    let mut norm_bound_ok = true;
    let mut coverage_floor_ok = vec![true; k_max as usize + 1];
    let e_i0 = stats
        .exact_mean
        .unwrap_or(if k_max == 0 { 0.0 } else { stats.empirical_mean });
    let mut prev_norm = x.norm();
    for k in 0..k_max {
        for t in k * m as u64..(k + 1) * m as u64 {
            let draw = path.draw(t);
            quadratic_step(h, &mut x, draw.coord, draw.alpha);
        }
        coverage_sum += stats.indicators[k as usize] as u64;
        let norm = x.norm();
        stats.growth_ratios.push(norm / prev_norm);
        prev_norm = norm;
        let bound = base * (1.0 + c).powf(coverage_sum as f64 / 2.0);
        if norm < bound * (1.0 - 1e-9) {
            norm_bound_ok = false;
        }
        coverage_floor_ok[k as usize + 1] = coverage_sum as f64 >= 0.5 * e_i0 * (k + 1) as f64;
    }
    // Smallest K with the coverage floor holding on [K, k_max]; K = 0
    // vacuously works when k_max = 0.
    let mut first_k = None;
    let mut all_from_here = true;
    for k in (0..=k_max).rev() {
        all_from_here &= coverage_floor_ok[k as usize];
        if all_from_here {
            first_k = Some(k);
        }
    }
    let slln_ok = first_k.is_some();
    Ok(GrowthVerification {
        passed: norm_bound_ok && slln_ok,
        norm_bound_ok,
        slln_ok,
        first_k,
        k_max,
        c,
        lambda_min,
        f0,
        stats,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{make_coupled_trig, make_quadratic};
    use crate::sample_path::{CoordinateStepDraw, RecordedPath};
    use approx::assert_relative_eq;

    fn range(lo: f64, hi: f64) -> StepsizeRange {
        StepsizeRange::new(lo, hi).unwrap()
    }

    fn coupled_saddle() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0])
    }

    #[test]
    fn escape_mc_all_trials_leave_a_coupled_saddle() {
        let spec = make_quadratic(coupled_saddle()).unwrap();
        let x_star = DVector::zeros(2);
        let config = EscapeConfig {
            init_radius: 1e-3,
            escape_radius: 0.5,
            n_trials: 20,
            t_max: 50_000,
        };
        let report = escape_mc(&spec, &x_star, range(0.1, 0.5), &config, 91).unwrap();
        assert_eq!(report.fraction_escaped, 1.0);
        assert!(report.escape_times.iter().all(|e| e.is_some()));
        assert!(report.median_escape_time.unwrap() <= report.max_escape_time.unwrap());
        // Survival curve is non-increasing and hits zero at t_max.
        let times: Vec<u64> = (0..=50).map(|i| i * 1000).collect();
        let curve = report.survival_curve(&times);
        for w in curve.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(*curve.last().unwrap(), 0.0);
    }

    #[test]
    fn escape_mc_validates_its_preconditions() {
        let x_star = DVector::zeros(2);
        // A positive definite quadratic has no saddle to escape.
        let convex = make_quadratic(DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 2.0])))
            .unwrap();
        let config = EscapeConfig {
            init_radius: 1e-3,
            escape_radius: 0.5,
            n_trials: 1,
            t_max: 10,
        };
        assert!(matches!(
            escape_mc(&convex, &x_star, range(0.1, 0.4), &config, 1),
            Err(Error::NotASaddle { .. })
        ));
        let spec = make_quadratic(coupled_saddle()).unwrap();
        let bad = EscapeConfig { init_radius: 0.5, escape_radius: 0.5, ..config };
        assert!(escape_mc(&spec, &x_star, range(0.1, 0.5), &bad, 1).is_err());
    }

    #[test]
    fn escape_mc_empty_batch_is_a_valid_report() {
        let spec = make_quadratic(coupled_saddle()).unwrap();
        let x_star = DVector::zeros(2);
        let config = EscapeConfig {
            init_radius: 1e-3,
            escape_radius: 0.5,
            n_trials: 0,
            t_max: 10,
        };
        let report = escape_mc(&spec, &x_star, range(0.1, 0.5), &config, 1).unwrap();
        assert_eq!(report.fraction_escaped, 0.0);
        assert!(report.escape_times.is_empty());
        assert_eq!(report.median_escape_time, None);
    }

    #[test]
    fn escape_single_stays_on_the_stable_axis_forever() {
        // diag(1, -1): a start with zero second coordinate keeps it
        // zero under every coordinate update, and the first coordinate
        // contracts, so the trial can never escape.
        let spec = make_quadratic(DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, -1.0])))
            .unwrap();
        let x_star = DVector::zeros(2);
        let x0 = DVector::from_vec(vec![1e-3, 0.0]);
        let out =
            escape_single(&spec, &x0, &x_star, range(0.1, 0.5), 0.5, 20_000, 7).unwrap();
        assert_eq!(out, None);
        // The same budget escapes immediately from a generic start.
        let generic = DVector::from_vec(vec![1e-3, 1e-3]);
        let out =
            escape_single(&spec, &generic, &x_star, range(0.1, 0.5), 0.5, 20_000, 7).unwrap();
        assert!(out.is_some());
        // Starting exactly at the fixed point is rejected.
        assert!(escape_single(&spec, &x_star, &x_star, range(0.1, 0.5), 0.5, 10, 7).is_err());
    }

    #[test]
    fn classification_finds_minima_and_never_saddles_on_the_trig_objective() {
        let spec = make_coupled_trig(2, 0.3).unwrap();
        let lo = DVector::from_vec(vec![-3.0, -3.0]);
        let hi = DVector::from_vec(vec![3.0, 3.0]);
        let report = classify_convergence(
            &spec,
            &lo,
            &hi,
            50,
            1_000_000,
            1e-8,
            1e-4,
            range(0.1, 0.4),
            2024,
        )
        .unwrap();
        assert_eq!(report.n_converged, 50);
        assert_eq!(report.n_saddle_limits, 0);
        assert_eq!(report.n_diverged, 0);
        for o in &report.outcomes {
            assert!(o.final_grad_norm <= 1e-8);
            assert!(o.class.is_some());
            // Every limit should match a catalogued grid point.
            assert!(o.matched_known.is_some(), "unmatched limit {:?}", o.final_x);
        }
    }

    #[test]
    fn classification_flags_a_forced_saddle_limit() {
        // diag(1, -1) from the stable-axis start (1, 0): descent
        // converges to the origin, a strict saddle; the report must
        // say so rather than hide it.
        let spec = make_quadratic(DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, -1.0])))
            .unwrap();
        let forced = DVector::from_vec(vec![1.0, 0.0]);
        let report = classify_convergence(
            &spec,
            &forced,
            &forced,
            3,
            100_000,
            1e-10,
            1e-6,
            range(0.1, 0.5),
            5,
        )
        .unwrap();
        assert_eq!(report.n_converged, 3);
        assert_eq!(report.n_saddle_limits, 3);
        assert!(report.outcomes.iter().all(|o| o.matched_known == Some(0)));
    }

    #[test]
    fn exact_coverage_probability_matches_small_cases() {
        // d = 2, m = 2: surjections 2 of 4 maps.
        assert_relative_eq!(exact_coverage_probability(2, 2).unwrap(), 0.5);
        // d = 2, m = 3: 2^3 - 2 = 6 of 8.
        assert_relative_eq!(exact_coverage_probability(2, 3).unwrap(), 0.75);
        // d = 3, m = 3: 3! = 6 of 27.
        assert_relative_eq!(exact_coverage_probability(3, 3).unwrap(), 6.0 / 27.0);
        assert_relative_eq!(exact_coverage_probability(1, 5).unwrap(), 1.0);
        assert_eq!(exact_coverage_probability(13, 13), None);
        assert_eq!(exact_coverage_probability(3, 2), Some(0.0));
    }

    #[test]
    fn window_coverage_matches_the_exact_mean() {
        let path = SamplePath::new(404, 2, range(0.1, 0.5)).unwrap();
        let stats = gs_window_stats(&path, 2, 2, 100_000).unwrap();
        let exact = stats.exact_mean.unwrap();
        assert_relative_eq!(exact, 0.5);
        // Binomial SE at p = 1/2 over 1e5 windows.
        let se = (0.5 * 0.5 / 100_000.0f64).sqrt();
        assert!(
            (stats.empirical_mean - exact).abs() < 3.0 * se,
            "empirical {} vs exact {exact}",
            stats.empirical_mean
        );
    }

    #[test]
    fn single_coordinate_windows_always_cover() {
        let path = SamplePath::new(1, 1, range(0.1, 0.5)).unwrap();
        let stats = gs_window_stats(&path, 1, 1, 100).unwrap();
        assert_eq!(stats.covered_count, 100);
        assert_eq!(stats.empirical_mean, 1.0);
    }

    #[test]
    fn repeated_coordinate_windows_never_cover() {
        let draws = vec![CoordinateStepDraw { coord: 1, alpha: 0.2 }; 10];
        let path = RecordedPath::new(draws);
        let stats = gs_window_stats(&path, 2, 2, 5).unwrap();
        assert_eq!(stats.covered_count, 0);
        assert!(stats.indicators.iter().all(|&i| !i));
    }

    #[test]
    fn decay_inequality_and_witness_hold_on_every_sampled_window() {
        let h = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, -1.0]));
        let out = verify_linear_decay(&h, range(0.1, 0.5), 2, 1_000, 77).unwrap();
        assert_eq!(out.satisfied_fraction, 1.0, "{out:?}");
        assert_eq!(out.witness_fraction, 1.0, "{out:?}");
        assert_relative_eq!(out.c, 6.25e-4, max_relative = 1e-12);
    }

    #[test]
    fn decay_verification_handles_singular_h_via_range_projection() {
        // Rank-2 saddle embedded in d = 3: the kernel direction rides
        // along untouched and y tracks only the range component.
        let h = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, -1.0, 0.0]));
        let out = verify_linear_decay(&h, range(0.1, 0.5), 3, 500, 13).unwrap();
        assert_eq!(out.satisfied_fraction, 1.0, "{out:?}");
        assert_eq!(out.witness_fraction, 1.0, "{out:?}");
    }

    #[test]
    fn decay_verification_rejects_definite_matrices() {
        let h = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 2.0]));
        assert!(matches!(
            verify_linear_decay(&h, range(0.1, 0.4), 2, 10, 1),
            Err(Error::NotASaddle { .. })
        ));
    }

    #[test]
    fn growth_bound_holds_along_the_expanding_trajectory() {
        let h = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, -1.0]));
        let x0 = DVector::from_vec(vec![0.0, 1.0]);
        let out = verify_growth(&h, range(0.1, 0.5), &x0, 100, 2, 3).unwrap();
        assert!(out.passed, "{out:?}");
        assert!(out.norm_bound_ok && out.slln_ok);
        assert!(out.first_k.unwrap() <= 100);
        assert_eq!(out.stats.growth_ratios.len(), 100);
        // The trajectory expands overall: the compounded ratio exceeds 1.
        let total: f64 = out.stats.growth_ratios.iter().product();
        assert!(total > 1.0);
    }

    #[test]
    fn growth_check_edge_cases() {
        let h = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, -1.0]));
        // Positive quadratic value start violates the precondition.
        let bad = DVector::from_vec(vec![1.0, 0.0]);
        assert!(verify_growth(&h, range(0.1, 0.5), &bad, 10, 2, 3).is_err());
        // Zero windows is vacuously true.
        let x0 = DVector::from_vec(vec![0.0, 1.0]);
        let out = verify_growth(&h, range(0.1, 0.5), &x0, 0, 2, 3).unwrap();
        assert!(out.passed);
        assert_eq!(out.first_k, Some(0));
    }

    #[test]
    fn reports_are_deterministic_given_the_seed() {
        let spec = make_quadratic(coupled_saddle()).unwrap();
        let x_star = DVector::zeros(2);
        let config = EscapeConfig {
            init_radius: 1e-3,
            escape_radius: 0.5,
            n_trials: 5,
            t_max: 10_000,
        };
        let a = escape_mc(&spec, &x_star, range(0.1, 0.5), &config, 123).unwrap();
        let b = escape_mc(&spec, &x_star, range(0.1, 0.5), &config, 123).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let h = coupled_saddle();
        let v1 = verify_linear_decay(&h, range(0.1, 0.5), 2, 200, 9).unwrap();
        let v2 = verify_linear_decay(&h, range(0.1, 0.5), 2, 200, 9).unwrap();
        assert_eq!(v1, v2);
    }
}
