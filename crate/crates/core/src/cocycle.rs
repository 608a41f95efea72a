//! The linearized dynamics at a critical point and its ergodic averages.
//!
//! Around a critical point with Hessian H, one coordinate update acts on
//! the deviation as the rank-one perturbation of the identity
//!
//! ```text
//! A(i, alpha) = I - alpha e_i e_i' H,
//! ```
//!
//! and a run of steps acts by the ordered product (later steps on the
//! left). This module computes those products three ways, each matched
//! to a different question:
//!
//! - [`Cocycle::transition`] / [`Cocycle::apply_transition`]: plain
//!   dense products, built by the same sequential row updates in every
//!   code path so the composition identity holds *bit-for-bit*, not just
//!   to rounding.
//! - [`Cocycle::lyapunov_spectrum`]: QR re-orthonormalization every few
//!   steps, accumulating `log |R_jj|` to estimate the exponential growth
//!   rates without overflow.
//! - [`Cocycle::unstable_projector`]: the product maintained in
//!   QR-compensated form `Q * R_cumulative` with a separate log-scale,
//!   so the singular directions of a long product are recoverable; the
//!   projector onto the expanding directions is assembled from the top
//!   right singular vectors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::row_dot;
use crate::sample_path::{CoordinateStepDraw, DrawSequence, RecordedPath, SamplePath, StepsizeRange};

/// Steps between re-orthonormalizations when no period is given.
pub const DEFAULT_QR_PERIOD: u64 = 10;

/// Dense step matrix `I - alpha e_i e_i' H`: the identity with row i
/// replaced by `e_i' - alpha H_{i,:}`.
pub fn step_matrix(h: &DMatrix<f64>, draw: CoordinateStepDraw) -> DMatrix<f64> {
    let d = h.nrows();
    let mut a = DMatrix::identity(d, d);
    for k in 0..d {
        a[(draw.coord, k)] -= draw.alpha * h[(draw.coord, k)];
    }
    a
}

/// Closed-form inverse `I + alpha e_i e_i' H / (1 - alpha H_ii)`,
/// valid when `alpha |H_ii| < 1`.
///
/// The rank-one structure survives inversion: only row i differs from
/// the identity, scaled by `alpha / (1 - alpha H_ii)`.
pub fn step_inverse(h: &DMatrix<f64>, draw: CoordinateStepDraw) -> Result<DMatrix<f64>> {
    let d = h.nrows();
    let i = draw.coord;
    let h_ii = h[(i, i)];
    let value = draw.alpha * h_ii.abs();
    if value >= 1.0 {
        return Err(Error::SingularStep { coord: i, value });
    }
    let scale = draw.alpha / (1.0 - draw.alpha * h_ii);
    let mut a = DMatrix::identity(d, d);
    for k in 0..d {
        a[(i, k)] += scale * h[(i, k)];
    }
    Ok(a)
}

/// Applies the steps for draws `t0..t1` to the columns of `m`, in
/// place. The row update for draw `(i, alpha)` is
/// `row_i(M) -= alpha * (H_{i,:} M)` with a strict left-to-right
/// accumulation over the contraction index; every product in this
/// module funnels through here, which is what makes composed and direct
/// transition products agree exactly.
fn apply_steps_in_place<P: DrawSequence>(
    h: &DMatrix<f64>,
    path: &P,
    t0: u64,
    t1: u64,
    m: &mut DMatrix<f64>,
) {
    let d = h.nrows();
    let ncols = m.ncols();
    let mut tmp = vec![0.0f64; ncols];
    for t in t0..t1 {
        let draw = path.draw(t);
        let i = draw.coord;
        for (j, slot) in tmp.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..d {
                acc += h[(i, k)] * m[(k, j)];
            }
            *slot = acc;
        }
        for (j, &v) in tmp.iter().enumerate() {
            m[(i, j)] -= draw.alpha * v;
        }
    }
}

/// The linear cocycle: Hessian, stepsize range, and the driving path.
#[derive(Debug, Clone)]
pub struct Cocycle<P: DrawSequence = SamplePath> {
    h: DMatrix<f64>,
    range: StepsizeRange,
    path: P,
    seed: Option<u64>,
}

impl Cocycle<SamplePath> {
    /// Cocycle driven by a counter-based path; the path's seed is kept
    /// for report provenance.
    pub fn new(h: DMatrix<f64>, path: SamplePath) -> Result<Self> {
        crate::linalg::require_symmetric(&h, 1e-12)?;
        if h.nrows() != path.dim {
            return Err(Error::InvalidParameter(format!(
                "H is {}x{} but the path draws coordinates below {}",
                h.nrows(),
                h.ncols(),
                path.dim
            )));
        }
        let seed = Some(path.seed);
        Ok(Cocycle { h, range: path.range, path, seed })
    }
}

impl Cocycle<RecordedPath> {
    /// Cocycle driven by an explicit draw list (replay or examples).
    pub fn from_draws(h: DMatrix<f64>, range: StepsizeRange, path: RecordedPath) -> Result<Self> {
        crate::linalg::require_symmetric(&h, 1e-12)?;
        Ok(Cocycle { h, range, path, seed: None })
    }
}

impl<P: DrawSequence> Cocycle<P> {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn range(&self) -> StepsizeRange {
        self.range
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Checks `alpha_max < 1 / max_i |H_ii|`, the condition under which
    /// every step matrix the path can draw is invertible.
    pub fn validate_invertibility(&self) -> Result<()> {
        let max_diag = (0..self.dim()).fold(0.0f64, |m, i| m.max(self.h[(i, i)].abs()));
        if self.range.alpha_max() * max_diag >= 1.0 {
            return Err(Error::SingularStep {
                coord: (0..self.dim())
                    .max_by(|&a, &b| {
                        self.h[(a, a)].abs().partial_cmp(&self.h[(b, b)].abs()).unwrap()
                    })
                    .unwrap(),
                value: self.range.alpha_max() * max_diag,
            });
        }
        Ok(())
    }

    /// Ordered product of the step matrices for draws `t0..t1` (later
    /// draws multiply on the left). The empty product is exactly the
    /// identity.
    pub fn transition(&self, t0: u64, t1: u64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.dim(), self.dim());
        apply_steps_in_place(&self.h, &self.path, t0, t1, &mut m);
        m
    }

    /// `transition(t0, t1) * m`, computed by applying the steps to `m`
    /// directly. Composing `apply_transition` over adjacent intervals
    /// performs the identical sequence of floating-point operations as
    /// one call over the union, so the cocycle identity is exact.
    pub fn apply_transition(&self, t0: u64, t1: u64, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = m.clone();
        apply_steps_in_place(&self.h, &self.path, t0, t1, &mut out);
        out
    }

    /// `transition(t0, t1) * v` for a single vector. Bit-identical to
    /// running the descent recursion on the quadratic objective with
    /// matrix H.
    pub fn apply_to_vector(&self, t0: u64, t1: u64, v: &DVector<f64>) -> DVector<f64> {
        let mut x = v.clone();
        for t in t0..t1 {
            let draw = self.path.draw(t);
            let g_i = row_dot(&self.h, draw.coord, &x);
            x[draw.coord] -= draw.alpha * g_i;
        }
        x
    }

    /// Estimates the Lyapunov spectrum over `horizon` steps with QR
    /// re-orthonormalization every `qr_period` steps.
    ///
    /// Requires `horizon >= 10 * qr_period` so that per-block rate
    /// variance is estimable. Directions whose growth rates agree
    /// within 10x their standard error are merged into one exponent;
    /// an exponent counts as positive when it clears 3x its standard
    /// error.
    pub fn lyapunov_spectrum(&self, horizon: u64, qr_period: u64) -> Result<LyapunovSpectrum> {
        let d = self.dim();
        if qr_period == 0 {
            return Err(Error::InvalidParameter("qr_period must be >= 1".into()));
        }
        if horizon < 10 * qr_period {
            return Err(Error::InvalidParameter(format!(
                "horizon {horizon} too short: need at least 10 * qr_period = {}",
                10 * qr_period
            )));
        }

        let mut q = DMatrix::identity(d, d);
        let mut log_sums = vec![0.0f64; d];
        let mut block_rates: Vec<Vec<f64>> = vec![Vec::new(); d];
        let mut t = 0u64;
        while t < horizon {
            let steps = qr_period.min(horizon - t);
            apply_steps_in_place(&self.h, &self.path, t, t + steps, &mut q);
            if q.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalError(format!(
                    "transition block overflowed at t = {t}; use a smaller qr_period"
                )));
            }
            let (q_next, r) = q.qr().unpack();
            for j in 0..d {
                let r_jj = r[(j, j)].abs();
                if !(r_jj.is_finite() && r_jj > 0.0) {
                    return Err(Error::NumericalError(format!(
                        "degenerate QR block at t = {t} (|R_{j}{j}| = {r_jj}); \
                         use a smaller qr_period or check the stepsize range"
                    )));
                }
                let l = r_jj.ln();
                log_sums[j] += l;
                block_rates[j].push(l / steps as f64);
            }
            q = q_next;
            t += steps;
        }

        // Raw per-direction rates with block-bootstrap standard errors.
        let n_blocks = block_rates[0].len();
        let mut raw: Vec<(f64, f64)> = (0..d)
            .map(|j| {
                let rate = log_sums[j] / horizon as f64;
                let mean: f64 = block_rates[j].iter().sum::<f64>() / n_blocks as f64;
                let var: f64 = block_rates[j]
                    .iter()
                    .map(|b| (b - mean) * (b - mean))
                    .sum::<f64>()
                    / (n_blocks.saturating_sub(1)).max(1) as f64;
                (rate, (var / n_blocks as f64).sqrt())
            })
            .collect();
        raw.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

        // Merge directions whose rates are statistically indistinguishable.
        let mut exponents = Vec::new();
        let mut multiplicities = Vec::new();
        let mut standard_errors: Vec<f64> = Vec::new();
        let mut index_map = vec![0usize; d];
        let mut members: Vec<f64> = vec![raw[0].0];
        let mut cluster_se = raw[0].1;
        let mut start = 0usize;
        let flush =
            |exps: &mut Vec<f64>, mults: &mut Vec<usize>, ses: &mut Vec<f64>, members: &Vec<f64>, se: f64| {
                exps.push(members.iter().sum::<f64>() / members.len() as f64);
                mults.push(members.len());
                ses.push(se);
            };
        for j in 1..d {
            let (rate, se) = raw[j];
            let prev = raw[j - 1];
            if prev.0 - rate <= 10.0 * se.max(prev.1) {
                members.push(rate);
                cluster_se = cluster_se.max(se);
            } else {
                flush(&mut exponents, &mut multiplicities, &mut standard_errors, &members, cluster_se);
                for slot in index_map.iter_mut().take(j).skip(start) {
                    *slot = exponents.len() - 1;
                }
                start = j;
                members = vec![rate];
                cluster_se = se;
            }
        }
        flush(&mut exponents, &mut multiplicities, &mut standard_errors, &members, cluster_se);
        for slot in index_map.iter_mut().take(d).skip(start) {
            *slot = exponents.len() - 1;
        }

        let d_plus = exponents
            .iter()
            .zip(&multiplicities)
            .zip(&standard_errors)
            .filter(|((&e, _), &se)| e > 3.0 * se)
            .map(|((_, &m), _)| m)
            .sum();
        let gap = exponents
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a: f64| a.min(g))));

        Ok(LyapunovSpectrum {
            exponents,
            multiplicities,
            standard_errors,
            raw_rates: raw.iter().map(|r| r.0).collect(),
            raw_standard_errors: raw.iter().map(|r| r.1).collect(),
            horizon,
            qr_period,
            d_plus,
            gap,
            index_map,
            seed: self.seed,
        })
    }

    /// Projector onto the span of the top `d_plus` right singular
    /// vectors of the transition over `[t_start, t_start + horizon)`.
    ///
    /// The product is accumulated as `Q * R_cum` with per-block QR and a
    /// separate log-scale on `R_cum`, so singular values whose logs far
    /// exceed f64 range stay recoverable as log-rates. Errors with
    /// `AmbiguousSubspace` when the relative singular-value gap at the
    /// cut falls below 1e-8.
    pub fn unstable_projector(
        &self,
        t_start: u64,
        horizon: u64,
        d_plus: usize,
    ) -> Result<UnstableProjector> {
        let d = self.dim();
        if d_plus == 0 || d_plus > d {
            return Err(Error::InvalidParameter(format!(
                "d_plus must be in 1..={d}, got {d_plus}"
            )));
        }
        if horizon == 0 {
            return Err(Error::InvalidParameter("projector horizon must be >= 1".into()));
        }

        let mut q = DMatrix::identity(d, d);
        let mut r_cum = DMatrix::identity(d, d);
        let mut log_scale = 0.0f64;
        let mut t = t_start;
        let end = t_start + horizon;
        while t < end {
            let steps = DEFAULT_QR_PERIOD.min(end - t);
            apply_steps_in_place(&self.h, &self.path, t, t + steps, &mut q);
            if q.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalError(format!(
                    "transition block overflowed at t = {t} while accumulating the projector"
                )));
            }
            let (q_next, r) = q.qr().unpack();
            q = q_next;
            r_cum = &r * &r_cum;
            let scale = r_cum.amax();
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::NumericalError(format!(
                    "singular or overflowed R accumulation at t = {t}"
                )));
            }
            r_cum /= scale;
            log_scale += scale.ln();
            t += steps;
        }

        let m = &q * &r_cum;
        let svd = m.svd(true, true);
        // nalgebra sorts singular values descending.
        let singular_log_rates: Vec<f64> = svd
            .singular_values
            .iter()
            .map(|&s| (s.max(f64::MIN_POSITIVE).ln() + log_scale) / horizon as f64)
            .collect();
        let gap_ratio = if d_plus < d {
            let top = svd.singular_values[d_plus - 1];
            let next = svd.singular_values[d_plus];
            if top <= 0.0 {
                1.0
            } else {
                next / top
            }
        } else {
            0.0
        };
        if d_plus < d && 1.0 - gap_ratio < 1e-8 {
            return Err(Error::AmbiguousSubspace { gap: 1.0 - gap_ratio });
        }
        let v_t = svd.v_t.expect("requested V^T");
        let v_plus = v_t.rows(0, d_plus).transpose();
        let p_plus = &v_plus * v_plus.transpose();

        Ok(UnstableProjector {
            p_plus,
            d_plus,
            t_start,
            horizon,
            singular_log_rates,
            gap_ratio,
            seed: self.seed,
        })
    }
}

/// Estimated Lyapunov spectrum: distinct exponents (descending) with
/// multiplicities, plus the raw per-direction rates they were merged
/// from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    /// Distinct exponents, strictly decreasing.
    pub exponents: Vec<f64>,
    /// Dimension of each exponent's Oseledets block.
    pub multiplicities: Vec<usize>,
    /// Per-exponent standard error (largest member SE of the cluster).
    pub standard_errors: Vec<f64>,
    /// Per-direction rates before clustering, descending.
    pub raw_rates: Vec<f64>,
    pub raw_standard_errors: Vec<f64>,
    pub horizon: u64,
    pub qr_period: u64,
    /// Total multiplicity of exponents above the sign threshold
    /// (3x standard error).
    pub d_plus: usize,
    /// Smallest spacing between adjacent distinct exponents; `None`
    /// when only one exponent was resolved.
    pub gap: Option<f64>,
    /// Direction index (descending rates) -> exponent index.
    pub index_map: Vec<usize>,
    /// Seed of the driving path when counter-based.
    pub seed: Option<u64>,
}

impl LyapunovSpectrum {
    /// Smallest positive exponent, if any direction expands.
    pub fn lambda_plus(&self) -> Option<f64> {
        self.exponents
            .iter()
            .zip(&self.standard_errors)
            .filter(|(&e, &se)| e > 3.0 * se)
            .map(|(&e, _)| e)
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a: f64| a.min(e))))
    }
}

/// Projector onto the estimated unstable (expanding) subspace at a
/// finite horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnstableProjector {
    /// Symmetric idempotent matrix of rank `d_plus`.
    pub p_plus: DMatrix<f64>,
    pub d_plus: usize,
    pub t_start: u64,
    /// Number of steps in the accumulated product (S).
    pub horizon: u64,
    /// `log sigma_j / S` for every singular direction, descending.
    /// Rates below the dense-SVD noise floor (around
    /// `log(eps * sigma_1) / S`) are clamped, not meaningful.
    pub singular_log_rates: Vec<f64>,
    /// `sigma_{d_plus + 1} / sigma_{d_plus}` at the cut; 0 when the cut
    /// is at full dimension.
    pub gap_ratio: f64,
    pub seed: Option<u64>,
}

impl UnstableProjector {
    /// `|P_plus e_i|` for each coordinate axis: how visible each
    /// coordinate is inside the unstable subspace.
    pub fn axis_alignments(&self) -> Vec<f64> {
        (0..self.p_plus.ncols())
            .map(|i| self.p_plus.column(i).norm())
            .collect()
    }
}
