//! Seeded sequences of (coordinate, stepsize) draws.
//!
//! A [`SamplePath`] is a *pure function* from a time index to a draw: the
//! draw at time `t` depends only on `(seed, offset + t, dim, range)`.
//! There is no mutable generator state, so shifting the path (dropping a
//! prefix) is O(1) and two paths that agree on `(seed, offset + t)` agree
//! on the draw bit-for-bit. That purity is what makes trajectory replay
//! and the shift/cocycle identities exact rather than approximate.
//!
//! Randomness comes from the splitmix64 output function applied to a
//! per-index counter, the usual counter-based construction for
//! reproducible parallel streams.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Weyl increment for the splitmix64 counter sequence.
const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 output function (Steele, Lea & Flood's finalizer).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The splitmix64 stream for `seed`, evaluated at position `index`
/// without stepping through earlier positions.
#[inline]
fn stream_at(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)))
}

/// Derives an independent stream seed from a base seed and a stream
/// index (trial number, init sampler, ...). Documented mixing:
/// `mix64(base XOR (index + 1) * GOLDEN_GAMMA)`; the `+ 1` keeps
/// stream 0 from collapsing onto the base stream.
#[inline]
pub fn derive_seed(base: u64, stream_index: u64) -> u64 {
    mix64(base ^ stream_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))
}

/// A raw counter-based stream of uniforms; the building block under
/// [`SamplePath`] and the Monte Carlo init samplers.
///
/// Every method is a pure function of `(seed, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterStream {
    pub seed: u64,
}

impl CounterStream {
    pub fn new(seed: u64) -> Self {
        CounterStream { seed }
    }

    /// Raw 64-bit value at `index`.
    #[inline]
    pub fn u64_at(&self, index: u64) -> u64 {
        stream_at(self.seed, index)
    }

    /// Uniform in [0, 1) with 53-bit mantissa resolution.
    #[inline]
    pub fn unit_f64_at(&self, index: u64) -> f64 {
        (self.u64_at(index) >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in (0, 1): the half-offset keeps Box-Muller's log away
    /// from zero.
    #[inline]
    pub fn open_unit_f64_at(&self, index: u64) -> f64 {
        ((self.u64_at(index) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform integer in `0..n` via the multiply-shift reduction.
    /// The residual bias is O(n / 2^64), far below every statistical
    /// tolerance used in this crate.
    #[inline]
    pub fn below_at(&self, index: u64, n: usize) -> usize {
        (((self.u64_at(index) as u128) * (n as u128)) >> 64) as usize
    }

    /// Standard Gaussian via Box-Muller on the pair of counters
    /// `(2*index, 2*index + 1)`.
    pub fn gaussian_at(&self, index: u64) -> f64 {
        let u1 = self.open_unit_f64_at(index.wrapping_mul(2));
        let u2 = self.unit_f64_at(index.wrapping_mul(2).wrapping_add(1));
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Validated stepsize interval `[alpha_min, alpha_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepsizeRange {
    alpha_min: f64,
    alpha_max: f64,
}

impl StepsizeRange {
    /// Requires `0 < alpha_min < alpha_max`, both finite.
    pub fn new(alpha_min: f64, alpha_max: f64) -> Result<Self> {
        if !(alpha_min.is_finite() && alpha_max.is_finite()) || alpha_min <= 0.0 || alpha_max <= alpha_min {
            return Err(Error::InvalidParameter(format!(
                "stepsize range requires 0 < alpha_min < alpha_max, got [{alpha_min}, {alpha_max}]"
            )));
        }
        Ok(StepsizeRange { alpha_min, alpha_max })
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn width(&self) -> f64 {
        self.alpha_max - self.alpha_min
    }

    /// Checks the smoothness contract `alpha_max < 1/M` for a Hessian
    /// bound `M`.
    pub fn validate_against_bound(&self, m_bound: f64) -> Result<()> {
        if !(m_bound > 0.0) || !m_bound.is_finite() || self.alpha_max * m_bound >= 1.0 {
            return Err(Error::AssumptionViolation(format!(
                "alpha_max = {} must be < 1/M = {:.6e}",
                self.alpha_max,
                1.0 / m_bound
            )));
        }
        Ok(())
    }
}

/// One draw of the randomized scheme: a coordinate index (0-based,
/// `coord < dim`) and a stepsize in `[alpha_min, alpha_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateStepDraw {
    /// 0-based coordinate index.
    pub coord: usize,
    pub alpha: f64,
}

/// Anything that can hand out the draw for time `t`. Implemented by the
/// counter-based [`SamplePath`] and by [`RecordedPath`] (an explicit
/// list, used for replay).
pub trait DrawSequence {
    fn draw(&self, t: u64) -> CoordinateStepDraw;
}

/// Counter-based sample path: coordinate `i_t ~ U{0..dim-1}` and
/// stepsize `alpha_t ~ U[alpha_min, alpha_max]`, both pure functions of
/// `(seed, offset + t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub seed: u64,
    /// Number of draws already consumed by shifts.
    pub offset: u64,
    pub dim: usize,
    pub range: StepsizeRange,
}

impl SamplePath {
    pub fn new(seed: u64, dim: usize, range: StepsizeRange) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be >= 1".into()));
        }
        Ok(SamplePath { seed, offset: 0, dim, range })
    }

    /// The path with its first `s` draws dropped. O(1): only the offset
    /// moves, so `shift(p, a).shift(b).draw(t) == p.draw(a + b + t)`
    /// exactly.
    pub fn shift(&self, s: u64) -> SamplePath {
        SamplePath {
            offset: self.offset.wrapping_add(s),
            ..*self
        }
    }

    /// First `n` draws, in order.
    pub fn record_prefix(&self, n: u64) -> Vec<CoordinateStepDraw> {
        (0..n).map(|t| self.draw(t)).collect()
    }
}

impl DrawSequence for SamplePath {
    fn draw(&self, t: u64) -> CoordinateStepDraw {
        let stream = CounterStream::new(self.seed);
        let index = self.offset.wrapping_add(t);
        // Counters 2k / 2k+1 carry the coordinate and stepsize of draw k.
        let coord = stream.below_at(index.wrapping_mul(2), self.dim);
        let unit = stream.unit_f64_at(index.wrapping_mul(2).wrapping_add(1));
        let alpha = self.range.alpha_min() + unit * self.range.width();
        CoordinateStepDraw { coord, alpha }
    }
}

/// An explicit, finite draw sequence (e.g. a recorded prefix) replayed
/// as a path. Drawing past the end panics; pair it with a stop rule
/// bounded by `len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedPath {
    pub draws: Vec<CoordinateStepDraw>,
}

impl RecordedPath {
    pub fn new(draws: Vec<CoordinateStepDraw>) -> Self {
        RecordedPath { draws }
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

impl DrawSequence for RecordedPath {
    fn draw(&self, t: u64) -> CoordinateStepDraw {
        self.draws[t as usize]
    }
}

/// Serialized form of one draw: `{"t": n, "i": coord, "alpha": a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct DrawRecord {
    t: u64,
    i: usize,
    alpha: f64,
}

/// Writes the first `n` draws of `path` as JSON lines.
pub fn write_prefix_jsonl<W: Write>(path: &SamplePath, n: u64, mut out: W) -> std::io::Result<()> {
    for t in 0..n {
        let d = path.draw(t);
        let rec = DrawRecord { t, i: d.coord, alpha: d.alpha };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a JSON-lines prefix back into an explicit path. Records must
/// be consecutive from t = 0.
pub fn read_prefix_jsonl<R: BufRead>(input: R) -> Result<RecordedPath> {
    let mut draws = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidParameter(format!("read error: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DrawRecord = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidParameter(format!("bad draw record on line {}: {e}", k + 1)))?;
        if rec.t != draws.len() as u64 {
            return Err(Error::InvalidParameter(format!(
                "draw records must be consecutive from t = 0; expected t = {}, got {}",
                draws.len(),
                rec.t
            )));
        }
        draws.push(CoordinateStepDraw { coord: rec.i, alpha: rec.alpha });
    }
    Ok(RecordedPath::new(draws))
}
