//! Objective functions with explicit derivative and curvature contracts.
//!
//! An [`ObjectiveSpec`] packages a C^2 function with its gradient,
//! per-coordinate partials, Hessian, and a global spectral bound `M` on
//! the Hessian. Partials are the primitive: `grad` is assembled
//! component-by-component from `partial`, so `partial(x, i)` equals
//! `grad(x)[i]` *exactly*, not just to rounding. Coordinate descent
//! steps and linearized-cocycle steps therefore see the same numbers.
//!
//! Catalog:
//! - `"quadratic"`: f(x) = x'Hx / 2 for symmetric H; the linear model
//!   every certificate computation is phrased in.
//! - `"coupled_trig"`: a periodic nonconvex family with nearest-neighbor
//!   coupling and closed-form derivatives.
//! - `"rosenbrock"`: unbounded curvature; only constructible with the
//!   assumption-violation flag, for exploratory runs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{require_symmetric, row_dot, symmetric_eigenvalues_sorted, symmetric_spectral_norm};

/// Default tolerance on `|grad|` when deciding whether a point is
/// critical.
pub const DEFAULT_GRAD_TOL: f64 = 1e-8;
/// Default tolerance on eigenvalue signs when classifying curvature.
pub const DEFAULT_EIG_TOL: f64 = 1e-8;

/// Curvature class of a critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalPointKind {
    /// Every Hessian eigenvalue above `+tol`.
    LocalMinCandidate,
    /// Smallest Hessian eigenvalue below `-tol`: an unstable direction
    /// exists. Local maxima fall in this class too.
    StrictSaddle,
    /// Smallest eigenvalue within `[-tol, +tol]`: the test is
    /// inconclusive at this tolerance.
    Degenerate,
}

/// Classification result: the kind, the smallest Hessian eigenvalue
/// that decided it, and the tolerance used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointClass {
    pub kind: CriticalPointKind,
    pub min_eig: f64,
    pub eig_tol: f64,
}

/// A critical point known at construction time, with its class.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownCriticalPoint {
    pub x: DVector<f64>,
    pub kind: CriticalPointKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Quadratic { h: DMatrix<f64> },
    CoupledTrig { kappa: f64 },
    Rosenbrock,
}

/// A twice-differentiable objective with explicit derivatives and a
/// global Hessian bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    dim: usize,
    kind: Kind,
    hessian_bound: f64,
    assumption_compliant: bool,
    known_critical_points: Vec<KnownCriticalPoint>,
}

impl ObjectiveSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Global bound `M >= sup_x ||hessian(x)||` (spectral norm).
    /// Infinite for catalog entries that violate the smoothness
    /// assumption.
    pub fn hessian_bound(&self) -> f64 {
        self.hessian_bound
    }

    /// False when the objective was constructed behind the
    /// assumption-violation flag (no finite global Hessian bound).
    pub fn assumption_compliant(&self) -> bool {
        self.assumption_compliant
    }

    pub fn known_critical_points(&self) -> &[KnownCriticalPoint] {
        &self.known_critical_points
    }

    /// For quadratic objectives, the (symmetric) matrix H.
    pub fn quadratic_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.kind {
            Kind::Quadratic { h } => Some(h),
            _ => None,
        }
    }

    /// Catalog identifier ("quadratic", "coupled_trig", "rosenbrock").
    pub fn id(&self) -> &'static str {
        match self.kind {
            Kind::Quadratic { .. } => "quadratic",
            Kind::CoupledTrig { .. } => "coupled_trig",
            Kind::Rosenbrock => "rosenbrock",
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Quadratic { h } => {
                let mut acc = 0.0;
                for i in 0..self.dim {
                    acc += x[i] * row_dot(h, i, x);
                }
                0.5 * acc
            }
            Kind::CoupledTrig { kappa } => {
                let d = self.dim;
                let mut acc = 0.0;
                for i in 0..d {
                    acc += x[i].cos();
                }
                for i in 0..d {
                    acc += kappa * x[i].sin() * x[(i + 1) % d].sin();
                }
                acc
            }
            Kind::Rosenbrock => {
                let mut acc = 0.0;
                for i in 0..self.dim - 1 {
                    let a = x[i + 1] - x[i] * x[i];
                    let b = 1.0 - x[i];
                    acc += 100.0 * a * a + b * b;
                }
                acc
            }
        }
    }

    /// The i-th gradient component. This is the primitive the step
    /// update uses; `grad` is assembled from it.
    pub fn partial(&self, x: &DVector<f64>, i: usize) -> f64 {
        debug_assert!(i < self.dim);
        match &self.kind {
            Kind::Quadratic { h } => row_dot(h, i, x),
            Kind::CoupledTrig { kappa } => {
                let d = self.dim;
                // Each coordinate has exactly two incident coupling
                // edges: (i-1, i) and (i, i+1). For d = 2 both connect
                // to the same neighbor, doubling the coupling.
                let left = x[(i + d - 1) % d].sin();
                let right = x[(i + 1) % d].sin();
                -x[i].sin() + kappa * x[i].cos() * (left + right)
            }
            Kind::Rosenbrock => {
                let d = self.dim;
                let mut g = 0.0;
                if i < d - 1 {
                    g += -400.0 * x[i] * (x[i + 1] - x[i] * x[i]) - 2.0 * (1.0 - x[i]);
                }
                if i > 0 {
                    g += 200.0 * (x[i] - x[i - 1] * x[i - 1]);
                }
                g
            }
        }
    }

    /// Full gradient, component i computed by the same expression as
    /// `partial(x, i)`.
    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| self.partial(x, i))
    }

    pub fn grad_norm(&self, x: &DVector<f64>) -> f64 {
        self.grad(x).norm()
    }

    /// Hessian at `x`; symmetric by construction.
    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.kind {
            Kind::Quadratic { h } => h.clone(),
            Kind::CoupledTrig { kappa } => {
                let d = self.dim;
                let mut h = DMatrix::zeros(d, d);
                for i in 0..d {
                    let left = x[(i + d - 1) % d].sin();
                    let right = x[(i + 1) % d].sin();
                    h[(i, i)] = -x[i].cos() - kappa * x[i].sin() * (left + right);
                }
                // One off-diagonal contribution per coupling edge
                // (i, i+1 mod d); for d = 2 the two edges join the same
                // pair, so the entries accumulate.
                for i in 0..d {
                    let j = (i + 1) % d;
                    if i == j {
                        // d = 1 is rejected at construction.
                        unreachable!();
                    }
                    let v = kappa * x[i].cos() * x[j].cos();
                    h[(i, j)] += v;
                    h[(j, i)] += v;
                }
                h
            }
            Kind::Rosenbrock => {
                let d = self.dim;
                let mut h = DMatrix::zeros(d, d);
                for i in 0..d - 1 {
                    h[(i, i)] += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
                    h[(i + 1, i + 1)] += 200.0;
                    h[(i, i + 1)] += -400.0 * x[i];
                    h[(i + 1, i)] += -400.0 * x[i];
                }
                h
            }
        }
    }
}

/// f(x) = x'Hx / 2 for symmetric H. Rejects asymmetric input (reporting
/// the worst deviation) rather than symmetrizing silently. The Hessian
/// bound is the spectral norm of H; the origin is registered as the
/// known critical point with its curvature class.
pub fn make_quadratic(h: DMatrix<f64>) -> Result<ObjectiveSpec> {
    require_symmetric(&h, 1e-12)?;
    let dim = h.nrows();
    if dim == 0 {
        return Err(Error::InvalidParameter("quadratic objective needs dim >= 1".into()));
    }
    let m_bound = symmetric_spectral_norm(&h);
    let eigs = symmetric_eigenvalues_sorted(&h);
    let kind = classify_from_min_eig(eigs[0], DEFAULT_EIG_TOL);
    let origin = KnownCriticalPoint { x: DVector::zeros(dim), kind };
    Ok(ObjectiveSpec {
        dim,
        kind: Kind::Quadratic { h },
        hessian_bound: m_bound,
        assumption_compliant: true,
        known_critical_points: vec![origin],
    })
}

/// f(x) = sum_i cos(x_i) + kappa * sum_i sin(x_i) sin(x_{i+1 mod d}).
///
/// Requires d >= 2 and |kappa| < 1/2. The Hessian bound is the
/// Gershgorin row-sum bound M = 1 + 4|kappa|: each diagonal entry is at
/// most 1 + 2|kappa| in magnitude (two incident coupling edges) and the
/// off-diagonal row sum is at most 2|kappa|.
///
/// Critical points include every vector with all coordinates in
/// {-pi, 0, pi}; the construction registers that grid (for d small
/// enough to enumerate) with each point's curvature class.
pub fn make_coupled_trig(dim: usize, kappa: f64) -> Result<ObjectiveSpec> {
    if dim < 2 {
        return Err(Error::InvalidParameter("coupled_trig needs dim >= 2".into()));
    }
    if !(kappa.abs() < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "coupled_trig needs |kappa| < 1/2, got {kappa}"
        )));
    }
    let m_bound = 1.0 + 4.0 * kappa.abs();
    let mut spec = ObjectiveSpec {
        dim,
        kind: Kind::CoupledTrig { kappa },
        hessian_bound: m_bound,
        assumption_compliant: true,
        known_critical_points: Vec::new(),
    };
    spec.known_critical_points = trig_grid_critical_points(&spec);
    Ok(spec)
}

/// The classic banana function. No finite global Hessian bound exists,
/// so this entry is only constructible with `allow_assumption_violation`
/// and downstream runs must opt in explicitly as well.
pub fn make_rosenbrock(dim: usize, allow_assumption_violation: bool) -> Result<ObjectiveSpec> {
    if dim < 2 {
        return Err(Error::InvalidParameter("rosenbrock needs dim >= 2".into()));
    }
    if !allow_assumption_violation {
        return Err(Error::AssumptionViolation(
            "rosenbrock has unbounded Hessian; pass the assumption-violation flag to construct it".into(),
        ));
    }
    let minimum = KnownCriticalPoint {
        x: DVector::from_element(dim, 1.0),
        kind: CriticalPointKind::LocalMinCandidate,
    };
    Ok(ObjectiveSpec {
        dim,
        kind: Kind::Rosenbrock,
        hessian_bound: f64::INFINITY,
        assumption_compliant: false,
        known_critical_points: vec![minimum],
    })
}

/// Enumerates the {-pi, 0, pi}^d grid of critical points for the
/// trigonometric family, classified by Hessian eigenvalues. Skipped for
/// d > 6 where the 3^d enumeration stops being useful metadata.
fn trig_grid_critical_points(spec: &ObjectiveSpec) -> Vec<KnownCriticalPoint> {
    if spec.dim > 6 {
        return Vec::new();
    }
    let values = [-std::f64::consts::PI, 0.0, std::f64::consts::PI];
    let total = 3usize.pow(spec.dim as u32);
    let mut points = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let x = DVector::from_fn(spec.dim, |_, _| {
            let v = values[c % 3];
            c /= 3;
            v
        });
        let eigs = symmetric_eigenvalues_sorted(&spec.hessian(&x));
        points.push(KnownCriticalPoint {
            x,
            kind: classify_from_min_eig(eigs[0], DEFAULT_EIG_TOL),
        });
    }
    points
}

fn classify_from_min_eig(min_eig: f64, eig_tol: f64) -> CriticalPointKind {
    if min_eig < -eig_tol {
        CriticalPointKind::StrictSaddle
    } else if min_eig > eig_tol {
        CriticalPointKind::LocalMinCandidate
    } else {
        CriticalPointKind::Degenerate
    }
}

/// Classifies `x` by the spectrum of the Hessian there.
///
/// Errors with `NotCritical` when `|grad(x)| > grad_tol`; classification
/// away from critical points is meaningless.
pub fn classify_critical_point(
    spec: &ObjectiveSpec,
    x: &DVector<f64>,
    grad_tol: f64,
    eig_tol: f64,
) -> Result<CriticalPointClass> {
    let grad_norm = spec.grad_norm(x);
    if grad_norm > grad_tol {
        return Err(Error::NotCritical { grad_norm, grad_tol });
    }
    let eigs = symmetric_eigenvalues_sorted(&spec.hessian(x));
    let min_eig = eigs[0];
    Ok(CriticalPointClass {
        kind: classify_from_min_eig(min_eig, eig_tol),
        min_eig,
        eig_tol,
    })
}

/// Looks up a catalog objective by id.
///
/// - `"quadratic"` requires `matrix`.
/// - `"coupled_trig"` requires `dim` and `kappa`.
/// - `"rosenbrock"` requires `dim` and the assumption-violation flag.
pub fn from_catalog(
    id: &str,
    matrix: Option<DMatrix<f64>>,
    dim: Option<usize>,
    kappa: Option<f64>,
    allow_assumption_violation: bool,
) -> Result<ObjectiveSpec> {
    match id {
        "quadratic" => {
            let h = matrix.ok_or_else(|| {
                Error::InvalidParameter("objective 'quadratic' needs a matrix".into())
            })?;
            make_quadratic(h)
        }
        "coupled_trig" => {
            let d = dim.ok_or_else(|| {
                Error::InvalidParameter("objective 'coupled_trig' needs dim".into())
            })?;
            let k = kappa.ok_or_else(|| {
                Error::InvalidParameter("objective 'coupled_trig' needs kappa".into())
            })?;
            make_coupled_trig(d, k)
        }
        "rosenbrock" => {
            let d = dim.ok_or_else(|| {
                Error::InvalidParameter("objective 'rosenbrock' needs dim".into())
            })?;
            make_rosenbrock(d, allow_assumption_violation)
        }
        other => Err(Error::InvalidParameter(format!("unknown objective id '{other}'"))),
    }
}

/// Parses a row-major CSV of floats into a square matrix.
pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect();
        let row = row.map_err(|e| {
            Error::InvalidParameter(format!("bad CSV entry on line {}: {e}", lineno + 1))
        })?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter(format!(
            "matrix CSV must be square and nonempty, got {n} rows"
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample_path::CounterStream;

    fn diag(entries: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(entries))
    }

    /// Central-difference gradient; the independent oracle for the
    /// closed-form derivatives.
    fn fd_grad(spec: &ObjectiveSpec, x: &DVector<f64>, h: f64) -> DVector<f64> {
        DVector::from_fn(spec.dim(), |i, _| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            (spec.eval(&xp) - spec.eval(&xm)) / (2.0 * h)
        })
    }

    /// Central-difference Hessian from the analytic gradient.
    fn fd_hessian(spec: &ObjectiveSpec, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
        let d = spec.dim();
        let mut out = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = (spec.grad(&xp) - spec.grad(&xm)) / (2.0 * h);
            for i in 0..d {
                out[(i, j)] = col[i];
            }
        }
        out
    }

    fn sample_point(stream: &CounterStream, base: u64, dim: usize, scale: f64) -> DVector<f64> {
        DVector::from_fn(dim, |i, _| {
            (stream.unit_f64_at(base * 64 + i as u64) * 2.0 - 1.0) * scale
        })
    }

    #[test]
    fn quadratic_rejects_asymmetric_matrix() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.2, 1.0]);
        match make_quadratic(h) {
            Err(Error::NotSymmetric { max_asymmetry }) => {
                assert!((max_asymmetry - 0.1).abs() < 1e-15)
            }
            other => panic!("expected NotSymmetric, got {other:?}"),
        }
    }

    #[test]
    fn quadratic_gradient_is_hx_exactly() {
        let h = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.1, 0.3, -1.0, 0.7, -0.1, 0.7, 0.5]);
        let spec = make_quadratic(h.clone()).unwrap();
        let stream = CounterStream::new(1);
        for trial in 0..100u64 {
            let x = sample_point(&stream, trial, 3, 5.0);
            let g = spec.grad(&x);
            for i in 0..3 {
                // Same accumulation order as the implementation: the
                // equality is exact, not approximate.
                let mut hx_i = 0.0;
                for k in 0..3 {
                    hx_i += h[(i, k)] * x[k];
                }
                assert_eq!(g[i], hx_i);
                assert_eq!(spec.partial(&x, i), g[i]);
            }
        }
    }

    #[test]
    fn quadratic_hessian_bound_is_spectral_norm() {
        let spec = make_quadratic(diag(&[1.0, -3.0, 2.0])).unwrap();
        assert!((spec.hessian_bound() - 3.0).abs() < 1e-12);
        // And the origin is registered as a strict saddle.
        assert_eq!(spec.known_critical_points()[0].kind, CriticalPointKind::StrictSaddle);
    }

    #[test]
    fn coupled_trig_rejects_bad_parameters() {
        assert!(make_coupled_trig(1, 0.1).is_err());
        assert!(make_coupled_trig(3, 0.5).is_err());
        assert!(make_coupled_trig(3, -0.7).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let specs = vec![
            make_quadratic(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0])).unwrap(),
            make_coupled_trig(2, 0.3).unwrap(),
            make_coupled_trig(5, -0.2).unwrap(),
            make_rosenbrock(3, true).unwrap(),
        ];
        let stream = CounterStream::new(17);
        for (si, spec) in specs.iter().enumerate() {
            for trial in 0..100u64 {
                let x = sample_point(&stream, si as u64 * 1000 + trial, spec.dim(), 2.0);
                let g = spec.grad(&x);
                let fd = fd_grad(spec, &x, 1e-6);
                let scale = g.norm().max(1.0);
                assert!(
                    (g - &fd).norm() / scale < 1e-6,
                    "gradient mismatch for {} at trial {trial}",
                    spec.id()
                );
            }
        }
    }

    #[test]
    fn hessians_match_finite_differences_and_are_symmetric() {
        let specs = vec![
            make_quadratic(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0])).unwrap(),
            make_coupled_trig(2, 0.3).unwrap(),
            make_coupled_trig(4, 0.45).unwrap(),
            make_rosenbrock(2, true).unwrap(),
        ];
        let stream = CounterStream::new(23);
        for (si, spec) in specs.iter().enumerate() {
            for trial in 0..100u64 {
                let x = sample_point(&stream, si as u64 * 1000 + trial, spec.dim(), 2.0);
                let h = spec.hessian(&x);
                assert!(
                    crate::linalg::max_asymmetry(&h) <= 1e-12 * h.amax().max(1.0),
                    "asymmetric Hessian for {}",
                    spec.id()
                );
                let fd = fd_hessian(spec, &x, 1e-5);
                let scale = h.amax().max(1.0);
                assert!(
                    (&h - &fd).amax() / scale < 1e-4,
                    "Hessian mismatch for {} at trial {trial}: {:.3e}",
                    spec.id(),
                    (&h - &fd).amax() / scale
                );
            }
        }
    }

    #[test]
    fn sampled_hessian_norms_respect_global_bound() {
        let specs = vec![
            make_quadratic(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0])).unwrap(),
            make_coupled_trig(2, 0.3).unwrap(),
            make_coupled_trig(6, 0.49).unwrap(),
        ];
        let stream = CounterStream::new(29);
        for (si, spec) in specs.iter().enumerate() {
            for trial in 0..100u64 {
                let x = sample_point(&stream, si as u64 * 1000 + trial, spec.dim(), 10.0);
                let norm = symmetric_spectral_norm(&spec.hessian(&x));
                assert!(
                    norm <= spec.hessian_bound() * (1.0 + 1e-9),
                    "{}: |H| = {norm} > M = {}",
                    spec.id(),
                    spec.hessian_bound()
                );
            }
        }
    }

    #[test]
    fn coupled_trig_saddle_at_zero_pi() {
        // d = 2, kappa = 0.3 at (0, pi): gradient vanishes, Hessian is
        // [[-1, -0.6], [-0.6, 1]] with eigenvalues -+sqrt(1.36).
        let spec = make_coupled_trig(2, 0.3).unwrap();
        let x = DVector::from_vec(vec![0.0, std::f64::consts::PI]);
        assert!(spec.grad_norm(&x) < 1e-12);
        let class = classify_critical_point(&spec, &x, 1e-8, 1e-8).unwrap();
        assert_eq!(class.kind, CriticalPointKind::StrictSaddle);
        assert!((class.min_eig + 1.36f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn classification_examples() {
        // Strict saddle: diag(1, -1) at the origin.
        let saddle = make_quadratic(diag(&[1.0, -1.0])).unwrap();
        let origin2 = DVector::zeros(2);
        let c = classify_critical_point(&saddle, &origin2, 1e-8, 1e-8).unwrap();
        assert_eq!(c.kind, CriticalPointKind::StrictSaddle);
        assert!((c.min_eig + 1.0).abs() < 1e-12);

        // Convex: diag(1, 2) at the origin.
        let convex = make_quadratic(diag(&[1.0, 2.0])).unwrap();
        let c = classify_critical_point(&convex, &origin2, 1e-8, 1e-8).unwrap();
        assert_eq!(c.kind, CriticalPointKind::LocalMinCandidate);

        // Degenerate direction: diag(1, 0).
        let degen = make_quadratic(diag(&[1.0, 0.0])).unwrap();
        let c = classify_critical_point(&degen, &origin2, 1e-8, 1e-8).unwrap();
        assert_eq!(c.kind, CriticalPointKind::Degenerate);

        // Non-critical point must be rejected.
        let x = DVector::from_vec(vec![0.5, 0.0]);
        assert!(matches!(
            classify_critical_point(&saddle, &x, 1e-8, 1e-8),
            Err(Error::NotCritical { .. })
        ));
    }

    #[test]
    fn trig_known_points_include_grid_saddles_and_minima() {
        let spec = make_coupled_trig(2, 0.3).unwrap();
        let known = spec.known_critical_points();
        assert_eq!(known.len(), 9); // {-pi, 0, pi}^2
        // All registered points really are critical.
        for p in known {
            assert!(spec.grad_norm(&p.x) < 1e-12, "non-critical grid point {:?}", p.x);
        }
        // (pi, pi) is a minimum candidate; (0, 0) has negative curvature.
        let pi = std::f64::consts::PI;
        let find = |target: &[f64]| {
            known
                .iter()
                .find(|p| p.x.iter().zip(target).all(|(a, b)| (a - b).abs() < 1e-12))
                .unwrap()
        };
        assert_eq!(find(&[pi, pi]).kind, CriticalPointKind::LocalMinCandidate);
        assert_eq!(find(&[0.0, 0.0]).kind, CriticalPointKind::StrictSaddle);
        assert_eq!(find(&[0.0, pi]).kind, CriticalPointKind::StrictSaddle);
    }

    #[test]
    fn rosenbrock_requires_violation_flag() {
        assert!(matches!(
            make_rosenbrock(2, false),
            Err(Error::AssumptionViolation(_))
        ));
        let spec = make_rosenbrock(2, true).unwrap();
        assert!(!spec.assumption_compliant());
        assert!(spec.hessian_bound().is_infinite());
        // The registered minimum really is critical.
        let one = DVector::from_element(2, 1.0);
        assert!(spec.grad_norm(&one) < 1e-12);
    }

    #[test]
    fn catalog_lookup_and_csv_parsing() {
        let h = parse_matrix_csv("1.0, 0.5\n0.5, -1.0\n").unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0]));
        let spec = from_catalog("quadratic", Some(h), None, None, false).unwrap();
        assert_eq!(spec.id(), "quadratic");
        let spec = from_catalog("coupled_trig", None, Some(3), Some(0.2), false).unwrap();
        assert_eq!(spec.id(), "coupled_trig");
        assert!(from_catalog("nope", None, None, None, false).is_err());
        assert!(parse_matrix_csv("1.0, 2.0\n3.0\n").is_err());
        assert!(parse_matrix_csv("").is_err());
    }
}
