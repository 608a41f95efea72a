//! Cross-module integration: spectra with multiplicities, the full
//! certificate pipeline on a curved objective, and the measure-theoretic
//! step behind the projection lower bound.

use nalgebra::{DMatrix, DVector};

use rcgd::certificate::{build_certificate, check_assumption3, CertifyConfig};
use rcgd::cocycle::Cocycle;
use rcgd::linalg::row_dot;
use rcgd::objective::{make_coupled_trig, CriticalPointKind};
use rcgd::sample_path::{CounterStream, SamplePath, StepsizeRange};

fn range(lo: f64, hi: f64) -> StepsizeRange {
    StepsizeRange::new(lo, hi).unwrap()
}

#[test]
fn repeated_diagonal_rates_merge_into_one_exponent() {
    // diag(-1, -1, 1): coordinates 0 and 1 share the expanding rate
    // E log(1 + alpha) / 3 and coordinate 2 contracts at
    // E log(1 - alpha) / 3; the spectrum must report two clusters with
    // multiplicities (2, 1) and map directions accordingly.
    let h = DMatrix::from_diagonal(&DVector::from_row_slice(&[-1.0, -1.0, 1.0]));
    let path = SamplePath::new(33, 3, range(0.1, 0.5)).unwrap();
    let spectrum = Cocycle::new(h, path)
        .unwrap()
        .lyapunov_spectrum(100_000, 10)
        .unwrap();

    assert_eq!(spectrum.exponents.len(), 2, "{spectrum:?}");
    assert_eq!(spectrum.multiplicities, vec![2, 1]);
    assert_eq!(spectrum.d_plus, 2);
    assert_eq!(spectrum.index_map, vec![0, 0, 1]);

    // Closed-form per-coordinate rates (one third of the scalar value,
    // the selection probability).
    let expanding = 0.258391160943723 / 3.0;
    let contracting = -0.3706271845301775 / 3.0;
    let tol0 = (3.0 * spectrum.standard_errors[0]).max(1e-3);
    let tol1 = (3.0 * spectrum.standard_errors[1]).max(1e-3);
    assert!(
        (spectrum.exponents[0] - expanding).abs() < tol0,
        "top exponent {} vs {}",
        spectrum.exponents[0],
        expanding
    );
    assert!(
        (spectrum.exponents[1] - contracting).abs() < tol1,
        "bottom exponent {} vs {}",
        spectrum.exponents[1],
        contracting
    );
    assert!(spectrum.gap.unwrap() > 0.15);
}

#[test]
fn certificate_pipeline_runs_on_the_trig_saddle() {
    // Full nonlinear flow: take the catalogued saddle of the coupled
    // trig objective, certify its linearization, and re-check every
    // stored inequality.
    let spec = make_coupled_trig(2, 0.3).unwrap();
    let saddle = spec
        .known_critical_points()
        .iter()
        .find(|k| k.kind == CriticalPointKind::StrictSaddle)
        .expect("grid catalog contains a saddle")
        .x
        .clone();
    // M = 1 + 4 kappa = 2.2, so alpha_max = 0.4 keeps M alpha_max < 1.
    let r = range(0.05, 0.4);
    let config = CertifyConfig {
        spectrum_horizon: 100_000,
        a3_seeds: 6,
        sigma_samples: 4_000,
        ..CertifyConfig::default()
    };
    let cert = build_certificate(&spec, &saddle, r, 2025, &config).unwrap();

    assert_eq!(cert.d_plus, 1);
    assert!(cert.lambda_plus > 0.0);
    assert!(cert.eps > 0.0 && cert.eps < cert.eps_star);
    assert!(cert.delta_proj > 1e-4);
    assert!(cert.sigma_radius > 1e-6);
    assert!(cert.block_s >= 1);
    assert_eq!(cert.t_block, cert.stopping_l as u64 + cert.block_s);
    assert!(cert.checks.iter().all(|c| c.holds), "{:#?}", cert.checks);

    // The emitted JSON round-trips with every constant intact.
    let json = serde_json::to_string_pretty(&cert).unwrap();
    let back: rcgd::certificate::SaddleCertificate = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cert);
    assert_eq!(back.validate(), cert.checks);
}

#[test]
fn bad_stepsizes_for_the_projection_bound_have_small_measure() {
    // One step before an expansion block, the iterate is
    // x(alpha) = v - alpha g e_i. Because |P e_i| >= delta, the set of
    // stepsizes where |P x(alpha)| < r, with
    // r = eps delta (a_max - a_min) |g| / 4, is an interval of measure
    // at most 2r / (delta |g|) = eps (a_max - a_min) / 2: a fraction
    // at most eps of the stepsize range (with grid discretization
    // slack).
    let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0]);
    let r = range(0.1, 0.5);
    let seeds: Vec<u64> = (1..=8).collect();
    let report = check_assumption3(&h, r, &seeds, &[100, 200, 400], 1e-10, 100_000).unwrap();
    let delta = report.delta_proj.expect("coupled saddle satisfies the alignment check");

    // Use a (seed, horizon) pair the check actually visited, so the
    // alignment floor is guaranteed for this projector.
    let path = SamplePath::new(seeds[2], 2, r).unwrap();
    let proj = Cocycle::new(h.clone(), path)
        .unwrap()
        .unstable_projector(0, 200, report.d_plus)
        .unwrap();

    let eps = 0.05;
    let n_grid = 20_000u64;
    let stream = CounterStream::new(909);
    let mut checked = 0;
    for case in 0..50u64 {
        let v = DVector::from_fn(2, |i, _| 2.0 * stream.gaussian_at(case * 3 + i as u64));
        let i = stream.below_at(case * 3 + 2, 2) as usize;
        let g = row_dot(&h, i, &v);
        if g.abs() < 1e-6 {
            continue;
        }
        checked += 1;
        let radius = eps * delta * r.width() * g.abs() / 4.0;
        let mut bad = 0u64;
        for k in 0..n_grid {
            let alpha = r.alpha_min() + r.width() * (k as f64 + 0.5) / n_grid as f64;
            let mut x = v.clone();
            x[i] -= alpha * g;
            if (&proj.p_plus * &x).norm() < radius {
                bad += 1;
            }
        }
        let fraction = bad as f64 / n_grid as f64;
        assert!(
            fraction <= eps + 3.0 / n_grid as f64,
            "case {case}: bad fraction {fraction} exceeds eps = {eps}"
        );
    }
    assert!(checked >= 40, "only {checked} usable cases");
}
