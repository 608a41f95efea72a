//! Command-line driver for coordinate-descent experiments.
//!
//! Every subcommand reads one config file (JSON or TOML), applies the
//! flag overrides, runs a library entry point, and writes a result
//! JSON of the shape `{command, config, timestamp_unix_ms, result}`.
//! With a fixed config and seed the result is byte-identical across
//! runs except for the timestamp field.
//!
//! Exit codes: 0 success; 2 violated model assumption (invalid
//! stepsize range for the curvature bound, non-saddle input, failed or
//! infeasible certificate); 3 numerical failure (singular step matrix,
//! overflow); 64 usage errors (unknown subcommand, bad flags, bad
//! parameter values); 1 anything else.

mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::json;

use rcgd::certificate::{build_certificate, check_assumption3, CertifyConfig};
use rcgd::cocycle::Cocycle;
use rcgd::descent::{
    run, write_trajectory_binary, write_trajectory_csv, RecordOptions, RunConfig, StopRule,
};
use rcgd::harness::{
    classify_convergence, escape_mc, verify_growth, verify_linear_decay, EscapeConfig,
};
use rcgd::sample_path::{derive_seed, SamplePath};

use config::{resolve_vector, resolve_x_star, FileConfig};

#[derive(Parser)]
#[command(
    name = "rcgd",
    version,
    about = "Randomized coordinate descent as a random dynamical system: \
             spectra, saddle certificates, and Monte Carlo verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Config file (JSON or TOML) with [objective], [stepsize], [experiment].
    #[arg(long, short = 'c')]
    config: PathBuf,
    /// Override experiment.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override stepsize.alpha_min.
    #[arg(long)]
    alpha_min: Option<f64>,
    /// Override stepsize.alpha_max.
    #[arg(long)]
    alpha_max: Option<f64>,
    /// Result file (default: $RCGD_OUT_DIR/rcgd-<command>.json).
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run coordinate descent on the configured objective.
    Optimize(CommonArgs),
    /// Estimate the Lyapunov spectrum of the linearization at x_star.
    Lyapunov(CommonArgs),
    /// Estimate the finite-horizon unstable projector at x_star.
    Projector(CommonArgs),
    /// Build a quantitative saddle-escape certificate at x_star.
    Certify(CommonArgs),
    /// Check the projector-alignment assumption across seeds and horizons.
    #[command(name = "check-a3")]
    CheckA3(CommonArgs),
    /// Monte Carlo escape trials around a strict saddle.
    #[command(name = "escape-mc")]
    EscapeMc(CommonArgs),
    /// Classify where descent trials from random starts converge.
    Classify(CommonArgs),
    /// Check the per-window decay inequality on sampled covering windows.
    #[command(name = "verify-decay")]
    VerifyDecay(CommonArgs),
    /// Check the compounded norm growth bound along one trajectory.
    #[command(name = "verify-growth")]
    VerifyGrowth(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Optimize(_) => "optimize",
            Command::Lyapunov(_) => "lyapunov",
            Command::Projector(_) => "projector",
            Command::Certify(_) => "certify",
            Command::CheckA3(_) => "check-a3",
            Command::EscapeMc(_) => "escape-mc",
            Command::Classify(_) => "classify",
            Command::VerifyDecay(_) => "verify-decay",
            Command::VerifyGrowth(_) => "verify-growth",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Optimize(a)
            | Command::Lyapunov(a)
            | Command::Projector(a)
            | Command::Certify(a)
            | Command::CheckA3(a)
            | Command::EscapeMc(a)
            | Command::Classify(a)
            | Command::VerifyDecay(a)
            | Command::VerifyGrowth(a) => a,
        }
    }
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    use rcgd::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::NumericalError(_)) | Some(E::SingularStep { .. }) => 3,
        Some(E::InvalidParameter(_)) => 64,
        Some(_) => 2,
        None => {
            // A config file that fails to parse is a usage error; IO
            // failures stay in the generic class.
            if err.downcast_ref::<toml::de::Error>().is_some()
                || err.downcast_ref::<serde_json::Error>().is_some()
            {
                64
            } else {
                1
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let args = cli.command.args();
    let mut config = FileConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.experiment.seed = seed;
    }
    if let Some(a) = args.alpha_min {
        config.stepsize.alpha_min = a;
    }
    if let Some(a) = args.alpha_max {
        config.stepsize.alpha_max = a;
    }
    let config_dir = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let result = run_command(&cli.command, &config, &config_dir)?;

    let timestamp_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let report = json!({
        "command": cli.command.name(),
        "config": config,
        "timestamp_unix_ms": timestamp_unix_ms,
        "result": result,
    });
    let text = serde_json::to_string_pretty(&report)?;
    let path = output_path(cli.command.name(), &args.out);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating output directory {}", parent.display()))?;
        }
    }
    fs::write(&path, format!("{text}\n"))
        .with_context(|| format!("writing result {}", path.display()))?;
    println!("{text}");
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn output_path(command: &str, explicit: &Option<PathBuf>) -> PathBuf {
    if let Some(path) = explicit {
        return path.clone();
    }
    let dir = std::env::var_os("RCGD_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("rcgd-{command}.json"))
}

fn run_command(
    command: &Command,
    config: &FileConfig,
    config_dir: &Path,
) -> Result<serde_json::Value> {
    let spec = config.objective(config_dir)?;
    let range = config.stepsize_range()?;
    let exp = &config.experiment;
    let d = spec.dim();

    match command {
        Command::Optimize(_) => {
            let x0 = resolve_vector(&exp.x0, d, "x0")?
                .ok_or_else(|| anyhow!("optimize needs experiment.x0"))?;
            let path = SamplePath::new(exp.seed, d, range)?;
            let need_points = exp.record_csv.is_some() || exp.record_binary.is_some();
            let record = if need_points {
                RecordOptions { points: true, f_values: true, grad_norms: true, steps: false }
            } else {
                RecordOptions::summary()
            };
            let mut run_config =
                RunConfig::new(StopRule::until_grad_tol(exp.max_iter, exp.grad_tol))
                    .recording(record);
            if config.objective.allow_assumption_violation {
                run_config = run_config.allowing_assumption_violation();
            }
            let traj = run(&spec, &x0, &path, range, &run_config)?;
            if let Some(csv) = &exp.record_csv {
                let file = fs::File::create(csv)
                    .with_context(|| format!("creating {}", csv.display()))?;
                write_trajectory_csv(&traj, file)?;
            }
            if let Some(bin) = &exp.record_binary {
                let file = fs::File::create(bin)
                    .with_context(|| format!("creating {}", bin.display()))?;
                write_trajectory_binary(&traj, file)?;
            }
            Ok(json!({
                "final_x": traj.final_x.as_slice(),
                "final_f": traj.final_f,
                "final_grad_norm": traj.final_grad_norm,
                "steps_taken": traj.steps_taken,
                "terminated_by": traj.terminated_by,
            }))
        }
        Command::Lyapunov(_) => {
            let x_star = resolve_x_star(&spec, &exp.x_star)?;
            let h = spec.hessian(&x_star);
            let cocycle = Cocycle::new(h, SamplePath::new(exp.seed, d, range)?)?;
            let spectrum = cocycle.lyapunov_spectrum(exp.horizon, exp.qr_period)?;
            Ok(serde_json::to_value(spectrum)?)
        }
        Command::Projector(_) => {
            let x_star = resolve_x_star(&spec, &exp.x_star)?;
            let h = spec.hessian(&x_star);
            let cocycle = Cocycle::new(h, SamplePath::new(exp.seed, d, range)?)?;
            let d_plus = match exp.d_plus {
                Some(k) => k,
                None => cocycle.lyapunov_spectrum(exp.horizon, exp.qr_period)?.d_plus,
            };
            let projector = cocycle.unstable_projector(exp.t_start, exp.proj_horizon, d_plus)?;
            let alignments = projector.axis_alignments();
            let mut value = serde_json::to_value(projector)?;
            value["axis_alignments"] = serde_json::to_value(alignments)?;
            Ok(value)
        }
        Command::Certify(_) => {
            let x_star = resolve_x_star(&spec, &exp.x_star)?;
            let certify = CertifyConfig {
                spectrum_horizon: exp.horizon,
                qr_period: exp.qr_period,
                eps_fraction: exp.eps_fraction,
                mu: exp.mu,
                m_window: exp.m_window,
                a3_seeds: exp.n_seeds,
                a3_s_values: exp.s_values.clone(),
                sigma_radius: exp.sigma_radius,
                sigma_samples: exp.sigma_samples,
                fail_tol: exp.fail_tol,
            };
            let cert = build_certificate(&spec, &x_star, range, exp.seed, &certify)?;
            Ok(serde_json::to_value(cert)?)
        }
        Command::CheckA3(_) => {
            let x_star = resolve_x_star(&spec, &exp.x_star)?;
            let h = spec.hessian(&x_star);
            let seeds: Vec<u64> =
                (0..exp.n_seeds as u64).map(|k| derive_seed(exp.seed, 1000 + k)).collect();
            let report =
                check_assumption3(&h, range, &seeds, &exp.s_values, exp.fail_tol, exp.horizon)?;
            Ok(serde_json::to_value(report)?)
        }
        Command::EscapeMc(_) => {
            let x_star = resolve_x_star(&spec, &exp.x_star)?;
            let escape = EscapeConfig {
                init_radius: exp.init_radius,
                escape_radius: exp.escape_radius,
                n_trials: exp.n_trials,
                t_max: exp.t_max,
            };
            let report = escape_mc(&spec, &x_star, range, &escape, exp.seed)?;
            if let Some(csv) = &exp.survival_csv {
                let times: Vec<u64> = (0..=200).map(|i| i * exp.t_max / 200).collect();
                let curve = report.survival_curve(&times);
                let mut file = fs::File::create(csv)
                    .with_context(|| format!("creating {}", csv.display()))?;
                writeln!(file, "t,fraction_inside")?;
                for (t, f) in times.iter().zip(&curve) {
                    writeln!(file, "{t},{f:.6}")?;
                }
            }
            Ok(serde_json::to_value(report)?)
        }
        Command::Classify(_) => {
            let lo = resolve_vector(&exp.init_lo, d, "init_lo")?
                .unwrap_or_else(|| DVector::from_element(d, -3.0));
            let hi = resolve_vector(&exp.init_hi, d, "init_hi")?
                .unwrap_or_else(|| DVector::from_element(d, 3.0));
            let report = classify_convergence(
                &spec,
                &lo,
                &hi,
                exp.n_trials,
                exp.t_max,
                exp.grad_tol,
                exp.match_radius,
                range,
                exp.seed,
            )?;
            Ok(serde_json::to_value(report)?)
        }
        Command::VerifyDecay(_) => {
            let x_star = resolve_x_star(&spec, &exp.x_star)?;
            let h = spec.hessian(&x_star);
            let m = exp.m.unwrap_or(d);
            let report = verify_linear_decay(&h, range, m, exp.n_windows, exp.seed)?;
            Ok(serde_json::to_value(report)?)
        }
        Command::VerifyGrowth(_) => {
            let x_star = resolve_x_star(&spec, &exp.x_star)?;
            let h = spec.hessian(&x_star);
            let x0 = match resolve_vector(&exp.x0, d, "x0")? {
                Some(x) => x,
                // Default start: unit eigenvector of the most negative
                // eigenvalue, the canonical negative-cone point.
                None => {
                    let eig = h.clone().symmetric_eigen();
                    let (jmin, min_eig) = eig
                        .eigenvalues
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                        .map(|(j, &e)| (j, e))
                        .expect("nonempty spectrum");
                    if min_eig >= 0.0 {
                        bail!("growth check needs a Hessian with a negative eigenvalue");
                    }
                    eig.eigenvectors.column(jmin).into_owned()
                }
            };
            let m = exp.m.unwrap_or(d);
            let report = verify_growth(&h, range, &x0, exp.k_max, m, exp.seed)?;
            Ok(serde_json::to_value(report)?)
        }
    }
}
