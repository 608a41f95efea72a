//! Config file loading: JSON or TOML with `[objective]`, `[stepsize]`,
//! and `[experiment]` sections, plus the flag overrides applied on top.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use rcgd::objective::{from_catalog, parse_matrix_csv, ObjectiveSpec};
use rcgd::sample_path::StepsizeRange;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileConfig {
    pub objective: ObjectiveConfig,
    pub stepsize: StepsizeConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    /// One of `quadratic`, `coupled_trig`, `rosenbrock`.
    pub id: String,
    /// Row-major symmetric matrix for `quadratic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Alternative: CSV file with one matrix row per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Opt-in for objectives without a global curvature bound.
    #[serde(default)]
    pub allow_assumption_violation: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepsizeConfig {
    pub alpha_min: f64,
    pub alpha_max: f64,
}

fn default_seed() -> u64 {
    0
}
fn default_max_iter() -> u64 {
    100_000
}
fn default_grad_tol() -> f64 {
    1e-8
}
fn default_horizon() -> u64 {
    200_000
}
fn default_qr_period() -> u64 {
    10
}
fn default_t_start() -> u64 {
    0
}
fn default_proj_horizon() -> u64 {
    400
}
fn default_init_radius() -> f64 {
    1e-3
}
fn default_escape_radius() -> f64 {
    0.5
}
fn default_n_trials() -> u32 {
    100
}
fn default_t_max() -> u64 {
    50_000
}
fn default_match_radius() -> f64 {
    1e-4
}
fn default_n_windows() -> u64 {
    10_000
}
fn default_k_max() -> u64 {
    100
}
fn default_s_values() -> Vec<u64> {
    vec![100, 200, 400]
}
fn default_n_seeds() -> u32 {
    8
}
fn default_fail_tol() -> f64 {
    1e-10
}
fn default_eps_fraction() -> f64 {
    0.5
}
fn default_sigma_radius() -> f64 {
    0.1
}
fn default_sigma_samples() -> u32 {
    10_000
}

/// Experiment knobs. Subcommands read the fields they need and ignore
/// the rest, so one config file can drive several commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Start point for `optimize` / `verify-growth`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Critical point for the linearized commands; defaults to the
    /// first catalogued strict saddle, then to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    #[serde(default = "default_max_iter")]
    pub max_iter: u64,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    /// Steps for Lyapunov spectrum estimates.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_qr_period")]
    pub qr_period: u64,
    /// Unstable dimension for `projector`; estimated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_plus: Option<usize>,
    #[serde(default = "default_t_start")]
    pub t_start: u64,
    /// Horizon for a single projector estimate.
    #[serde(default = "default_proj_horizon")]
    pub proj_horizon: u64,
    #[serde(default = "default_init_radius")]
    pub init_radius: f64,
    #[serde(default = "default_escape_radius")]
    pub escape_radius: f64,
    #[serde(default = "default_n_trials")]
    pub n_trials: u32,
    #[serde(default = "default_t_max")]
    pub t_max: u64,
    /// Classification init box; defaults to [-3, 3]^d.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_hi: Option<Vec<f64>>,
    #[serde(default = "default_match_radius")]
    pub match_radius: f64,
    /// Window length for decay/coverage checks; defaults to dim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default = "default_n_windows")]
    pub n_windows: u64,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    #[serde(default = "default_s_values")]
    pub s_values: Vec<u64>,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: u32,
    #[serde(default = "default_fail_tol")]
    pub fail_tol: f64,
    #[serde(default = "default_eps_fraction")]
    pub eps_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_window: Option<usize>,
    #[serde(default = "default_sigma_radius")]
    pub sigma_radius: f64,
    #[serde(default = "default_sigma_samples")]
    pub sigma_samples: u32,
    /// Optional CSV trajectory export for `optimize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_csv: Option<PathBuf>,
    /// Optional packed binary trajectory export for `optimize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_binary: Option<PathBuf>,
    /// Optional survival-curve CSV for `escape-mc`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival_csv: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        // serde's field defaults are the single source of truth.
        serde_json::from_str("{}").expect("empty experiment config deserializes")
    }
}

impl FileConfig {
    /// Reads JSON (leading `{`) or TOML, decided by content sniffing so
    /// extensions stay advisory.
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let trimmed = text.trim_start();
        let config: FileConfig = if trimmed.starts_with('{') {
            serde_json::from_str(&text)
                .with_context(|| format!("parsing JSON config {}", path.display()))?
        } else {
            toml::from_str(&text)
                .with_context(|| format!("parsing TOML config {}", path.display()))?
        };
        Ok(config)
    }

    /// Builds the objective described by the `[objective]` section.
    pub fn objective(&self, config_dir: &Path) -> Result<ObjectiveSpec> {
        let o = &self.objective;
        let matrix = match (&o.matrix, &o.matrix_csv) {
            (Some(rows), _) => Some(matrix_from_rows(rows)?),
            (None, Some(csv)) => {
                let path = if csv.is_absolute() { csv.clone() } else { config_dir.join(csv) };
                let text = fs::read_to_string(&path)
                    .with_context(|| format!("reading matrix csv {}", path.display()))?;
                Some(parse_matrix_csv(&text)?)
            }
            (None, None) => None,
        };
        Ok(from_catalog(&o.id, matrix, o.dim, o.kappa, o.allow_assumption_violation)?)
    }

    pub fn stepsize_range(&self) -> Result<StepsizeRange> {
        Ok(StepsizeRange::new(self.stepsize.alpha_min, self.stepsize.alpha_max)?)
    }
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        bail!("objective.matrix must be square and non-empty");
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// The critical point the linearized commands work at: explicit config
/// value, else the first catalogued strict saddle, else the origin.
pub fn resolve_x_star(spec: &ObjectiveSpec, explicit: &Option<Vec<f64>>) -> Result<DVector<f64>> {
    if let Some(x) = explicit {
        if x.len() != spec.dim() {
            bail!("x_star has length {} but objective dim is {}", x.len(), spec.dim());
        }
        return Ok(DVector::from_row_slice(x));
    }
    if let Some(saddle) = spec
        .known_critical_points()
        .iter()
        .find(|k| k.kind == rcgd::objective::CriticalPointKind::StrictSaddle)
    {
        return Ok(saddle.x.clone());
    }
    Ok(DVector::zeros(spec.dim()))
}

pub fn resolve_vector(explicit: &Option<Vec<f64>>, dim: usize, name: &str) -> Result<Option<DVector<f64>>> {
    match explicit {
        Some(x) if x.len() == dim => Ok(Some(DVector::from_row_slice(x))),
        Some(x) => bail!("{name} has length {} but objective dim is {}", x.len(), dim),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_configs_agree() {
        let toml_text = r#"
            [objective]
            id = "quadratic"
            matrix = [[1.0, 0.5], [0.5, -1.0]]

            [stepsize]
            alpha_min = 0.1
            alpha_max = 0.5

            [experiment]
            seed = 42
            n_trials = 7
        "#;
        let json_text = r#"{
            "objective": {"id": "quadratic", "matrix": [[1.0, 0.5], [0.5, -1.0]]},
            "stepsize": {"alpha_min": 0.1, "alpha_max": 0.5},
            "experiment": {"seed": 42, "n_trials": 7}
        }"#;
        let a: FileConfig = toml::from_str(toml_text).unwrap();
        let b: FileConfig = serde_json::from_str(json_text).unwrap();
        assert_eq!(serde_json::to_value(&a).unwrap(), serde_json::to_value(&b).unwrap());
        assert_eq!(a.experiment.seed, 42);
        assert_eq!(a.experiment.n_trials, 7);
        // Untouched fields take their documented defaults.
        assert_eq!(a.experiment.max_iter, 100_000);
        assert_eq!(a.experiment.s_values, vec![100, 200, 400]);
    }

    #[test]
    fn objective_section_builds_specs() {
        let config: FileConfig = toml::from_str(
            r#"
            [objective]
            id = "coupled_trig"
            dim = 3
            kappa = 0.2

            [stepsize]
            alpha_min = 0.05
            alpha_max = 0.3
        "#,
        )
        .unwrap();
        let spec = config.objective(Path::new(".")).unwrap();
        assert_eq!(spec.dim(), 3);
        assert!(config.stepsize_range().is_ok());
    }

    #[test]
    fn x_star_defaults_to_a_catalogued_saddle() {
        let spec = rcgd::objective::make_coupled_trig(2, 0.3).unwrap();
        let x = resolve_x_star(&spec, &None).unwrap();
        let class = rcgd::objective::classify_critical_point(&spec, &x, 1e-8, 1e-8).unwrap();
        assert_eq!(class.kind, rcgd::objective::CriticalPointKind::StrictSaddle);
        let explicit = resolve_x_star(&spec, &Some(vec![0.0, 0.0])).unwrap();
        assert_eq!(explicit, DVector::zeros(2));
        assert!(resolve_x_star(&spec, &Some(vec![1.0])).is_err());
    }
}
