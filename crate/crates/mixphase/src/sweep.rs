//! Configuration-driven experiment sweeps: temperature and duration grids
//! over the model closed forms with optional numeric cross-checks, plus the
//! incompatibility-witness demonstration, emitted as CSV or JSON.
//!
//! Outputs are byte-reproducible: grids are pure functions of the config,
//! witness trials draw from a seeded stream, floats print as shortest
//! round-trip decimals, and files are written atomically (temp + rename).
//!
//! Temperature conventions: `temperature` is k_BT in units of the model's
//! energy scale (M, J₁, or ħω), so the thermal weight argument is 1/T. The
//! literals `0` and `inf` route to the closed-form limits and leave the
//! numeric column empty, as does the τ = 0 endpoint where there is nothing
//! to integrate.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::incompatibility_witness;
use crate::error::Error;
use crate::linalg::{fnorm, C64, CMat, PhaseValue};
use crate::models::{
    continuum_theta_d, kitaev_theta_d, oscillator_auto_n_max, oscillator_theta_d,
    oscillator_theta_d_numeric, ssh_theta_d, two_band_theta_d_numeric, OscillatorSpec,
    TwoBandSpec,
};
use crate::state::DensityMatrix;

/// Sweep failure, carrying the process exit code the CLI maps it to.
#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numeric failure at {variable} = {value}: {message}")]
    Numeric {
        variable: String,
        value: f64,
        message: String,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl SweepError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config(_) => 2,
            SweepError::Numeric { .. } => 3,
            SweepError::Io(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
pub enum ExperimentKind {
    #[serde(rename = "fig1_kitaev")]
    Fig1Kitaev,
    #[serde(rename = "fig1_ssh")]
    Fig1Ssh,
    #[serde(rename = "fig2_kitaev")]
    Fig2Kitaev,
    #[serde(rename = "fig2_ssh")]
    Fig2Ssh,
    #[serde(rename = "fig3_oscillator_T")]
    Fig3OscillatorT,
    #[serde(rename = "fig3_oscillator_tau")]
    Fig3OscillatorTau,
    #[serde(rename = "continuum")]
    Continuum,
    #[serde(rename = "crossval")]
    Crossval,
    #[serde(rename = "witness")]
    Witness,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Fig1Kitaev => "fig1_kitaev",
            ExperimentKind::Fig1Ssh => "fig1_ssh",
            ExperimentKind::Fig2Kitaev => "fig2_kitaev",
            ExperimentKind::Fig2Ssh => "fig2_ssh",
            ExperimentKind::Fig3OscillatorT => "fig3_oscillator_T",
            ExperimentKind::Fig3OscillatorTau => "fig3_oscillator_tau",
            ExperimentKind::Continuum => "continuum",
            ExperimentKind::Crossval => "crossval",
            ExperimentKind::Witness => "witness",
        }
    }

    pub fn all() -> &'static [ExperimentKind] {
        &[
            ExperimentKind::Fig1Kitaev,
            ExperimentKind::Fig1Ssh,
            ExperimentKind::Fig2Kitaev,
            ExperimentKind::Fig2Ssh,
            ExperimentKind::Fig3OscillatorT,
            ExperimentKind::Fig3OscillatorTau,
            ExperimentKind::Continuum,
            ExperimentKind::Crossval,
            ExperimentKind::Witness,
        ]
    }

    /// The one grid variable this experiment sweeps, if it has a grid.
    pub fn grid_variable(&self) -> Option<&'static str> {
        match self {
            ExperimentKind::Fig1Kitaev
            | ExperimentKind::Fig1Ssh
            | ExperimentKind::Fig3OscillatorT => Some("temperature"),
            ExperimentKind::Fig2Kitaev
            | ExperimentKind::Fig2Ssh
            | ExperimentKind::Crossval => Some("tau_group"),
            ExperimentKind::Fig3OscillatorTau => Some("omega_tau"),
            ExperimentKind::Continuum => Some("tau_over_beta_h"),
            ExperimentKind::Witness => None,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        ExperimentKind::all()
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                SweepError::Config(format!(
                    "unknown experiment {s:?}; expected one of: {}",
                    ExperimentKind::all()
                        .iter()
                        .map(|k| k.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// Crossval only: which two-band model the sweep drives.
    pub kind: Option<String>,
    pub m: f64,
    pub c: f64,
    pub big_m: f64,
    pub j1: f64,
    pub j2_over_j1: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: None,
            m: 0.6,
            c: 1.0,
            big_m: 1.0,
            j1: 1.0,
            j2_over_j1: 1.2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: GridScale,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedSection {
    pub tau_group: Option<f64>,
    pub temperature: Option<f64>,
    pub omega_tau: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericSection {
    pub enable: bool,
    pub n_samples: usize,
}

impl Default for NumericSection {
    fn default() -> Self {
        NumericSection {
            enable: false,
            n_samples: 4096,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessSection {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for WitnessSection {
    fn default() -> Self {
        WitnessSection {
            dims: vec![2, 4, 8],
            trials: 100,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: String,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub fixed: FixedSection,
    #[serde(default)]
    pub numeric: NumericSection,
    #[serde(default)]
    pub witness: WitnessSection,
    pub output: OutputSection,
}

/// Ready-to-run config for each experiment, mirroring the reference figure
/// parameters: wire m = 0.6, c = 1.0 at Mτ = 1; chain J₂/J₁ = 1.2 at
/// J₁τ = 1; oscillator at ωτ = 1. Temperature grids are logarithmic so the
/// low-T approach to the zero-temperature value is resolved.
pub fn default_config(kind: ExperimentKind) -> SweepConfig {
    let grid = |variable: &str, start: f64, stop: f64, points: usize, scale: GridScale| {
        Some(GridSection {
            variable: variable.to_string(),
            start,
            stop,
            points,
            scale,
        })
    };
    let output = OutputSection {
        path: format!("{}.csv", kind.name()),
        format: OutputFormat::Csv,
    };
    let mut config = SweepConfig {
        experiment: ExperimentSection { kind },
        model: ModelSection::default(),
        grid: None,
        fixed: FixedSection::default(),
        numeric: NumericSection::default(),
        witness: WitnessSection::default(),
        output,
    };
    match kind {
        ExperimentKind::Fig1Kitaev | ExperimentKind::Fig1Ssh => {
            config.grid = grid("temperature", 0.01, 50.0, 200, GridScale::Log);
            config.fixed.tau_group = Some(1.0);
        }
        ExperimentKind::Fig2Kitaev => {
            config.grid = grid("tau_group", 0.0, 6.3, 201, GridScale::Linear);
            config.fixed.temperature = Some(5.0);
        }
        ExperimentKind::Fig2Ssh => {
            config.grid = grid("tau_group", 0.0, 6.3, 201, GridScale::Linear);
            config.fixed.temperature = Some(20.0);
        }
        ExperimentKind::Fig3OscillatorT => {
            config.grid = grid("temperature", 0.01, 50.0, 200, GridScale::Log);
            config.fixed.omega_tau = Some(1.0);
        }
        ExperimentKind::Fig3OscillatorTau => {
            config.grid = grid(
                "omega_tau",
                0.0,
                2.0 * std::f64::consts::TAU,
                201,
                GridScale::Linear,
            );
            config.fixed.temperature = Some(f64::INFINITY);
        }
        ExperimentKind::Continuum => {
            config.grid = grid("tau_over_beta_h", 0.01, 100.0, 200, GridScale::Log);
        }
        ExperimentKind::Crossval => {
            config.grid = grid("tau_group", 0.1, 6.0, 50, GridScale::Linear);
            config.fixed.temperature = Some(0.2);
            config.model.kind = Some("kitaev".to_string());
            config.numeric.enable = true;
        }
        ExperimentKind::Witness => {}
    }
    config
}

/// Parse a TOML-syntax config file. Unknown keys are rejected so typos
/// surface as config errors rather than silently ignored settings.
pub fn load_config(path: &Path) -> Result<SweepConfig, SweepError> {
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| SweepError::Config(format!("{}: {e}", path.display())))
}

fn config_err(msg: impl Into<String>) -> SweepError {
    SweepError::Config(msg.into())
}

impl SweepConfig {
    fn kind(&self) -> ExperimentKind {
        self.experiment.kind
    }

    fn require_fixed(&self, name: &str) -> Result<f64, SweepError> {
        let value = match name {
            "tau_group" => self.fixed.tau_group,
            "temperature" => self.fixed.temperature,
            "omega_tau" => self.fixed.omega_tau,
            _ => None,
        };
        value.ok_or_else(|| {
            config_err(format!("{} requires fixed.{name}", self.kind().name()))
        })
    }

    fn crossval_model(&self) -> Result<&str, SweepError> {
        match self.model.kind.as_deref() {
            None | Some("kitaev") => Ok("kitaev"),
            Some("ssh") => Ok("ssh"),
            Some(other) => Err(config_err(format!(
                "model.kind must be \"kitaev\" or \"ssh\", got {other:?}"
            ))),
        }
    }

    /// Check everything that can fail before any grid point is evaluated.
    pub fn validate(&self) -> Result<(), SweepError> {
        let kind = self.kind();
        if let Some(variable) = kind.grid_variable() {
            let grid = self
                .grid
                .as_ref()
                .ok_or_else(|| config_err(format!("{} requires a [grid] section", kind.name())))?;
            if grid.variable != variable {
                return Err(config_err(format!(
                    "{} sweeps {variable}, not {:?}",
                    kind.name(),
                    grid.variable
                )));
            }
            if grid.points < 2 {
                return Err(config_err("grid.points must be at least 2"));
            }
            if !(grid.start.is_finite() && grid.stop.is_finite() && grid.start < grid.stop) {
                return Err(config_err("grid.start must be finite and below grid.stop"));
            }
            if grid.scale == GridScale::Log && grid.start <= 0.0 {
                return Err(config_err("log grids need grid.start > 0"));
            }
        }
        match kind {
            ExperimentKind::Fig1Kitaev => {
                self.require_fixed("tau_group")?;
                self.kitaev_spec()?;
            }
            ExperimentKind::Fig1Ssh => {
                self.require_fixed("tau_group")?;
                self.ssh_spec()?;
            }
            ExperimentKind::Fig2Kitaev => {
                self.require_temperature_value()?;
                self.kitaev_spec()?;
            }
            ExperimentKind::Fig2Ssh => {
                self.require_temperature_value()?;
                self.ssh_spec()?;
            }
            ExperimentKind::Fig3OscillatorT => {
                let omega_tau = self.require_fixed("omega_tau")?;
                OscillatorSpec::new(omega_tau, 1.0, 1).map_err(|e| config_err(e.to_string()))?;
            }
            ExperimentKind::Fig3OscillatorTau => {
                self.require_temperature_value()?;
            }
            ExperimentKind::Continuum => {}
            ExperimentKind::Crossval => {
                self.require_temperature_value()?;
                match self.crossval_model()? {
                    "kitaev" => drop(self.kitaev_spec()?),
                    _ => drop(self.ssh_spec()?),
                }
            }
            ExperimentKind::Witness => {
                if self.witness.dims.is_empty() {
                    return Err(config_err("witness.dims must not be empty"));
                }
                if let Some(&d) = self.witness.dims.iter().find(|&&d| d < 2) {
                    return Err(config_err(format!("witness dims must be >= 2, got {d}")));
                }
                if self.witness.trials < 1 {
                    return Err(config_err("witness.trials must be at least 1"));
                }
            }
        }
        if self.numeric.n_samples < 2 {
            return Err(config_err("numeric.n_samples must be at least 2"));
        }
        Ok(())
    }

    fn require_temperature_value(&self) -> Result<f64, SweepError> {
        let t = self.require_fixed("temperature")?;
        if t.is_nan() || t < 0.0 {
            return Err(config_err(format!("fixed.temperature = {t} is not a temperature")));
        }
        Ok(t)
    }

    fn kitaev_spec(&self) -> Result<TwoBandSpec, SweepError> {
        TwoBandSpec::kitaev(self.model.m, self.model.c, self.model.big_m)
            .map_err(|e| config_err(e.to_string()))
    }

    fn ssh_spec(&self) -> Result<TwoBandSpec, SweepError> {
        TwoBandSpec::ssh(self.model.j1, self.model.j1 * self.model.j2_over_j1)
            .map_err(|e| config_err(e.to_string()))
    }
}

/// One evaluated grid point. `theta_numeric`/`abs_error` are empty where the
/// numeric route is disabled or undefined (temperature literals 0 and inf,
/// the τ = 0 endpoint, experiments with no numeric counterpart).
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub grid_var: String,
    pub grid_value: f64,
    pub theta_closed: f64,
    pub theta_numeric: Option<f64>,
    pub abs_error: Option<f64>,
    pub branch: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRow {
    pub kind: String,
    pub trial: usize,
    pub dim: usize,
    pub anticomm_norm: f64,
    pub max_abs_re_eig: f64,
    pub trace_drift: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WitnessSummary {
    pub trials: usize,
    pub min_anticommutator_norm: f64,
    pub nonzero_fraction: f64,
}

#[derive(Debug, Clone)]
pub enum ResultTable {
    Figure(Vec<ResultRow>),
    Witness {
        rows: Vec<WitnessRow>,
        summary: WitnessSummary,
    },
}

impl ResultTable {
    pub fn len(&self) -> usize {
        match self {
            ResultTable::Figure(rows) => rows.len(),
            ResultTable::Witness { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn grid_values(grid: &GridSection) -> Vec<f64> {
    let n = grid.points;
    (0..n)
        .map(|j| {
            if j == 0 {
                return grid.start;
            }
            if j == n - 1 {
                return grid.stop;
            }
            let f = (j as f64) / ((n - 1) as f64);
            match grid.scale {
                GridScale::Linear => grid.start + (grid.stop - grid.start) * f,
                GridScale::Log => {
                    (grid.start.ln() + (grid.stop.ln() - grid.start.ln()) * f).exp()
                }
            }
        })
        .collect()
}

fn numeric_err(variable: &str, value: f64, e: Error) -> SweepError {
    SweepError::Numeric {
        variable: variable.to_string(),
        value,
        message: e.to_string(),
    }
}

/// Two-band row: closed form plus, when enabled and the limits allow it,
/// the Brillouin-zone quadrature at the same (τ, β).
fn two_band_row(
    config: &SweepConfig,
    is_kitaev: bool,
    tau_group: f64,
    temperature: f64,
    variable: &str,
    grid_value: f64,
) -> Result<ResultRow, SweepError> {
    let beta_group = temperature.recip();
    let m = &config.model;
    let (closed, branch) = if is_kitaev {
        kitaev_theta_d(m.m, m.c, m.m * tau_group, beta_group)
    } else {
        ssh_theta_d(tau_group, beta_group, m.j2_over_j1)
    }
    .map_err(|e| numeric_err(variable, grid_value, e))?;

    let numeric_allowed = config.numeric.enable
        && tau_group > 0.0
        && beta_group > 0.0
        && beta_group.is_finite();
    let theta_numeric = if numeric_allowed {
        let (spec, scale) = if is_kitaev {
            (
                TwoBandSpec::kitaev(m.m, m.c, m.big_m)
                    .map_err(|e| numeric_err(variable, grid_value, e))?,
                m.big_m,
            )
        } else {
            (
                TwoBandSpec::ssh(m.j1, m.j1 * m.j2_over_j1)
                    .map_err(|e| numeric_err(variable, grid_value, e))?,
                m.j1,
            )
        };
        Some(
            two_band_theta_d_numeric(
                &spec,
                tau_group / scale,
                beta_group / scale,
                config.numeric.n_samples,
            )
            .map_err(|e| numeric_err(variable, grid_value, e))?,
        )
    } else {
        None
    };

    Ok(finish_row(variable, grid_value, closed, theta_numeric, branch.label()))
}

fn oscillator_row(
    config: &SweepConfig,
    omega_tau: f64,
    temperature: f64,
    variable: &str,
    grid_value: f64,
) -> Result<ResultRow, SweepError> {
    let beta_hw = temperature.recip();
    let spec = OscillatorSpec::new(omega_tau, beta_hw, 1)
        .map_err(|e| numeric_err(variable, grid_value, e))?;
    let (closed, branch) =
        oscillator_theta_d(&spec).map_err(|e| numeric_err(variable, grid_value, e))?;

    let numeric_allowed =
        config.numeric.enable && beta_hw > 0.0 && beta_hw.is_finite();
    let theta_numeric = if numeric_allowed {
        let spec = spec
            .with_n_max(oscillator_auto_n_max(beta_hw))
            .map_err(|e| numeric_err(variable, grid_value, e))?;
        Some(
            oscillator_theta_d_numeric(&spec)
                .map_err(|e| numeric_err(variable, grid_value, e))?,
        )
    } else {
        None
    };

    Ok(finish_row(variable, grid_value, closed, theta_numeric, branch.label()))
}

fn finish_row(
    variable: &str,
    grid_value: f64,
    closed: PhaseValue,
    numeric: Option<PhaseValue>,
    branch: &str,
) -> ResultRow {
    ResultRow {
        grid_var: variable.to_string(),
        grid_value,
        theta_closed: closed.angle(),
        theta_numeric: numeric.map(PhaseValue::angle),
        abs_error: numeric.map(|n| n.circular_distance(closed)),
        branch: branch.to_string(),
    }
}

fn figure_row(config: &SweepConfig, grid_value: f64) -> Result<ResultRow, SweepError> {
    let kind = config.kind();
    let variable = kind.grid_variable().expect("figure kinds have a grid");
    match kind {
        ExperimentKind::Fig1Kitaev => two_band_row(
            config,
            true,
            config.require_fixed("tau_group")?,
            grid_value,
            variable,
            grid_value,
        ),
        ExperimentKind::Fig1Ssh => two_band_row(
            config,
            false,
            config.require_fixed("tau_group")?,
            grid_value,
            variable,
            grid_value,
        ),
        ExperimentKind::Fig2Kitaev => two_band_row(
            config,
            true,
            grid_value,
            config.require_fixed("temperature")?,
            variable,
            grid_value,
        ),
        ExperimentKind::Fig2Ssh => two_band_row(
            config,
            false,
            grid_value,
            config.require_fixed("temperature")?,
            variable,
            grid_value,
        ),
        ExperimentKind::Fig3OscillatorT => oscillator_row(
            config,
            config.require_fixed("omega_tau")?,
            grid_value,
            variable,
            grid_value,
        ),
        ExperimentKind::Fig3OscillatorTau => oscillator_row(
            config,
            grid_value,
            config.require_fixed("temperature")?,
            variable,
            grid_value,
        ),
        ExperimentKind::Continuum => {
            let closed = continuum_theta_d(grid_value)
                .map_err(|e| numeric_err(variable, grid_value, e))?;
            Ok(ResultRow {
                grid_var: variable.to_string(),
                grid_value,
                theta_closed: closed.angle(),
                theta_numeric: None,
                abs_error: None,
                branch: "analytic".to_string(),
            })
        }
        ExperimentKind::Crossval => {
            let is_kitaev = config.crossval_model()? == "kitaev";
            two_band_row(
                config,
                is_kitaev,
                grid_value,
                config.require_fixed("temperature")?,
                variable,
                grid_value,
            )
        }
        ExperimentKind::Witness => unreachable!("witness has no grid"),
    }
}

fn rand_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn rand_square(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    Array2::from_shape_fn((n, n), |_| rand_c64(rng))
}

fn rand_full_rank_density(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let x = rand_square(n, rng);
    let mut m = x.dot(&x.mapv(|z| z.conj()).reversed_axes());
    for i in 0..n {
        m[(i, i)] += C64::new(0.2, 0.0);
    }
    let m = (&m + &m.mapv(|z| z.conj()).reversed_axes()).mapv(|z| z * 0.5);
    let tr: C64 = m.diag().sum();
    DensityMatrix::new(m.mapv(|z| z / tr.re)).expect("shifted Gram matrix is a valid state")
}

fn rand_anti_hermitian_nonzero(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    loop {
        let x = rand_square(n, rng);
        let a = (&x - &x.mapv(|z| z.conj()).reversed_axes()).mapv(|z| z * 0.5);
        if fnorm(&a) > 1e-3 {
            return a;
        }
    }
}

/// Random-trial demonstration that the anti-commutator term can never
/// vanish on full-rank states: draws `trials` (ρ, H̃) pairs and reports the
/// smallest witness seen and the fraction of trials it flagged.
pub fn witness_demo(dim: usize, trials: usize, seed: u64) -> Result<WitnessSummary, SweepError> {
    let section = WitnessSection {
        dims: vec![dim],
        trials,
        seed,
    };
    let (_, summary) = witness_rows(&section)?;
    Ok(summary)
}

fn witness_rows(section: &WitnessSection) -> Result<(Vec<WitnessRow>, WitnessSummary), SweepError> {
    let as_numeric = |e: Error| SweepError::Numeric {
        variable: "trial".to_string(),
        value: 0.0,
        message: e.to_string(),
    };
    let mut rows = Vec::with_capacity(section.trials + 2);

    // Control: a vanishing generator must report exact zeros.
    let control_dim = section.dims[0];
    let control = incompatibility_witness(
        &DensityMatrix::maximally_mixed(control_dim),
        &Array2::zeros((control_dim, control_dim)),
    )
    .map_err(as_numeric)?;
    rows.push(WitnessRow {
        kind: "control".to_string(),
        trial: 0,
        dim: control_dim,
        anticomm_norm: control.anticommutator_norm,
        max_abs_re_eig: control.max_abs_re_eigenvalue,
        trace_drift: control.trace_drift,
    });

    // Analytic anchor: on the maximally mixed state {H, rho} = H/... the
    // anti-commutator norm equals ||H~|| exactly (rho = I/2 commutes).
    let h_anchor = Array2::from_shape_fn((2, 2), |(i, j)| match (i, j) {
        (0, 0) => C64::new(0.0, 0.7),
        (1, 1) => C64::new(0.0, -0.7),
        (0, 1) => C64::new(0.0, 0.3),
        (1, 0) => C64::new(0.0, 0.3),
        _ => unreachable!(),
    });
    let anchor = incompatibility_witness(&DensityMatrix::maximally_mixed(2), &h_anchor)
        .map_err(as_numeric)?;
    rows.push(WitnessRow {
        kind: "analytic".to_string(),
        trial: 0,
        dim: 2,
        anticomm_norm: anchor.anticommutator_norm,
        max_abs_re_eig: anchor.max_abs_re_eigenvalue,
        trace_drift: anchor.trace_drift,
    });

    let mut rng = ChaCha8Rng::seed_from_u64(section.seed);
    let mut min_norm = f64::INFINITY;
    let mut nonzero = 0usize;
    for trial in 1..=section.trials {
        let dim = section.dims[(trial - 1) % section.dims.len()];
        let rho = rand_full_rank_density(dim, &mut rng);
        let h_tilde = rand_anti_hermitian_nonzero(dim, &mut rng);
        let report = incompatibility_witness(&rho, &h_tilde).map_err(as_numeric)?;
        min_norm = min_norm.min(report.anticommutator_norm);
        if report.anticommutator_norm > 1e-8 {
            nonzero += 1;
        }
        rows.push(WitnessRow {
            kind: "random".to_string(),
            trial,
            dim,
            anticomm_norm: report.anticommutator_norm,
            max_abs_re_eig: report.max_abs_re_eigenvalue,
            trace_drift: report.trace_drift,
        });
    }
    let summary = WitnessSummary {
        trials: section.trials,
        min_anticommutator_norm: min_norm,
        nonzero_fraction: (nonzero as f64) / (section.trials as f64),
    };
    Ok((rows, summary))
}

/// Evaluate the configured experiment and write its output file atomically.
/// Grid points run on the current rayon pool; rows come back in grid order
/// regardless of thread count. Returns the table that was written.
pub fn run(config: &SweepConfig) -> Result<ResultTable, SweepError> {
    config.validate()?;
    let table = match config.kind() {
        ExperimentKind::Witness => {
            let (rows, summary) = witness_rows(&config.witness)?;
            ResultTable::Witness { rows, summary }
        }
        _ => {
            let grid = config.grid.as_ref().expect("validated");
            let values = grid_values(grid);
            let results: Vec<Result<ResultRow, SweepError>> = values
                .par_iter()
                .map(|&x| figure_row(config, x))
                .collect();
            let mut rows = Vec::with_capacity(results.len());
            for r in results {
                rows.push(r?);
            }
            ResultTable::Figure(rows)
        }
    };
    let rendered = match config.output.format {
        OutputFormat::Csv => render_csv(&table),
        OutputFormat::Json => render_json(&table),
    };
    write_atomic(Path::new(&config.output.path), &rendered)?;
    Ok(table)
}

fn push_opt(line: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        line.push_str(&format!("{v}"));
    }
}

/// CSV with a fixed header per table kind; floats as shortest round-trip
/// decimals so identical runs produce identical bytes.
pub fn render_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    match table {
        ResultTable::Figure(rows) => {
            out.push_str("grid_var,grid_value,theta_closed,theta_numeric,abs_error,branch\n");
            for r in rows {
                out.push_str(&format!("{},{},{},", r.grid_var, r.grid_value, r.theta_closed));
                push_opt(&mut out, r.theta_numeric);
                out.push(',');
                push_opt(&mut out, r.abs_error);
                out.push(',');
                out.push_str(&r.branch);
                out.push('\n');
            }
        }
        ResultTable::Witness { rows, .. } => {
            out.push_str("kind,trial,dim,anticomm_norm,max_abs_re_eig,trace_drift\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.kind, r.trial, r.dim, r.anticomm_norm, r.max_abs_re_eig, r.trace_drift
                ));
            }
        }
    }
    out
}

/// JSON array of row objects, one key set per table kind.
pub fn render_json(table: &ResultTable) -> String {
    let mut s = match table {
        ResultTable::Figure(rows) => {
            serde_json::to_string_pretty(rows).expect("rows serialize")
        }
        ResultTable::Witness { rows, .. } => {
            serde_json::to_string_pretty(rows).expect("rows serialize")
        }
    };
    s.push('\n');
    s
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), SweepError> {
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
