//! TOML configuration documents.
//!
//! Every physical quantity carries its unit in the key name. Missing keys
//! take the reference values (cigar tensor, k = 10⁴ s⁻¹, B₀ = 47 μT,
//! B_rf = 150 nT at the 1.316 MHz resonance, 91 angles over [0, π/2]).
//!
//! ```toml
//! name = "reference"
//! angles = 91
//! channels = "decay-only"
//!
//! [model]
//! preset = "cigar"
//! k_per_second = 1e4
//!
//! [field]
//! b0_tesla = 47e-6
//! rf = "perpendicular"
//! ```

use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use compass_core::dynamics::{Method, SolverOptions};
use compass_core::experiments::{angle_grid, ChannelSelection, Outputs, ScenarioConfig, YieldRoute, DEFAULT_ANGLES};
use compass_core::spin::{EARTH_FIELD, RF_AMPLITUDE};
use compass_core::{CompassError, FieldSpec, GTensor, HyperfineTensor, InitialKind, ModelSpec, PhysicalConstants, RfGeometry};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub name: Option<String>,
    /// Number of equally spaced angles over [0, π/2].
    pub angles: Option<usize>,
    /// Explicit grid; overrides `angles`.
    pub angle_grid_rad: Option<Vec<f64>>,
    pub channels: Option<ChannelSelection>,
    pub initial: Option<InitialKind>,
    pub with_reference: Option<bool>,
    pub outputs: Option<Vec<OutputKind>>,
    #[serde(default)]
    pub model: ModelDoc,
    #[serde(default)]
    pub field: FieldDoc,
    #[serde(default)]
    pub solver: SolverDoc,
    #[serde(default)]
    pub negativity: NegativityDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    Csv,
    Plot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelPreset {
    #[default]
    Cigar,
    Disc,
    TwoNuclei,
    AnisotropicG,
    Uncoupled,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub preset: Option<ModelPreset>,
    /// Replaces the preset's nuclei.
    pub nuclei: Option<Vec<NucleusDoc>>,
    pub g1: Option<[f64; 3]>,
    pub g2: Option<[f64; 3]>,
    pub k_per_second: Option<f64>,
    pub gamma_noise_per_second: Option<f64>,
    /// Noise rate as a multiple of k; excludes `gamma_noise_per_second`.
    pub gamma_noise_per_k: Option<f64>,
    pub gamma_z_per_second: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NucleusDoc {
    pub ax_mev: f64,
    pub ay_mev: f64,
    pub az_mev: f64,
    pub orientation: Option<[[f64; 3]; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RfDoc {
    #[default]
    Off,
    Perpendicular,
    PerpendicularOutOfPlane,
    Parallel,
    Fixed,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub b0_tesla: Option<f64>,
    pub phi_rad: Option<f64>,
    pub rf: Option<RfDoc>,
    pub b_rf_tesla: Option<f64>,
    /// Defaults to the free-electron resonance at `b0_tesla`.
    pub rf_frequency_hz: Option<f64>,
    pub rf_phase_rad: Option<f64>,
    /// Direction of a `fixed` rf field.
    pub rf_theta_rad: Option<f64>,
    pub rf_phi_rad: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverDoc {
    pub method: Option<Method>,
    pub dt_seconds: Option<f64>,
    pub t_max_seconds: Option<f64>,
    pub residual_eps: Option<f64>,
    pub rf_phase_samples: Option<usize>,
    pub route: Option<YieldRoute>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativityDoc {
    pub theta_rad: Option<f64>,
    pub gammas_per_second: Option<Vec<f64>>,
    pub t_end_seconds: Option<f64>,
    pub renormalize: Option<bool>,
}

/// Negativity run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativityRun {
    pub theta: f64,
    pub gammas: Vec<f64>,
    pub t_end: f64,
    pub renormalize: bool,
}

impl Default for NegativityRun {
    fn default() -> Self {
        Self {
            theta: FRAC_PI_4,
            gammas: compass_core::experiments::FIG4_GAMMAS.to_vec(),
            t_end: compass_core::experiments::FIG4_T_END,
            renormalize: false,
        }
    }
}

/// A parsed and validated document.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: ScenarioConfig,
    pub negativity: NegativityRun,
}

fn bad(key: &str, reason: &str) -> CliError {
    CliError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn positive(key: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(bad(key, "must be positive")),
        other => Ok(other),
    }
}

fn non_negative(key: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(x) if !(x.is_finite() && x >= 0.0) => Err(bad(key, "must be non-negative")),
        other => Ok(other),
    }
}

fn finite(key: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(x) if !x.is_finite() => Err(bad(key, "must be finite")),
        other => Ok(other),
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let doc: ConfigDocument = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        CliError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    doc.into_config()
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text)
}

impl ConfigDocument {
    pub fn into_config(self) -> Result<Config, CliError> {
        let defaults = ScenarioConfig::default();
        let consts = PhysicalConstants::default();

        let m = &self.model;
        let mut model = match m.preset.unwrap_or_default() {
            ModelPreset::Cigar => ModelSpec::cigar(1e4),
            ModelPreset::Disc => ModelSpec::disc(1e4),
            ModelPreset::TwoNuclei => ModelSpec::two_nuclei(1e4),
            ModelPreset::AnisotropicG => ModelSpec::anisotropic_g(1e4),
            ModelPreset::Uncoupled => ModelSpec::uncoupled(1e4),
        };
        if let Some(nuclei) = &m.nuclei {
            if nuclei.len() > 2 {
                return Err(bad("model.nuclei", "at most 2 nuclei are supported"));
            }
            model.nuclei = Vec::new();
            for (i, n) in nuclei.iter().enumerate() {
                let key = format!("model.nuclei[{i}]");
                for (name, v) in [("ax_mev", n.ax_mev), ("ay_mev", n.ay_mev), ("az_mev", n.az_mev)] {
                    finite(&format!("{key}.{name}"), Some(v))?;
                }
                let mut t = HyperfineTensor::diagonal(n.ax_mev, n.ay_mev, n.az_mev);
                if let Some(r) = n.orientation {
                    if r.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(bad(&format!("{key}.orientation"), "must be finite"));
                    }
                    t.orientation = r;
                }
                model.nuclei.push(t);
            }
        }
        for (key, g, slot) in [("model.g1", m.g1, &mut model.g1), ("model.g2", m.g2, &mut model.g2)] {
            if let Some([gx, gy, gz]) = g {
                if [gx, gy, gz].iter().any(|v| !v.is_finite()) {
                    return Err(bad(key, "must be finite"));
                }
                *slot = GTensor { gx, gy, gz };
            }
        }
        model.k = positive("model.k_per_second", m.k_per_second)?.unwrap_or(defaults.model.k);
        model.gamma_noise = non_negative("model.gamma_noise_per_second", m.gamma_noise_per_second)?.unwrap_or(0.0);
        let gamma_noise_per_k = non_negative("model.gamma_noise_per_k", m.gamma_noise_per_k)?;
        if gamma_noise_per_k.is_some() && m.gamma_noise_per_second.is_some() {
            return Err(bad(
                "model.gamma_noise_per_k",
                "conflicts with model.gamma_noise_per_second; set one of them",
            ));
        }
        model.gamma_z = non_negative("model.gamma_z_per_second", m.gamma_z_per_second)?.unwrap_or(0.0);

        let f = &self.field;
        let b0 = positive("field.b0_tesla", f.b0_tesla)?.unwrap_or(EARTH_FIELD);
        let omega = match positive("field.rf_frequency_hz", f.rf_frequency_hz)? {
            Some(nu) => 2.0 * std::f64::consts::PI * nu,
            None => consts.resonance_omega(b0),
        };
        let field = FieldSpec {
            b0,
            phi_static: finite("field.phi_rad", f.phi_rad)?.unwrap_or(0.0),
            omega,
            rf_phase: finite("field.rf_phase_rad", f.rf_phase_rad)?.unwrap_or(0.0),
            ..FieldSpec::earth(0.0)
        };
        let rf = match f.rf.unwrap_or_default() {
            RfDoc::Off => RfGeometry::Off,
            RfDoc::Perpendicular => RfGeometry::Perpendicular,
            RfDoc::PerpendicularOutOfPlane => RfGeometry::PerpendicularOutOfPlane,
            RfDoc::Parallel => RfGeometry::Parallel,
            RfDoc::Fixed => {
                let theta = finite("field.rf_theta_rad", f.rf_theta_rad)?
                    .ok_or_else(|| bad("field.rf_theta_rad", "required when field.rf = \"fixed\""))?;
                let phi = finite("field.rf_phi_rad", f.rf_phi_rad)?.unwrap_or(0.0);
                RfGeometry::Fixed { theta, phi }
            }
        };
        if !matches!(rf, RfGeometry::Fixed { .. }) {
            for (key, v) in [("field.rf_theta_rad", f.rf_theta_rad), ("field.rf_phi_rad", f.rf_phi_rad)] {
                if v.is_some() {
                    return Err(bad(key, "only used when field.rf = \"fixed\""));
                }
            }
        }
        let rf_amplitude = positive("field.b_rf_tesla", f.b_rf_tesla)?.unwrap_or(RF_AMPLITUDE);

        let s = &self.solver;
        let solver = SolverOptions {
            method: s.method.unwrap_or(defaults.solver.method),
            dt: positive("solver.dt_seconds", s.dt_seconds)?.unwrap_or(defaults.solver.dt),
            t_max: positive("solver.t_max_seconds", s.t_max_seconds)?,
            residual_eps: positive("solver.residual_eps", s.residual_eps)?.unwrap_or(defaults.solver.residual_eps),
            rf_phase_samples: match s.rf_phase_samples {
                Some(0) => return Err(bad("solver.rf_phase_samples", "must be at least 1")),
                Some(n) => n,
                None => defaults.solver.rf_phase_samples,
            },
            ..defaults.solver
        };

        let grid = match (&self.angle_grid_rad, self.angles) {
            (Some(_), Some(_)) => return Err(bad("angles", "conflicts with angle_grid_rad; set one of them")),
            (Some(g), None) => g.clone(),
            (None, Some(0)) => return Err(bad("angles", "must be at least 1")),
            (None, Some(n)) => angle_grid(n),
            (None, None) => angle_grid(DEFAULT_ANGLES),
        };
        let grid_key = if self.angle_grid_rad.is_some() { "angle_grid_rad" } else { "angles" };
        if grid.is_empty() {
            return Err(bad(grid_key, "must not be empty"));
        }
        for (i, th) in grid.iter().enumerate() {
            if !(th.is_finite() && *th >= 0.0 && *th <= std::f64::consts::FRAC_PI_2 + 1e-12) {
                return Err(bad(grid_key, &format!("angle {th} outside [0, π/2]")));
            }
            if i > 0 && *th <= grid[i - 1] {
                return Err(bad(grid_key, "angles must be strictly increasing"));
            }
        }

        let outputs = match &self.outputs {
            Some(list) => Outputs {
                csv: list.contains(&OutputKind::Csv),
                plot: list.contains(&OutputKind::Plot),
            },
            None => Outputs::default(),
        };
        let name = self.name.clone().unwrap_or(defaults.name.clone());
        if name.trim().is_empty() {
            return Err(bad("name", "must not be empty"));
        }

        let scenario = ScenarioConfig {
            name,
            model,
            field,
            rf,
            rf_amplitude,
            angle_grid: grid,
            channels: self.channels.unwrap_or(defaults.channels),
            initial: self.initial.unwrap_or(defaults.initial),
            solver,
            route: s.route.unwrap_or(defaults.route),
            gamma_noise_per_k,
            with_reference: self.with_reference.unwrap_or(defaults.with_reference),
            outputs,
        };
        scenario.validate().map_err(|e| core_error_key(&e))?;

        let n = &self.negativity;
        let mut negativity = NegativityRun::default();
        if let Some(th) = finite("negativity.theta_rad", n.theta_rad)? {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&th) {
                return Err(bad("negativity.theta_rad", "must lie in [0, π/2]"));
            }
            negativity.theta = th;
        }
        if let Some(g) = &n.gammas_per_second {
            if g.is_empty() {
                return Err(bad("negativity.gammas_per_second", "must not be empty"));
            }
            if g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(bad("negativity.gammas_per_second", "rates must be non-negative"));
            }
            negativity.gammas = g.clone();
        }
        if let Some(t) = positive("negativity.t_end_seconds", n.t_end_seconds)? {
            negativity.t_end = t;
        }
        negativity.renormalize = n.renormalize.unwrap_or(false);

        Ok(Config { scenario, negativity })
    }
}

/// Maps a core validation error back to the document key.
fn core_error_key(e: &CompassError) -> CliError {
    let key = match e {
        CompassError::InvalidParameter { name, .. } => match name.as_str() {
            "k" => "model.k_per_second".to_string(),
            "gamma_noise" => "model.gamma_noise_per_second".to_string(),
            "gamma_z" => "model.gamma_z_per_second".to_string(),
            "omega" => "field.rf_frequency_hz".to_string(),
            "g1" | "g2" => format!("model.{name}"),
            other if other.starts_with("nuclei") => format!("model.{other}"),
            other => other.to_string(),
        },
        CompassError::TooManyNuclei(_) => "model.nuclei".to_string(),
        CompassError::InvalidOptions(_) => "solver".to_string(),
        CompassError::EmptySweep => "angles".to_string(),
        _ => "config".to_string(),
    };
    bad(&key, &e.to_string())
}
