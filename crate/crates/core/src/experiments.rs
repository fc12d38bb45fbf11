//! Angular sweeps, parameter scans and the figure presets.
//!
//! Every angle is an independent work item; rayon fans them out and the
//! results are collected back in grid order, so output does not depend on
//! the number of threads.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{evolve, periodic_yields, yield_direct, ChannelFlags, SolverOptions};
use crate::error::{invalid, CompassError, Result};
use crate::observables::{
    contrast, negativity_of_block, rf_disruption, NegativityConvention, PointMeta, YieldMethod, YieldPoint,
};
use crate::spin::{initial_state, FieldSpec, ModelSpec, PhysicalConstants, RfGeometry, RF_AMPLITUDE};
use crate::state::InitialKind;

/// Which dissipators act besides the shelving decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelSelection {
    #[default]
    DecayOnly,
    GenericNoise,
    Dephasing,
    NoiseAndDephasing,
}

impl ChannelSelection {
    pub fn flags(self) -> ChannelFlags {
        ChannelFlags {
            decay: true,
            generic_noise: matches!(self, Self::GenericNoise | Self::NoiseAndDephasing),
            dephasing: matches!(self, Self::Dephasing | Self::NoiseAndDephasing),
        }
    }

    fn with_noise(self) -> Self {
        match self {
            Self::DecayOnly | Self::GenericNoise => Self::GenericNoise,
            Self::Dephasing | Self::NoiseAndDephasing => Self::NoiseAndDephasing,
        }
    }

    fn with_dephasing(self) -> Self {
        match self {
            Self::DecayOnly | Self::Dephasing => Self::Dephasing,
            Self::GenericNoise | Self::NoiseAndDephasing => Self::NoiseAndDephasing,
        }
    }
}

/// How yields are obtained at each angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum YieldRoute {
    /// Linear solve for a static field, periodic propagation with rf.
    #[default]
    Auto,
    /// Time-step the master equation at every angle.
    Integrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outputs {
    pub csv: bool,
    pub plot: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { csv: true, plot: true }
    }
}

/// `n` equally spaced angles from 0 to π/2 inclusive.
pub fn angle_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| FRAC_PI_2 * i as f64 / (n - 1) as f64).collect(),
    }
}

pub const DEFAULT_ANGLES: usize = 91;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelSpec,
    /// Static-field template; the polar angle is overwritten per grid point.
    pub field: FieldSpec,
    pub rf: RfGeometry,
    /// Tesla, used when `rf` is not `Off`.
    pub rf_amplitude: f64,
    pub angle_grid: Vec<f64>,
    pub channels: ChannelSelection,
    pub initial: InitialKind,
    pub solver: SolverOptions,
    pub route: YieldRoute,
    /// When set, the generic noise rate follows `k` as `factor·k`.
    pub gamma_noise_per_k: Option<f64>,
    /// Also run the scenario with the rf field off and report the disruption.
    pub with_reference: bool,
    pub outputs: Outputs,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "reference".into(),
            model: ModelSpec::cigar(1e4),
            field: FieldSpec::earth(0.0),
            rf: RfGeometry::Off,
            rf_amplitude: RF_AMPLITUDE,
            angle_grid: angle_grid(DEFAULT_ANGLES),
            channels: ChannelSelection::DecayOnly,
            initial: InitialKind::Singlet,
            solver: SolverOptions::default(),
            route: YieldRoute::Auto,
            gamma_noise_per_k: None,
            with_reference: false,
            outputs: Outputs::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        self.effective_model().validate()?;
        self.field.validate()?;
        self.solver.validate()?;
        if self.angle_grid.is_empty() {
            return Err(CompassError::EmptySweep);
        }
        let tol = 1e-12;
        for (i, th) in self.angle_grid.iter().enumerate() {
            if !(th.is_finite() && *th >= -tol && *th <= FRAC_PI_2 + tol) {
                return Err(invalid("angle_grid", &format!("angle {th} outside [0, π/2]")));
            }
            if i > 0 && *th <= self.angle_grid[i - 1] {
                return Err(invalid("angle_grid", "angles must be strictly increasing"));
            }
        }
        if !(self.rf_amplitude.is_finite() && self.rf_amplitude >= 0.0) {
            return Err(invalid("rf_amplitude", "must be non-negative"));
        }
        if self.rf != RfGeometry::Off && self.rf_amplitude == 0.0 {
            return Err(invalid("rf_amplitude", "must be positive when the rf field is on"));
        }
        if let Some(f) = self.gamma_noise_per_k {
            if !(f.is_finite() && f >= 0.0) {
                return Err(invalid("gamma_noise_per_k", "must be non-negative"));
            }
        }
        Ok(())
    }

    /// Model with `gamma_noise_per_k` applied.
    pub fn effective_model(&self) -> ModelSpec {
        let mut m = self.model.clone();
        if let Some(f) = self.gamma_noise_per_k {
            m.gamma_noise = f * m.k;
        }
        m
    }

    pub fn has_rf(&self) -> bool {
        self.rf != RfGeometry::Off && self.rf_amplitude > 0.0
    }

    pub fn field_at_angle(&self, theta: f64) -> FieldSpec {
        self.field.oriented(theta, self.rf, self.rf_amplitude)
    }

    /// Same scenario with the rf field switched off.
    pub fn without_rf(&self) -> Self {
        Self {
            name: format!("{} (no rf)", self.name),
            rf: RfGeometry::Off,
            with_reference: false,
            ..self.clone()
        }
    }

    pub fn with_k(&self, k: f64) -> Self {
        let mut c = self.clone();
        c.model.k = k;
        c
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub solver: String,
}

impl Provenance {
    pub fn of(cfg: &ScenarioConfig) -> Self {
        let o = &cfg.solver;
        Self {
            config_hash: cfg.hash(),
            solver: format!(
                "method={:?} dt={:e} t_max={} residual_eps={:e} rf_phase_samples={} route={:?}",
                o.method,
                o.dt,
                o.t_max.map_or_else(|| "12/k".to_string(), |t| format!("{t:e}")),
                o.residual_eps,
                o.rf_phase_samples,
                cfg.route
            ),
        }
    }
}

/// A grid angle with either its yields or the error that stopped it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub theta: f64,
    pub outcome: std::result::Result<YieldPoint, CompassError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub name: String,
    pub points: Vec<SweepPoint>,
    /// Contrast over the successful points; `None` if every point failed.
    pub contrast: Option<f64>,
    pub reference: Option<Box<SweepResult>>,
    pub rf_disruption: Option<f64>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn successful(&self) -> Vec<YieldPoint> {
        self.points.iter().filter_map(|p| p.outcome.as_ref().ok().copied()).collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }

    fn assemble(cfg: &ScenarioConfig, points: Vec<SweepPoint>, reference: Option<SweepResult>) -> Self {
        let mut r = Self {
            name: cfg.name.clone(),
            points,
            contrast: None,
            reference: None,
            rf_disruption: None,
            provenance: Provenance::of(cfg),
        };
        r.contrast = contrast(&r.successful()).ok();
        if let Some(reference) = reference {
            r.rf_disruption = paired_disruption(&reference, &r);
            r.reference = Some(Box::new(reference));
        }
        r
    }
}

/// Disruption over the angles where both sweeps succeeded.
fn paired_disruption(off: &SweepResult, on: &SweepResult) -> Option<f64> {
    let (a, b): (Vec<YieldPoint>, Vec<YieldPoint>) = off
        .points
        .iter()
        .zip(&on.points)
        .filter_map(|(x, y)| match (&x.outcome, &y.outcome) {
            (Ok(x), Ok(y)) => Some((*x, *y)),
            _ => None,
        })
        .unzip();
    rf_disruption(&a, &b).ok()
}

fn yield_point(theta: f64, phi_s: f64, phi_t: f64, method: YieldMethod, residual: f64) -> YieldPoint {
    YieldPoint {
        theta,
        phi_s,
        phi_t,
        meta: PointMeta { method, residual },
    }
}

/// Yields at one angle for every rate in `ks` (all other model parameters
/// from `cfg`).
fn yields_at(cfg: &ScenarioConfig, theta: f64, ks: &[f64], consts: &PhysicalConstants) -> Vec<Result<YieldPoint>> {
    let f = cfg.field_at_angle(theta);
    let flags = cfg.channels.flags();
    let model_for = |k: f64| cfg.with_k(k).effective_model();
    match cfg.route {
        YieldRoute::Integrate => ks
            .iter()
            .map(|&k| {
                let m = model_for(k);
                let rho0 = initial_state(&m, cfg.initial)?;
                let traj = evolve(&rho0, &m, &f, &cfg.solver, flags, consts)?;
                Ok(yield_point(theta, traj.phi_s(), traj.phi_t(), YieldMethod::Integrated, traj.residual))
            })
            .collect(),
        YieldRoute::Auto if !f.has_rf() => ks
            .iter()
            .map(|&k| {
                let y = yield_direct(&model_for(k), &f, cfg.initial, flags, consts)?;
                Ok(yield_point(theta, y.phi_s, y.phi_t, YieldMethod::Direct, 0.0))
            })
            .collect(),
        YieldRoute::Auto if cfg.gamma_noise_per_k.is_none() => {
            match periodic_yields(&cfg.effective_model(), &f, cfg.initial, flags, &cfg.solver, ks, consts) {
                Ok(ys) => ys
                    .into_iter()
                    .map(|y| Ok(yield_point(theta, y.phi_s, y.phi_t, YieldMethod::Periodic, 0.0)))
                    .collect(),
                Err(e) => ks.iter().map(|_| Err(e.clone())).collect(),
            }
        }
        YieldRoute::Auto => ks
            .iter()
            .map(|&k| {
                let ys = periodic_yields(&model_for(k), &f, cfg.initial, flags, &cfg.solver, &[k], consts)?;
                Ok(yield_point(theta, ys[0].phi_s, ys[0].phi_t, YieldMethod::Periodic, 0.0))
            })
            .collect(),
    }
}

/// Runs `cfg` over its angle grid. Invalid configs are rejected up front;
/// failures at individual angles are kept as gaps.
pub fn angular_sweep(cfg: &ScenarioConfig) -> Result<SweepResult> {
    let mut family = k_family(cfg, &[cfg.model.k])?;
    Ok(family.pop().expect("one rate requested"))
}

/// The sweep of `cfg` repeated for every decay rate in `ks`, sharing the
/// per-angle work where the yield route allows it (the noise-free periodic
/// route handles all rates from one Floquet operator).
pub fn k_family(cfg: &ScenarioConfig, ks: &[f64]) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    if ks.is_empty() {
        return Err(CompassError::EmptySweep);
    }
    for &k in ks {
        cfg.with_k(k).validate()?;
    }
    let consts = PhysicalConstants::default();
    let per_angle: Vec<Vec<Result<YieldPoint>>> = cfg
        .angle_grid
        .par_iter()
        .map(|&theta| yields_at(cfg, theta, ks, &consts))
        .collect();
    let references = if cfg.has_rf() && cfg.with_reference {
        Some(k_family(&cfg.without_rf(), ks)?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(ks.len());
    for (ki, &k) in ks.iter().enumerate() {
        let cfg_k = cfg.with_k(k);
        let points = cfg
            .angle_grid
            .iter()
            .zip(&per_angle)
            .map(|(&theta, ys)| SweepPoint {
                theta,
                outcome: ys[ki].clone(),
            })
            .collect();
        let reference = references.as_ref().map(|r| r[ki].clone());
        out.push(SweepResult::assemble(&cfg_k, points, reference));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanAxis {
    K,
    GammaNoise,
    GammaZ,
}

impl FromStr for ScanAxis {
    type Err = CompassError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(Self::K),
            "noise" | "gamma-noise" | "gamma_noise" => Ok(Self::GammaNoise),
            "dephasing" | "gamma-z" | "gamma_z" => Ok(Self::GammaZ),
            other => Err(invalid("axis", &format!("unknown scan axis {other:?}"))),
        }
    }
}

impl fmt::Display for ScanAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::K => "k",
            Self::GammaNoise => "gamma_noise",
            Self::GammaZ => "gamma_z",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    /// Grid value, s⁻¹.
    pub value: f64,
    /// Contrast of the rf-free sweep.
    pub contrast: Option<f64>,
    pub rf_disruption: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub axis: ScanAxis,
    pub rows: Vec<ScanRow>,
    /// Contrast with the scanned rate at zero (noise axes only).
    pub baseline_contrast: Option<f64>,
    /// Largest grid `k` whose disruption is at least half the maximum.
    pub k_threshold: Option<f64>,
    /// Half-maximum crossing of the disruption, interpolated linearly in
    /// `log k` past `k_threshold`.
    pub k_threshold_interpolated: Option<f64>,
    /// Smallest grid rate whose contrast is at most half the baseline.
    pub gamma_halving: Option<f64>,
    /// Crossing of `contrast/baseline = ½`, interpolated linearly in
    /// `log Γ` (linearly in Γ from a zero lower bracket).
    pub gamma_halving_interpolated: Option<f64>,
}

/// Records contrast and rf disruption of `cfg` at each grid value of the
/// chosen rate. With rf on, contrast is taken from the rf-free reference.
pub fn threshold_scan(axis: ScanAxis, grid: &[f64], cfg: &ScenarioConfig) -> Result<ScanTable> {
    if grid.is_empty() {
        return Err(CompassError::EmptySweep);
    }
    if grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (axis == ScanAxis::K && grid.iter().any(|v| *v <= 0.0)) {
        return Err(invalid("grid", "rates must be positive (noise rates may be zero)"));
    }
    let cfg = ScenarioConfig {
        with_reference: cfg.has_rf(),
        ..cfg.clone()
    };
    let row_of = |value: f64, s: &SweepResult| ScanRow {
        value,
        contrast: s.reference.as_ref().map_or(s.contrast, |r| r.contrast),
        rf_disruption: s.rf_disruption,
    };
    let (rows, baseline_contrast) = match axis {
        ScanAxis::K => {
            let sweeps = k_family(&cfg, grid)?;
            (grid.iter().zip(&sweeps).map(|(&v, s)| row_of(v, s)).collect::<Vec<_>>(), None)
        }
        ScanAxis::GammaNoise | ScanAxis::GammaZ => {
            let at = |rate: f64| -> Result<SweepResult> {
                let mut c = cfg.clone();
                if axis == ScanAxis::GammaNoise {
                    c.gamma_noise_per_k = None;
                    c.model.gamma_noise = rate;
                    c.channels = c.channels.with_noise();
                } else {
                    c.model.gamma_z = rate;
                    c.channels = c.channels.with_dephasing();
                }
                angular_sweep(&c)
            };
            let rows = grid
                .iter()
                .map(|&v| at(v).map(|s| row_of(v, &s)))
                .collect::<Result<Vec<_>>>()?;
            let baseline = match rows.iter().find(|r| r.value == 0.0) {
                Some(r) => r.contrast,
                None => {
                    let s = at(0.0)?;
                    s.reference.as_ref().map_or(s.contrast, |r| r.contrast)
                }
            };
            (rows, baseline)
        }
    };

    let mut table = ScanTable {
        axis,
        rows,
        baseline_contrast,
        k_threshold: None,
        k_threshold_interpolated: None,
        gamma_halving: None,
        gamma_halving_interpolated: None,
    };
    if axis == ScanAxis::K {
        let (grid_value, interp) = half_max_threshold(&table.rows);
        table.k_threshold = grid_value;
        table.k_threshold_interpolated = interp;
    } else if let Some(base) = baseline_contrast.filter(|b| *b > 0.0) {
        let (grid_value, interp) = halving_rate(&table.rows, base);
        table.gamma_halving = grid_value;
        table.gamma_halving_interpolated = interp;
    }
    Ok(table)
}

fn half_max_threshold(rows: &[ScanRow]) -> (Option<f64>, Option<f64>) {
    let mut pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.rf_disruption.map(|d| (r.value, d))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dmax = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    if dmax <= 0.0 {
        return (None, None);
    }
    let half = dmax / 2.0;
    let Some(i) = pts.iter().rposition(|p| p.1 >= half) else {
        return (None, None);
    };
    let k_i = pts[i].0;
    let interp = match pts.get(i + 1) {
        Some(&(k_j, d_j)) => {
            let d_i = pts[i].1;
            let frac = (d_i - half) / (d_i - d_j);
            Some((k_i.ln() + frac * (k_j.ln() - k_i.ln())).exp())
        }
        None => Some(k_i),
    };
    (Some(k_i), interp)
}

fn halving_rate(rows: &[ScanRow], base: f64) -> (Option<f64>, Option<f64>) {
    let mut pts: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    pts.extend(rows.iter().filter(|r| r.value > 0.0).filter_map(|r| r.contrast.map(|c| (r.value, c / base))));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let Some(j) = pts.iter().position(|p| p.1 <= 0.5) else {
        return (None, None);
    };
    let (g1, r1) = pts[j];
    let (g0, r0) = pts[j - 1];
    let frac = (r0 - 0.5) / (r0 - r1);
    let interp = if g0 > 0.0 {
        (g0.ln() + frac * (g1.ln() - g0.ln())).exp()
    } else {
        g0 + frac * (g1 - g0)
    };
    (Some(g1), Some(interp))
}

/// Standard and half-trace-norm negativity over time for several noise
/// rates at one angle.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativitySurface {
    pub theta: f64,
    pub k: f64,
    pub gammas: Vec<f64>,
    pub times: Vec<f64>,
    /// `standard[i][j]` at `gammas[i]`, `times[j]`.
    pub standard: Vec<Vec<f64>>,
    pub half_trace_norm: Vec<Vec<f64>>,
    /// Earliest sample from which the standard negativity stays zero.
    pub death_times: Vec<Option<f64>>,
}

/// Sample spacing of the negativity surface, seconds.
pub const NEGATIVITY_SAMPLE: f64 = 0.5e-6;

/// Evolves `cfg`'s model at `theta` for each generic noise rate and samples
/// the negativity of the spin block every [`NEGATIVITY_SAMPLE`] up to
/// `t_end` (or until the solver stops, if earlier).
pub fn negativity_surface(cfg: &ScenarioConfig, theta: f64, gammas: &[f64], t_end: f64, renormalize: bool) -> Result<NegativitySurface> {
    cfg.validate()?;
    if gammas.is_empty() {
        return Err(CompassError::EmptySweep);
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(invalid("t_end", "must be positive"));
    }
    let consts = PhysicalConstants::default();
    let f = cfg.field_at_angle(theta);
    let stride = ((NEGATIVITY_SAMPLE / cfg.solver.dt).round() as usize).max(1);
    let opts = SolverOptions {
        store_trajectory: true,
        trajectory_stride: stride,
        ..cfg.solver
    };
    let runs: Vec<Result<(Vec<f64>, Vec<f64>, Vec<f64>)>> = gammas
        .par_iter()
        .map(|&gamma| {
            let mut c = cfg.clone();
            c.gamma_noise_per_k = None;
            c.model.gamma_noise = gamma;
            let m = c.effective_model();
            let rho0 = initial_state(&m, cfg.initial)?;
            let flags = c.channels.with_noise().flags();
            let traj = evolve(&rho0, &m, &f, &opts, flags, &consts)?;
            // the run continues until the pair has decayed; keep [0, t_end]
            let n = traj.times.partition_point(|t| *t <= t_end * (1.0 + 1e-12));
            let states = &traj.states[..n];
            let std: Vec<f64> = states
                .iter()
                .map(|s| negativity_of_block(&s.spin_block(), NegativityConvention::Standard, renormalize))
                .collect();
            let half = states
                .iter()
                .map(|s| negativity_of_block(&s.spin_block(), NegativityConvention::HalfTraceNorm, renormalize))
                .collect();
            Ok((traj.times[..n].to_vec(), std, half))
        })
        .collect();
    let mut surface = NegativitySurface {
        theta,
        k: cfg.model.k,
        gammas: gammas.to_vec(),
        times: Vec::new(),
        standard: Vec::new(),
        half_trace_norm: Vec::new(),
        death_times: Vec::new(),
    };
    for run in runs {
        let (times, std, half) = run?;
        surface.death_times.push(death_time(&times, &std));
        if surface.times.is_empty() {
            surface.times = times;
        }
        surface.standard.push(std);
        surface.half_trace_norm.push(half);
    }
    Ok(surface)
}

/// First sample time after which every value is exactly zero.
pub fn death_time(times: &[f64], values: &[f64]) -> Option<f64> {
    let last_positive = values.iter().rposition(|v| *v > 0.0);
    match last_positive {
        None => times.first().copied(),
        Some(i) if i + 1 < values.len() => Some(times[i + 1]),
        Some(_) => None,
    }
}

/// Figure presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    DephasingField,
    Disc,
    GFactor,
    TwoNuclei,
    NoiseField,
}

impl Figure {
    pub const ALL: [Figure; 8] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::DephasingField,
        Figure::Disc,
        Figure::GFactor,
        Figure::TwoNuclei,
        Figure::NoiseField,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::DephasingField => "s-dephasing-field",
            Figure::Disc => "s-disc",
            Figure::GFactor => "s-gfactor",
            Figure::TwoNuclei => "s-2nuclei",
            Figure::NoiseField => "s-noise-field",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = CompassError;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CompassError::UnknownFigure(s.to_string()))
    }
}

/// Decay rates of the rf panels.
pub const FIG2_KS: [f64; 5] = [1e3, 1e4, 1e5, 1e6, 1e7];
/// Noise rates of the noise panels, as multiples of `k`.
pub const NOISE_FACTORS: [f64; 5] = [0.0, 0.01, 0.1, 1.0, 10.0];
/// Pure-dephasing rates of the dephasing panel, s⁻¹ (1/Γ_z = 10 μs last).
pub const DEPHASING_RATES: [f64; 4] = [0.0, 1e3, 1e4, 1e5];
/// Noise rates at `k = 10⁵` for the right noise-and-rf panel, s⁻¹.
pub const NOISE_FIELD_RATES: [f64; 3] = [1e3, 1e4, 1e5];
/// Noise rates of the negativity figure, s⁻¹.
pub const FIG4_GAMMAS: [f64; 4] = [0.0, 1e2, 1e3, 1e4];
/// End of the negativity time axis, seconds.
pub const FIG4_T_END: f64 = 300e-6;

/// One curve of a figure panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub sweep: SweepResult,
    /// Vertical offset applied by the plotting layer only.
    pub plot_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub name: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub figure: Figure,
    pub panels: Vec<Panel>,
    pub negativity: Option<NegativitySurface>,
}

/// Overrides for preset runs.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetOptions {
    pub angle_grid: Vec<f64>,
    pub solver: SolverOptions,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            angle_grid: angle_grid(DEFAULT_ANGLES),
            solver: SolverOptions::default(),
        }
    }
}

/// Azimuth of the sweep plane for the disc preset. Its tensor has
/// `A_x = A_z`, so the default xz-plane sweep would see no angular
/// dependence; the yz-plane contains the distinct axis.
pub const DISC_SWEEP_PHI: f64 = FRAC_PI_2;

fn base(name: &str, model: ModelSpec, opts: &PresetOptions) -> ScenarioConfig {
    base_in_plane(name, model, opts, 0.0)
}

fn base_in_plane(name: &str, model: ModelSpec, opts: &PresetOptions, phi: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        model,
        field: FieldSpec {
            phi_static: phi,
            ..FieldSpec::earth(0.0)
        },
        angle_grid: opts.angle_grid.clone(),
        solver: opts.solver,
        ..ScenarioConfig::default()
    }
}

fn fmt_rate(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.0e}")
    }
}

/// Static reference plus one rf curve per `k`.
fn rf_panel(
    name: &str,
    model: ModelSpec,
    phi: f64,
    opts: &PresetOptions,
    noise_per_k: Option<f64>,
    reference_offset: f64,
) -> Result<Panel> {
    let cfg = ScenarioConfig {
        rf: RfGeometry::Perpendicular,
        gamma_noise_per_k: noise_per_k,
        channels: if noise_per_k.is_some() {
            ChannelSelection::GenericNoise
        } else {
            ChannelSelection::DecayOnly
        },
        with_reference: true,
        ..base_in_plane(name, model.clone(), opts, phi)
    };
    let mut series = Vec::new();
    if noise_per_k.is_none() {
        let reference = ScenarioConfig {
            name: format!("{name} reference"),
            ..base_in_plane(name, model, opts, phi)
        };
        series.push(Series {
            label: "reference (no rf)".into(),
            sweep: angular_sweep(&reference)?,
            plot_offset: reference_offset,
        });
    }
    for (k, sweep) in FIG2_KS.iter().zip(k_family(&cfg, &FIG2_KS)?) {
        // noisy panels draw each k's own rf-free curve
        if let Some(r) = sweep.reference.as_ref().filter(|_| noise_per_k.is_some()) {
            series.push(Series {
                label: format!("k={} no rf", fmt_rate(*k)),
                sweep: (**r).clone(),
                plot_offset: 0.0,
            });
        }
        series.push(Series {
            label: format!("k={} rf", fmt_rate(*k)),
            sweep,
            plot_offset: 0.0,
        });
    }
    Ok(Panel {
        name: name.into(),
        series,
    })
}

/// One static curve per noise rate `factor·k`.
fn noise_panel(name: &str, model: ModelSpec, phi: f64, opts: &PresetOptions) -> Result<Panel> {
    let k = model.k;
    let mut series = Vec::new();
    for factor in NOISE_FACTORS {
        let mut m = model.clone();
        m.gamma_noise = factor * k;
        let cfg = ScenarioConfig {
            name: format!("{name} gamma={}", fmt_rate(factor * k)),
            channels: ChannelSelection::GenericNoise,
            ..base_in_plane(name, m, opts, phi)
        };
        series.push(Series {
            label: format!("Γ={}k", factor),
            sweep: angular_sweep(&cfg)?,
            plot_offset: 0.0,
        });
    }
    Ok(Panel {
        name: name.into(),
        series,
    })
}

/// Builds and runs the preset grid of `figure`.
pub fn reproduce(figure: Figure, opts: &PresetOptions) -> Result<FigureData> {
    let mut data = FigureData {
        figure,
        panels: Vec::new(),
        negativity: None,
    };
    match figure {
        Figure::Fig2 => data.panels.push(rf_panel("fig2", ModelSpec::cigar(1e4), 0.0, opts, None, 0.001)?),
        Figure::Fig3 => data.panels.push(noise_panel("fig3", ModelSpec::cigar(1e4), 0.0, opts)?),
        Figure::Fig4 => {
            let cfg = base("fig4", ModelSpec::cigar(1e4), opts);
            data.negativity = Some(negativity_surface(&cfg, FRAC_PI_4, &FIG4_GAMMAS, FIG4_T_END, false)?);
        }
        Figure::DephasingField => {
            let name = "s-dephasing-field";
            let reference = base(name, ModelSpec::cigar(1e4), opts);
            let mut series = vec![Series {
                label: "reference (no rf)".into(),
                sweep: angular_sweep(&ScenarioConfig {
                    name: format!("{name} reference"),
                    ..reference.clone()
                })?,
                plot_offset: 0.0,
            }];
            for gz in DEPHASING_RATES {
                let mut m = ModelSpec::cigar(1e4);
                m.gamma_z = gz;
                let cfg = ScenarioConfig {
                    name: format!("{name} gamma_z={}", fmt_rate(gz)),
                    rf: RfGeometry::Perpendicular,
                    channels: ChannelSelection::Dephasing,
                    ..base(name, m, opts)
                };
                series.push(Series {
                    label: format!("Γz={} rf", fmt_rate(gz)),
                    sweep: angular_sweep(&cfg)?,
                    plot_offset: 0.0,
                });
            }
            data.panels.push(Panel {
                name: name.into(),
                series,
            });
        }
        Figure::Disc | Figure::GFactor | Figure::TwoNuclei => {
            let (name, model, phi) = match figure {
                Figure::Disc => ("s-disc", ModelSpec::disc(1e4), DISC_SWEEP_PHI),
                Figure::GFactor => ("s-gfactor", ModelSpec::anisotropic_g(1e4), 0.0),
                _ => ("s-2nuclei", ModelSpec::two_nuclei(1e4), 0.0),
            };
            data.panels.push(rf_panel(&format!("{name}-rf"), model.clone(), phi, opts, None, 0.0)?);
            data.panels.push(noise_panel(&format!("{name}-noise"), model, phi, opts)?);
        }
        Figure::NoiseField => {
            let name = "s-noise-field";
            data.panels.push(rf_panel(&format!("{name}-left"), ModelSpec::cigar(1e4), 0.0, opts, Some(0.1), 0.0)?);
            let mut series = Vec::new();
            for gamma in NOISE_FIELD_RATES {
                let mut m = ModelSpec::cigar(1e5);
                m.gamma_noise = gamma;
                let cfg = ScenarioConfig {
                    name: format!("{name} gamma={}", fmt_rate(gamma)),
                    rf: RfGeometry::Perpendicular,
                    channels: ChannelSelection::GenericNoise,
                    with_reference: true,
                    ..base(name, m, opts)
                };
                let sweep = angular_sweep(&cfg)?;
                let reference = sweep.reference.as_deref().cloned().expect("reference requested");
                series.push(Series {
                    label: format!("Γ={} no rf", fmt_rate(gamma)),
                    sweep: reference,
                    plot_offset: 0.0,
                });
                series.push(Series {
                    label: format!("Γ={} rf", fmt_rate(gamma)),
                    sweep,
                    plot_offset: 0.0,
                });
            }
            data.panels.push(Panel {
                name: format!("{name}-right"),
                series,
            });
        }
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize) -> ScenarioConfig {
        ScenarioConfig {
            angle_grid: angle_grid(n),
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn default_grid_spans_quarter_turn() {
        let g = angle_grid(DEFAULT_ANGLES);
        assert_eq!(g.len(), 91);
        assert_eq!(g[0], 0.0);
        assert!((g[90] - FRAC_PI_2).abs() < 1e-15);
        assert!(ScenarioConfig::default().validate().is_ok());
    }

    #[test]
    fn grid_validation() {
        let mut c = small(3);
        c.angle_grid = vec![0.1, 0.1];
        assert!(c.validate().is_err());
        c.angle_grid = vec![0.1, 2.0];
        assert!(c.validate().is_err());
        c.angle_grid = Vec::new();
        assert_eq!(c.validate(), Err(CompassError::EmptySweep));
    }

    #[test]
    fn single_angle_sweep_has_zero_contrast() {
        let r = angular_sweep(&small(1)).unwrap();
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.contrast, Some(0.0));
    }

    #[test]
    fn sweep_is_ordered_and_has_contrast() {
        let r = angular_sweep(&small(10)).unwrap();
        assert!(r.points.windows(2).all(|w| w[0].theta < w[1].theta));
        assert!(r.contrast.unwrap() > 0.01);
        assert_eq!(r.failures(), 0);
    }

    #[test]
    fn failed_points_become_gaps() {
        // RK4 with a step far too coarse fails the resolution check at every angle
        let mut c = small(3);
        c.route = YieldRoute::Integrate;
        c.solver.method = crate::dynamics::Method::Rk4Fixed;
        c.solver.dt = 1e-7;
        let r = angular_sweep(&c).unwrap();
        assert_eq!(r.failures(), 3);
        assert_eq!(r.contrast, None);
    }

    #[test]
    fn names_round_trip() {
        for f in Figure::ALL {
            assert_eq!(f.name().parse::<Figure>().unwrap(), f);
        }
        assert!(matches!("fig9".parse::<Figure>(), Err(CompassError::UnknownFigure(_))));
    }

    #[test]
    fn death_time_detection() {
        let t = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(death_time(&t, &[0.5, 0.2, 0.0, 0.0]), Some(2.0));
        assert_eq!(death_time(&t, &[0.5, 0.0, 0.1, 0.0]), Some(3.0));
        assert_eq!(death_time(&t, &[0.5, 0.2, 0.1, 0.1]), None);
        assert_eq!(death_time(&t, &[0.0; 4]), Some(0.0));
    }

    #[test]
    fn interpolated_thresholds() {
        let row = |v: f64, c: f64, d: f64| ScanRow {
            value: v,
            contrast: Some(c),
            rf_disruption: Some(d),
        };
        let rows = [row(1e3, 1.0, 0.8), row(1e4, 1.0, 0.6), row(1e5, 1.0, 0.2)];
        let (g, i) = half_max_threshold(&rows);
        assert_eq!(g, Some(1e4));
        // 0.6 → 0.2 crosses 0.4 halfway in log k
        assert!((i.unwrap() - 10f64.powf(4.5)).abs() < 1e-6 * 1e5);
        let rows = [row(1e2, 0.9, 0.0), row(1e3, 0.3, 0.0)];
        let (g, i) = halving_rate(&rows, 1.0);
        assert_eq!(g, Some(1e3));
        assert!((i.unwrap() - 10f64.powf(2.0 + 4.0 / 6.0)).abs() < 1e-6 * 1e3);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ScenarioConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.model.k = 2e4;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn negativity_surface_sudden_death() {
        let cfg = ScenarioConfig::default();
        let s = negativity_surface(&cfg, FRAC_PI_4, &[0.0, 1e4], 60e-6, false).unwrap();
        assert!((s.standard[0][0] - 0.5).abs() < 1e-10);
        assert!(s.death_times[0].is_none());
        let death = s.death_times[1].expect("dies");
        eprintln!("death at {death:e}");
        assert!(death > 5e-6 && death < 30e-6);
        // decay-only negativity is 0.5·e^{−kt}
        for (t, n) in s.times.iter().zip(&s.standard[0]) {
            assert!((n - 0.5 * (-1e4 * t).exp()).abs() < 1e-8);
        }
    }
}
