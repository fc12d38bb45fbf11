//! Fixed-step time integration of the master equation.

use serde::{Deserialize, Serialize};

use crate::error::{CompassError, Result};
use crate::linalg::{hermitian_eigenvalues, Operator, C64, ZERO};
use crate::observables::singlet_functional;
use crate::spin::{FieldSpec, ModelSpec, PhysicalConstants};
use crate::state::DensityMatrix;

use super::channels::ChannelFlags;
use super::generator::CompiledGenerator;
use super::slots::{cf4_coefficients, slot_map, slots_per_period};

/// Eigenvalues below this abort an evolution.
pub const POSITIVITY_ABORT: f64 = -1e-6;

/// Steps between positivity checks when states are not being stored.
const POSITIVITY_INTERVAL: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4Fixed,
    /// Exact exponential of the generator per step. With an oscillating
    /// field the step is shrunk to tile the rf period and each slot uses
    /// the commutator-free Magnus rule of [`super::slots`].
    #[default]
    ExpmPiecewise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Step size, seconds.
    pub dt: f64,
    /// End time, seconds; `None` means `12/k`.
    pub t_max: Option<f64>,
    /// Stop once the unabsorbed population drops below this.
    pub residual_eps: f64,
    pub method: Method,
    pub store_trajectory: bool,
    pub trajectory_stride: usize,
    /// Number of uniformly spaced rf phases to average over (1 = off).
    pub rf_phase_samples: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dt: 10e-9,
            t_max: None,
            residual_eps: 1e-4,
            method: Method::ExpmPiecewise,
            store_trajectory: false,
            trajectory_stride: 1,
            rf_phase_samples: 1,
        }
    }
}

impl SolverOptions {
    pub fn t_max_for(&self, k: f64) -> f64 {
        self.t_max.unwrap_or(12.0 / k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(CompassError::InvalidOptions("dt must be positive".into()));
        }
        if let Some(t) = self.t_max {
            if !(t.is_finite() && t > 0.0) {
                return Err(CompassError::InvalidOptions("t_max must be positive".into()));
            }
        }
        if !(self.residual_eps > 0.0 && self.residual_eps < 1.0) {
            return Err(CompassError::InvalidOptions("residual_eps must lie in (0, 1)".into()));
        }
        if self.trajectory_stride == 0 {
            return Err(CompassError::InvalidOptions("trajectory_stride must be at least 1".into()));
        }
        if self.rf_phase_samples == 0 || (self.rf_phase_samples > 1 && self.rf_phase_samples < 8) {
            return Err(CompassError::InvalidOptions(
                "rf_phase_samples must be 1 (off) or at least 8".into(),
            ));
        }
        Ok(())
    }

    /// Requires `dt ≤ 1/(20·ν_max)`.
    pub fn check_resolution(&self, m: &ModelSpec, f: &FieldSpec, consts: &PhysicalConstants) -> Result<()> {
        let nu = fastest_frequency(m, f, consts);
        if nu > 0.0 && self.dt > 1.0 / (20.0 * nu) {
            return Err(CompassError::InvalidOptions(format!(
                "dt = {:.3e} s does not resolve ν_max = {:.4e} Hz (need dt ≤ {:.3e} s)",
                self.dt,
                nu,
                1.0 / (20.0 * nu)
            )));
        }
        Ok(())
    }
}

/// Largest of the hyperfine, Zeeman and rf frequencies, in Hz. Each
/// coupling term `c·σσ` or `c·σ` contributes its level splitting `2c/h`.
pub fn fastest_frequency(m: &ModelSpec, f: &FieldSpec, consts: &PhysicalConstants) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut nu: f64 = 0.0;
    for n in &m.nuclei {
        let a = n.matrix();
        let amax = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
        nu = nu.max(2.0 * consts.mev_to_angular(amax) / two_pi);
    }
    let b_peak: Vec<f64> = {
        let s = f.static_vector();
        let r = f.rf_vector();
        (0..3).map(|i| s[i].abs() + r[i].abs()).collect()
    };
    for g in [m.g1.components(), m.g2.components()] {
        let norm = (0..3).map(|i| (g[i] * b_peak[i]).powi(2)).sum::<f64>().sqrt();
        let split = consts.mev_to_angular(consts.bohr_magneton * norm);
        nu = nu.max(split / two_pi);
    }
    if f.has_rf() {
        nu = nu.max(f.omega / two_pi);
    }
    nu
}

/// Sampled evolution. Scalar series are recorded every
/// `trajectory_stride` steps; `states` only when `store_trajectory` is set.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub shelf_s: Vec<f64>,
    pub shelf_t: Vec<f64>,
    /// Singlet probability of the (unnormalized) spin block.
    pub singlet: Vec<f64>,
    pub final_state: DensityMatrix,
    /// Largest `|tr ρ − 1|` over the recorded samples.
    pub max_trace_error: f64,
    /// Smallest spin-block eigenvalue seen at the positivity checks.
    pub min_eigenvalue: f64,
    pub residual: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn phi_s(&self) -> f64 {
        self.final_state.shelf_s()
    }

    pub fn phi_t(&self) -> f64 {
        self.final_state.shelf_t()
    }

    /// True if neither shelf population ever decreases between samples.
    pub fn shelves_monotone(&self, tol: f64) -> bool {
        let mono = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0] - tol);
        mono(&self.shelf_s) && mono(&self.shelf_t)
    }
}

struct Recorder {
    traj_times: Vec<f64>,
    states: Vec<DensityMatrix>,
    shelf_s: Vec<f64>,
    shelf_t: Vec<f64>,
    singlet: Vec<f64>,
    max_trace_error: f64,
    min_eigenvalue: f64,
    singlet_w: Vec<C64>,
    initial_trace: f64,
}

impl Recorder {
    fn record(&mut self, g: &CompiledGenerator, t: f64, x: &[C64], store: bool) -> Result<()> {
        let d = g.d_spin();
        let dd = d * d;
        let spin_tr: f64 = (0..d).map(|i| x[i * d + i].re).sum();
        let s = x[dd].re;
        let tt = x[dd + 1].re;
        self.traj_times.push(t);
        self.shelf_s.push(s);
        self.shelf_t.push(tt);
        let singlet: f64 = self
            .singlet_w
            .iter()
            .zip(&x[..dd])
            .fold(ZERO, |acc, (w, v)| acc + w * v)
            .re;
        self.singlet.push(singlet);
        self.max_trace_error = self
            .max_trace_error
            .max((spin_tr + s + tt - self.initial_trace).abs());
        if store {
            let rho = g.unpack(x);
            self.check_positivity(t, &rho.spin_block())?;
            self.states.push(rho);
        }
        Ok(())
    }

    fn check_positivity(&mut self, t: f64, block: &Operator) -> Result<()> {
        let min = hermitian_eigenvalues(block).first().copied().unwrap_or(0.0);
        self.min_eigenvalue = self.min_eigenvalue.min(min);
        if min < POSITIVITY_ABORT {
            return Err(CompassError::PositivityViolation {
                time: t,
                min_eigenvalue: min,
            });
        }
        Ok(())
    }
}

/// Integrates the master equation of `m` in field `f` from `rho0`.
///
/// Stops at `t_max` or as soon as the unabsorbed population falls below
/// `residual_eps`. With decay enabled, reaching `t_max` above the threshold
/// is an error; with decay disabled the run always ends at `t_max`.
pub fn evolve(
    rho0: &DensityMatrix,
    m: &ModelSpec,
    f: &FieldSpec,
    opts: &SolverOptions,
    flags: ChannelFlags,
    consts: &PhysicalConstants,
) -> Result<Trajectory> {
    opts.validate()?;
    let g = CompiledGenerator::from_model(m, f, flags, consts)?;
    if opts.method == Method::Rk4Fixed {
        opts.check_resolution(m, f, consts)?;
    }
    let t_max = opts.t_max_for(m.k);
    let mut x = g.pack(rho0)?;
    let n = x.len();
    let dd = n - 2;
    let initial_trace = rho0.trace().re;
    let mut rec = Recorder {
        traj_times: Vec::new(),
        states: Vec::new(),
        shelf_s: Vec::new(),
        shelf_t: Vec::new(),
        singlet: Vec::new(),
        max_trace_error: 0.0,
        min_eigenvalue: f64::INFINITY,
        singlet_w: singlet_functional(m.d_spin()),
        initial_trace,
    };
    rec.record(&g, 0.0, &x, opts.store_trajectory)?;
    rec.check_positivity(0.0, &rho0.spin_block())?;

    let (mut stepper, dt) = Stepper::new(&g, opts.method, opts.dt);
    let total_steps = (t_max / dt).ceil() as usize;
    let mut steps = 0;
    let mut residual = initial_trace;
    while steps < total_steps {
        let t = steps as f64 * dt;
        stepper.step(&g, steps, t, &mut x);
        steps += 1;
        let t_new = steps as f64 * dt;
        residual = initial_trace - (x[dd].re + x[dd + 1].re);
        let converged = flags.decay && residual < opts.residual_eps;
        let last = converged || steps == total_steps;
        if steps % opts.trajectory_stride == 0 || last {
            rec.record(&g, t_new, &x, opts.store_trajectory)?;
        }
        if !opts.store_trajectory && (steps % POSITIVITY_INTERVAL == 0 || last) {
            let rho = g.unpack(&x);
            rec.check_positivity(t_new, &rho.spin_block())?;
        }
        if converged {
            break;
        }
    }
    if flags.decay && residual >= opts.residual_eps {
        return Err(CompassError::NonConvergence { residual, t_max });
    }
    Ok(Trajectory {
        times: rec.traj_times,
        states: rec.states,
        shelf_s: rec.shelf_s,
        shelf_t: rec.shelf_t,
        singlet: rec.singlet,
        final_state: g.unpack(&x),
        max_trace_error: rec.max_trace_error,
        min_eigenvalue: rec.min_eigenvalue,
        residual,
        steps,
    })
}

enum Stepper {
    Rk4 {
        dt: f64,
        k: [Vec<C64>; 4],
        tmp: Vec<C64>,
    },
    ExpmStatic {
        prop: Operator,
        tmp: Vec<C64>,
    },
    /// One propagator per slot of the rf period, used cyclically.
    ExpmPeriodic {
        maps: Vec<Operator>,
        tmp: Vec<C64>,
    },
}

impl Stepper {
    /// Returns the stepper and the step it actually takes.
    fn new(g: &CompiledGenerator, method: Method, dt: f64) -> (Self, f64) {
        let n = g.state_len();
        match (method, g.rf_omega()) {
            (Method::Rk4Fixed, _) => (
                Stepper::Rk4 {
                    dt,
                    k: std::array::from_fn(|_| vec![ZERO; n]),
                    tmp: vec![ZERO; n],
                },
                dt,
            ),
            (Method::ExpmPiecewise, None) => (
                Stepper::ExpmStatic {
                    prop: g.dense_at(0.0).scale(dt).exp(),
                    tmp: vec![ZERO; n],
                },
                dt,
            ),
            (Method::ExpmPiecewise, Some(omega)) => {
                let period = 2.0 * std::f64::consts::PI / omega;
                let slots = slots_per_period(period, dt);
                let h = period / slots as f64;
                let (g0, g1) = g.dense_parts();
                let g1 = g1.expect("time-dependent generator has an rf part");
                let maps = (0..slots)
                    .map(|j| {
                        let betas = cf4_coefficients(|t| g.modulation(t), j as f64 * h, h);
                        slot_map(&g0, &g1, betas, h)
                    })
                    .collect();
                (
                    Stepper::ExpmPeriodic {
                        maps,
                        tmp: vec![ZERO; n],
                    },
                    h,
                )
            }
        }
    }

    fn step(&mut self, g: &CompiledGenerator, index: usize, t: f64, x: &mut [C64]) {
        match self {
            Stepper::Rk4 { dt, k, tmp } => {
                let h = *dt;
                let [k1, k2, k3, k4] = k;
                g.apply(t, x, k1);
                axpy_into(tmp, x, 0.5 * h, k1);
                g.apply(t + 0.5 * h, tmp, k2);
                axpy_into(tmp, x, 0.5 * h, k2);
                g.apply(t + 0.5 * h, tmp, k3);
                axpy_into(tmp, x, h, k3);
                g.apply(t + h, tmp, k4);
                let w = h / 6.0;
                for i in 0..x.len() {
                    x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
                }
            }
            Stepper::ExpmStatic { prop, tmp } => dense_apply(prop, x, tmp),
            Stepper::ExpmPeriodic { maps, tmp } => {
                let m = &maps[index % maps.len()];
                dense_apply(m, x, tmp);
            }
        }
    }
}

/// `out = x + a·v`.
#[inline]
fn axpy_into(out: &mut [C64], x: &[C64], a: f64, v: &[C64]) {
    for i in 0..out.len() {
        out[i] = x[i] + v[i] * a;
    }
}

fn dense_apply(m: &Operator, x: &mut [C64], tmp: &mut [C64]) {
    let n = x.len();
    for (r, out) in tmp.iter_mut().enumerate().take(n) {
        let mut acc = ZERO;
        for c in 0..n {
            acc += m[(r, c)] * x[c];
        }
        *out = acc;
    }
    x.copy_from_slice(&tmp[..n]);
}
