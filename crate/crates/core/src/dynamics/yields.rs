//! Asymptotic shelf populations without stepping to t → ∞.
//!
//! * Static field: one linear solve for the time-integrated spin block,
//!   `∫₀^∞ ρ dt = −G_spin⁻¹ ρ(0)`, contracted with the shelving rates.
//! * Oscillating field: the dynamics is periodic apart from the decay, so
//!   one period of propagation determines the yields as a geometric series
//!   over periods. Noise-free runs use the Hilbert-space Floquet operator;
//!   with noise the packed generator is propagated instead.

use serde::{Deserialize, Serialize};

use crate::error::{CompassError, Result};
use crate::linalg::{hermitian_eigh, identity, kron, outer, unitary_exp, Operator, StateVector, C64, ZERO};
use crate::spin::{
    hamiltonian, initial_state, singlet_triplet_states, zeeman_hamiltonian, FieldSpec, ModelSpec, PhysicalConstants,
};
use crate::state::InitialKind;

use super::channels::ChannelFlags;
use super::evolve::SolverOptions;
use super::generator::CompiledGenerator;
use super::slots::{cf4_coefficients, slot_map, slots_per_period};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldPair {
    pub phi_s: f64,
    pub phi_t: f64,
}

impl YieldPair {
    pub fn total(&self) -> f64 {
        self.phi_s + self.phi_t
    }
}

/// Static-field yields from the vectorized generator restricted to the spin
/// space.
pub fn yield_direct(
    m: &ModelSpec,
    f: &FieldSpec,
    kind: InitialKind,
    flags: ChannelFlags,
    consts: &PhysicalConstants,
) -> Result<YieldPair> {
    if f.has_rf() {
        return Err(CompassError::TimeDependentField);
    }
    if !flags.decay {
        return Err(CompassError::SingularSystem("decay channels disabled".into()));
    }
    let g = CompiledGenerator::from_model(m, f, flags, consts)?;
    let rho0 = initial_state(m, kind)?;
    let x0 = g.pack(&rho0)?;
    let dd = g.state_len() - 2;
    let a = g.spin_block_static_dense();
    let rhs = StateVector::from_iterator(dd, x0[..dd].iter().map(|z| -z));
    let z = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| CompassError::SingularSystem("spin-block generator".into()))?;
    if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(CompassError::SingularSystem("non-finite solution".into()));
    }
    let (ws, wt) = g.shelf_functionals();
    let contract = |w: &[C64]| w.iter().zip(z.iter()).fold(ZERO, |acc, (a, b)| acc + a * b).re;
    Ok(YieldPair {
        phi_s: x0[dd].re + contract(ws),
        phi_t: x0[dd + 1].re + contract(wt),
    })
}

/// Per-slot schedule of one rf period.
struct PeriodGrid {
    period: f64,
    slots: usize,
    h: f64,
}

impl PeriodGrid {
    fn new(f: &FieldSpec, dt: f64) -> Self {
        let period = f.period();
        let slots = slots_per_period(period, dt);
        Self {
            period,
            slots,
            h: period / slots as f64,
        }
    }
}

fn check_rates(f: &FieldSpec, ks: &[f64]) -> Result<()> {
    if !f.has_rf() {
        return Err(CompassError::InvalidParameter {
            name: "b_rf".into(),
            reason: "the periodic path needs an oscillating field".into(),
        });
    }
    if ks.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(CompassError::InvalidParameter {
            name: "k".into(),
            reason: "decay rate must be positive".into(),
        });
    }
    Ok(())
}

/// `∫₀^h e^{z s} ds`.
fn exp_integral(z: C64, h: f64) -> C64 {
    let zh = z * h;
    if zh.norm() < 1e-3 {
        h * (C64::new(1.0, 0.0) + zh * (0.5 + zh * (1.0 / 6.0 + zh / 24.0)))
    } else {
        (zh.exp() - 1.0) / z
    }
}

/// Yields in an oscillating field without noise channels, computed on the
/// Hilbert space.
///
/// The slot propagators `U_j` of `H(t)` are built with the commutator-free
/// Magnus rule, giving the Floquet operator `F = U(T)`. Within a slot the
/// Hamiltonian is frozen at the slot midpoint and the weighted integral of
/// `U(τ)†PU(τ)` is done in closed form in its eigenbasis. Summing the
/// geometric series over periods reduces to `X − e^{−kT} F X F† = ρ(0)`,
/// and `Φ = tr(W X)` with `W = k∫₀^T e^{−kτ} U(τ)†PU(τ) dτ`.
pub fn coherent_floquet_yields(
    m: &ModelSpec,
    f: &FieldSpec,
    kind: InitialKind,
    dt: f64,
    ks: &[f64],
    consts: &PhysicalConstants,
) -> Result<Vec<YieldPair>> {
    check_rates(f, ks)?;
    m.validate()?;
    f.validate()?;
    let d = m.d_spin();
    let h_static = hamiltonian(m, f.static_vector(), consts)?;
    let h_rf = zeeman_hamiltonian(m, f.rf_vector(), consts)?;
    let modulation = |t: f64| f.rf_modulation(t);
    let grid = PeriodGrid::new(f, dt);
    let h = grid.h;

    let [s, ..] = singlet_triplet_states();
    let p_s = kron(&identity(d / 4), &outer(&s, &s));
    let p_t = identity(d) - &p_s;

    let mut u = identity(d);
    let mut ws = vec![Operator::zeros(d, d); ks.len()];
    let mut wt = vec![Operator::zeros(d, d); ks.len()];
    for j in 0..grid.slots {
        let t = j as f64 * h;
        let frozen = &h_static + h_rf.scale(modulation(t + 0.5 * h));
        let (e, q) = hermitian_eigh(&frozen);
        let qd = q.adjoint();
        let ps_t = &qd * &p_s * &q;
        let pt_t = &qd * &p_t * &q;
        let ud = u.adjoint();
        for (ki, &k) in ks.iter().enumerate() {
            let integral = Operator::from_fn(d, d, |a, b| exp_integral(C64::new(-k, e[a] - e[b]), h));
            let scale = k * (-k * t).exp();
            let ks_ = &q * ps_t.component_mul(&integral) * &qd;
            let kt_ = &q * pt_t.component_mul(&integral) * &qd;
            ws[ki] += (&ud * ks_ * &u).scale(scale);
            wt[ki] += (&ud * kt_ * &u).scale(scale);
        }
        let (b1, b2) = cf4_coefficients(modulation, t, h);
        let first = unitary_exp(&(h_static.scale(0.5) + h_rf.scale(b1)), h);
        let second = unitary_exp(&(h_static.scale(0.5) + h_rf.scale(b2)), h);
        u = second * first * u;
    }

    let rho0 = initial_state(m, kind)?.spin_block();
    let fbar = u.map(|z| z.conj());
    let ff = kron(&u, &fbar);
    let rhs = StateVector::from_iterator(d * d, (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| rho0[(i, j)]));
    let mut out = Vec::with_capacity(ks.len());
    for (ki, &k) in ks.iter().enumerate() {
        let a = identity(d * d) - ff.scale((-k * grid.period).exp());
        let x = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| CompassError::SingularSystem("Floquet series".into()))?;
        let trace_with = |w: &Operator| {
            let mut acc = ZERO;
            for i in 0..d {
                for j in 0..d {
                    acc += w[(i, j)] * x[j * d + i];
                }
            }
            acc.re
        };
        out.push(YieldPair {
            phi_s: trace_with(&ws[ki]),
            phi_t: trace_with(&wt[ki]),
        });
    }
    Ok(out)
}

/// Yields in an oscillating field with arbitrary channels, from the
/// one-period propagator of the full packed generator (shelves included).
///
/// The period map has the block form `[[A, 0], [R, I]]`; the shelves end at
/// `p(0) + R (I − A)⁻¹ x(0)`. The map depends on `k`, so each rate costs one
/// period of slot exponentials.
pub fn dissipative_floquet_yields(
    m: &ModelSpec,
    f: &FieldSpec,
    kind: InitialKind,
    flags: ChannelFlags,
    dt: f64,
    ks: &[f64],
    consts: &PhysicalConstants,
) -> Result<Vec<YieldPair>> {
    check_rates(f, ks)?;
    if !flags.decay {
        return Err(CompassError::SingularSystem("decay channels disabled".into()));
    }
    let grid = PeriodGrid::new(f, dt);
    let h = grid.h;
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let mk = ModelSpec { k, ..m.clone() };
        let g = CompiledGenerator::from_model(&mk, f, flags, consts)?;
        let x0 = g.pack(&initial_state(&mk, kind)?)?;
        let n = g.state_len();
        let dd = n - 2;
        let (g0, g1) = g.dense_parts();
        let g1 = g1.expect("time-dependent generator has an rf part");
        let mut p = identity(n);
        for j in 0..grid.slots {
            let betas = cf4_coefficients(|t| g.modulation(t), j as f64 * h, h);
            p = slot_map(&g0, &g1, betas, h) * p;
        }
        let a = identity(dd) - p.view((0, 0), (dd, dd));
        let rhs = StateVector::from_column_slice(&x0[..dd]);
        let z = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| CompassError::SingularSystem("period map".into()))?;
        let r = p.view((dd, 0), (2, dd));
        let shelves = r * z;
        out.push(YieldPair {
            phi_s: x0[dd].re + shelves[0].re,
            phi_t: x0[dd + 1].re + shelves[1].re,
        });
    }
    Ok(out)
}

/// Yields in an oscillating field for each decay rate in `ks` (the model's
/// own `k` is ignored). Noise rates are taken from `m` unchanged. Without
/// active noise channels the Hilbert-space route is used, otherwise the
/// packed generator. Averages over `opts.rf_phase_samples` uniformly spaced
/// rf phases when above one.
pub fn periodic_yields(
    m: &ModelSpec,
    f: &FieldSpec,
    kind: InitialKind,
    flags: ChannelFlags,
    opts: &SolverOptions,
    ks: &[f64],
    consts: &PhysicalConstants,
) -> Result<Vec<YieldPair>> {
    opts.validate()?;
    if !flags.decay {
        return Err(CompassError::SingularSystem("decay channels disabled".into()));
    }
    let noisy = (flags.generic_noise && m.gamma_noise > 0.0) || (flags.dephasing && m.gamma_z > 0.0);
    let samples = opts.rf_phase_samples;
    let mut acc = vec![YieldPair { phi_s: 0.0, phi_t: 0.0 }; ks.len()];
    for j in 0..samples {
        let phase = f.rf_phase + 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
        let fj = FieldSpec { rf_phase: phase, ..*f };
        let ys = if noisy {
            dissipative_floquet_yields(m, &fj, kind, flags, opts.dt, ks, consts)?
        } else {
            coherent_floquet_yields(m, &fj, kind, opts.dt, ks, consts)?
        };
        for (a, y) in acc.iter_mut().zip(ys) {
            a.phi_s += y.phi_s / samples as f64;
            a.phi_t += y.phi_t / samples as f64;
        }
    }
    Ok(acc)
}
