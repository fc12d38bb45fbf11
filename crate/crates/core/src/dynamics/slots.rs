//! Exponential stepping over slots that tile one rf period.
//!
//! Each slot uses the fourth-order commutator-free Magnus rule with two
//! Gauss–Legendre nodes:
//!
//! `x(t+h) = exp(h(a₁A₁ + a₂A₂)) · exp(h(a₂A₁ + a₁A₂)) · x(t)`,
//! `A_i = G(t + c_i h)`, `c_{1,2} = ½ ∓ √3/6`, `a_{1,2} = (3 ∓ 2√3)/12`.
//!
//! With `G(t) = G₀ + cos(ωt + φ)·G₁` both exponents are `h(½G₀ + β G₁)`,
//! which is itself a Lindblad generator (the rf term is Hamiltonian, so its
//! sign does not matter). Every factor is therefore an exact completely
//! positive, trace-preserving map and the stiff static part is never
//! approximated.

use crate::linalg::Operator;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Minimum number of slots per period.
pub const MIN_SLOTS: usize = 16;

/// Number of slots per period so that the slot width does not exceed `dt`.
pub fn slots_per_period(period: f64, dt: f64) -> usize {
    ((period / dt).ceil() as usize).max(MIN_SLOTS)
}

/// Rf coefficients `(β_first, β_second)` of the two exponentials for the
/// slot `[t, t + h]`; `β_first` belongs to the factor applied first.
pub fn cf4_coefficients(modulation: impl Fn(f64) -> f64, t: f64, h: f64) -> (f64, f64) {
    let c1 = 0.5 - SQRT3 / 6.0;
    let c2 = 0.5 + SQRT3 / 6.0;
    let a1 = (3.0 - 2.0 * SQRT3) / 12.0;
    let a2 = (3.0 + 2.0 * SQRT3) / 12.0;
    let m1 = modulation(t + c1 * h);
    let m2 = modulation(t + c2 * h);
    (a2 * m1 + a1 * m2, a1 * m1 + a2 * m2)
}

/// One-slot propagator of `G(t) = g0 + modulation(t)·g1`.
pub fn slot_map(g0: &Operator, g1: &Operator, betas: (f64, f64), h: f64) -> Operator {
    let half = g0.scale(0.5 * h);
    let first = (&half + g1.scale(betas.0 * h)).exp();
    let second = (&half + g1.scale(betas.1 * h)).exp();
    second * first
}
