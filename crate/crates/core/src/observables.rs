//! Singlet probability, the yield integral, negativity and sweep metrics.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{CompassError, Result};
use crate::linalg::{Operator, C64, ZERO};
use crate::spin::singlet_triplet_states;
use crate::state::DensityMatrix;

/// Row-major weights `w` with `Σ_ij w_ij ρ_ij = Σ_n ⟨s,n|ρ|s,n⟩`.
pub fn singlet_functional(d_spin: usize) -> Vec<C64> {
    let [s, ..] = singlet_triplet_states();
    projector_functional(d_spin, &[&s])
}

/// Same as [`singlet_functional`] for the three triplet states combined.
pub fn triplet_functional(d_spin: usize) -> Vec<C64> {
    let [_, t0, tp, tm] = singlet_triplet_states();
    projector_functional(d_spin, &[&t0, &tp, &tm])
}

fn projector_functional(d_spin: usize, states: &[&crate::linalg::StateVector]) -> Vec<C64> {
    // Π = I_nuc ⊗ Σ|e⟩⟨e|;  tr(Π ρ) = Σ_ij Π_ji ρ_ij
    let d_nuc = d_spin / 4;
    let mut w = vec![ZERO; d_spin * d_spin];
    for n in 0..d_nuc {
        for e in states {
            for a in 0..4 {
                for b in 0..4 {
                    let i = n * 4 + a;
                    let j = n * 4 + b;
                    // Π_ji = e_j conj(e_i)
                    w[i * d_spin + j] += e[b] * e[a].conj();
                }
            }
        }
    }
    w
}

/// `⟨s| Tr_n ρ_spin |s⟩`; the shelves are ignored and the spin block is not
/// renormalized.
pub fn singlet_probability(rho: &DensityMatrix) -> f64 {
    let d = rho.d_spin();
    let w = singlet_functional(d);
    let e = rho.entries();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += w[i * d + j] * e[(i, j)];
        }
    }
    acc.re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralMode {
    /// The trajectory was run without decay; weight the singlet
    /// probability by `k e^{−kt}`.
    DecayFree,
    /// The trajectory includes the shelving decay; integrate `k·p_s(t)`.
    FullMasterEquation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldIntegral {
    pub value: f64,
    /// Upper bound on the part of the integral beyond the last sample.
    pub tail_bound: f64,
}

/// `Φ = ∫₀^∞ ⟨s|Tr_n ρ(t)|s⟩ k e^{−kt} dt` from sampled singlet
/// probabilities. The samples are interpolated linearly and the
/// exponential weight is integrated exactly on each interval, so a
/// constant integrand gives `1 − e^{−k t_last}` exactly.
pub fn yield_integral(traj: &Trajectory, k: f64, mode: IntegralMode, tail_tolerance: f64) -> Result<YieldIntegral> {
    let t = &traj.times;
    let s = &traj.singlet;
    if t.len() < 2 || t.len() != s.len() {
        return Err(CompassError::TrajectoryTooShort {
            tail_bound: 1.0,
            tolerance: tail_tolerance,
        });
    }
    let mut value = 0.0;
    match mode {
        IntegralMode::DecayFree => {
            for i in 0..t.len() - 1 {
                let (a, b) = (t[i], t[i + 1]);
                let x = k * (b - a);
                let ea = (-k * a).exp();
                let w0 = ea - (-k * b).exp();
                value += s[i] * w0 + (s[i + 1] - s[i]) * ea * ramp_weight(x);
            }
        }
        IntegralMode::FullMasterEquation => {
            for i in 0..t.len() - 1 {
                value += 0.5 * k * (t[i + 1] - t[i]) * (s[i] + s[i + 1]);
            }
        }
    }
    let tail_bound = match mode {
        IntegralMode::DecayFree => (-k * t[t.len() - 1]).exp(),
        IntegralMode::FullMasterEquation => traj.final_state.spin_population().max(0.0),
    };
    if tail_bound > tail_tolerance {
        return Err(CompassError::TrajectoryTooShort {
            tail_bound,
            tolerance: tail_tolerance,
        });
    }
    Ok(YieldIntegral { value, tail_bound })
}

/// `∫₀¹ x e^{−xu} u du = (1 − e^{−x}(1 + x))/x`.
fn ramp_weight(x: f64) -> f64 {
    if x < 1e-4 {
        x / 2.0 - x * x / 3.0 + x * x * x / 8.0
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NegativityConvention {
    /// `(‖ρ^{T_A}‖₁ − tr ρ)/2`: zero on separable states.
    #[default]
    Standard,
    /// `‖ρ^{T_A}‖₁/2`, with no offset (1/2 on product states).
    HalfTraceNorm,
}

/// Relative size below which `‖ρ^{T_A}‖₁ − tr ρ` counts as zero.
const ZERO_SNAP: f64 = 1e-12;

/// Partial transpose over the last tensor slot (electron 2, dimension 2).
pub fn partial_transpose_last_qubit(block: &Operator) -> Operator {
    let d = block.nrows();
    Operator::from_fn(d, d, |r, c| {
        let (a, mu) = (r / 2, r % 2);
        let (b, nu) = (c / 2, c % 2);
        block[(a * 2 + nu, b * 2 + mu)]
    })
}

/// Sum of singular values.
pub fn trace_norm(m: &Operator) -> f64 {
    m.singular_values().iter().sum()
}

/// Negativity across electron 2 versus electron 1 plus nuclei, computed on
/// the spin block with the shelves dropped. `renormalize` divides the block
/// by its trace first (conditioning on survival).
pub fn negativity_of_block(block: &Operator, convention: NegativityConvention, renormalize: bool) -> f64 {
    let tr = block.trace().re;
    let block = if renormalize && tr > 0.0 {
        block.scale(1.0 / tr)
    } else {
        block.clone()
    };
    let tr = block.trace().re;
    let norm = trace_norm(&partial_transpose_last_qubit(&block));
    match convention {
        NegativityConvention::Standard => {
            // the SVD leaves ‖·‖₁ − tr at rounding level for PPT states
            let excess = norm - tr;
            if excess <= ZERO_SNAP * norm {
                0.0
            } else {
                excess / 2.0
            }
        }
        NegativityConvention::HalfTraceNorm => norm / 2.0,
    }
}

/// Negativity of the unnormalized spin block of `rho`.
pub fn negativity(rho: &DensityMatrix, convention: NegativityConvention) -> f64 {
    negativity_of_block(&rho.spin_block(), convention, false)
}

/// Which yield route produced a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YieldMethod {
    Direct,
    Periodic,
    Integrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMeta {
    pub method: YieldMethod,
    /// Unabsorbed population left when the yield was read off (zero for the
    /// closed-form routes).
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldPoint {
    pub theta: f64,
    pub phi_s: f64,
    pub phi_t: f64,
    pub meta: PointMeta,
}

/// `max φ_s − min φ_s`.
pub fn contrast(points: &[YieldPoint]) -> Result<f64> {
    if points.is_empty() {
        return Err(CompassError::EmptySweep);
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.phi_s), hi.max(p.phi_s)));
    Ok(hi - lo)
}

/// `max_θ |φ_s,on − φ_s,off|` over identical angle grids.
pub fn rf_disruption(off: &[YieldPoint], on: &[YieldPoint]) -> Result<f64> {
    if off.is_empty() || on.is_empty() {
        return Err(CompassError::EmptySweep);
    }
    if off.len() != on.len() || off.iter().zip(on).any(|(a, b)| a.theta != b.theta) {
        return Err(CompassError::GridMismatch);
    }
    Ok(off
        .iter()
        .zip(on)
        .map(|(a, b)| (a.phi_s - b.phi_s).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::channels::pad_shelves;
    use crate::linalg::{identity, kron, outer};
    use crate::spin::{initial_state, ModelSpec};
    use crate::state::InitialKind;

    fn point(theta: f64, phi_s: f64) -> YieldPoint {
        YieldPoint {
            theta,
            phi_s,
            phi_t: 1.0 - phi_s,
            meta: PointMeta {
                method: YieldMethod::Direct,
                residual: 0.0,
            },
        }
    }

    #[test]
    fn singlet_probability_of_prepared_states() {
        let m = ModelSpec::cigar(1e4);
        let s = initial_state(&m, InitialKind::Singlet).unwrap();
        assert!((singlet_probability(&s) - 1.0).abs() < 1e-15);
        let d = initial_state(&m, InitialKind::Dephased).unwrap();
        assert!((singlet_probability(&d) - 0.5).abs() < 1e-15);
        let [_, _, tp, _] = singlet_triplet_states();
        let rho = kron(&identity(2).scale(0.5), &outer(&tp, &tp));
        let rho = DensityMatrix::new(8, pad_shelves(&rho)).unwrap();
        assert!(singlet_probability(&rho).abs() < 1e-15);
    }

    #[test]
    fn singlet_and_triplet_functionals_are_complete() {
        for d in [4, 8, 16] {
            let s = singlet_functional(d);
            let t = triplet_functional(d);
            for i in 0..d {
                for j in 0..d {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((s[i * d + j] + t[i * d + j] - C64::new(expect, 0.0)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn negativity_of_initial_states() {
        // PT spectrum of the singlet ⊗ I/2 is {¼ ×6, −¼ ×2}; the oracle is
        // the dense Hermitian eigensolver.
        let m = ModelSpec::cigar(1e4);
        let rho = initial_state(&m, InitialKind::Singlet).unwrap();
        let pt = partial_transpose_last_qubit(&rho.spin_block());
        let mut ev = crate::linalg::hermitian_eigenvalues(&pt);
        ev.sort_by(|a, b| a.total_cmp(b));
        for (i, v) in ev.iter().enumerate() {
            let want = if i < 2 { -0.25 } else { 0.25 };
            assert!((v - want).abs() < 1e-14, "{ev:?}");
        }
        assert!((negativity(&rho, NegativityConvention::Standard) - 0.5).abs() < 1e-12);
        assert!((negativity(&rho, NegativityConvention::HalfTraceNorm) - 1.0).abs() < 1e-12);
        let deph = initial_state(&m, InitialKind::Dephased).unwrap();
        assert!(negativity(&deph, NegativityConvention::Standard) < 1e-14);
    }

    #[test]
    fn renormalized_negativity_ignores_survival_weight() {
        let m = ModelSpec::cigar(1e4);
        let block = initial_state(&m, InitialKind::Singlet).unwrap().spin_block().scale(0.3);
        let raw = negativity_of_block(&block, NegativityConvention::Standard, false);
        let cond = negativity_of_block(&block, NegativityConvention::Standard, true);
        assert!((raw - 0.15).abs() < 1e-12);
        assert!((cond - 0.5).abs() < 1e-12);
    }

    #[test]
    fn contrast_and_disruption() {
        assert_eq!(contrast(&[]), Err(CompassError::EmptySweep));
        assert_eq!(contrast(&[point(0.0, 0.3), point(0.1, 0.3)]).unwrap(), 0.0);
        assert!((contrast(&[point(0.0, 0.4), point(0.1, 0.5)]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(contrast(&[point(0.0, 0.4)]).unwrap(), 0.0);

        let a = [point(0.0, 0.4), point(0.5, 0.6)];
        assert_eq!(rf_disruption(&a, &a).unwrap(), 0.0);
        let b = [point(0.0, 0.35), point(0.5, 0.62)];
        assert!((rf_disruption(&a, &b).unwrap() - 0.05).abs() < 1e-15);
        let c = [point(0.0, 0.35), point(0.6, 0.62)];
        assert_eq!(rf_disruption(&a, &c), Err(CompassError::GridMismatch));
        assert_eq!(rf_disruption(&a, &b[..1]), Err(CompassError::GridMismatch));
    }

    #[test]
    fn ramp_weight_series_matches_closed_form() {
        for x in [1e-3, 1e-2, 0.3, 2.0] {
            let closed = (1.0 - (-x as f64).exp() * (1.0 + x)) / x;
            assert!((ramp_weight(x) - closed).abs() < 1e-12);
        }
        let x = 5e-5;
        let closed = (1.0 - (-x as f64).exp() * (1.0 + x)) / x;
        assert!((ramp_weight(x) - closed).abs() < 1e-9);
    }
}
