//! Master-equation generator: the dense right-hand side and a compiled
//! vectorized form used by the integrators.
//!
//! The compiled form acts on `x = [vec(ρ_spin); p_S; p_T]` where `vec` is
//! row-major (`ρ_ij → x[i·d + j]`). Shelf/spin coherences are never
//! generated from a block-diagonal start, so they are not carried.

use crate::error::{CompassError, Result};
use crate::linalg::{identity, CsrMatrix, Operator, C64, I, ZERO};
use crate::spin::{field_at, hamiltonian, zeeman_hamiltonian, FieldSpec, ModelSpec, PhysicalConstants};
use crate::state::DensityMatrix;

use super::channels::{build_channels, pad_shelves, ChannelFlags, ChannelSet};

/// `L ρ L† − ½{L†L, ρ}` (unit rate).
pub fn dissipator(l: &Operator, rho: &Operator) -> Operator {
    let ld = l.adjoint();
    let ldl = &ld * l;
    l * rho * &ld - (&ldl * rho + rho * &ldl).scale(0.5)
}

/// `−i[H, ρ] + Σ_c rate_c (L_c ρ L_c† − ½{L_c†L_c, ρ})` on the full space.
/// `h` must be `dim × dim` (zero on the shelf rows and columns), or
/// `d_spin × d_spin`, in which case it is zero-extended.
pub fn generator_rhs(rho: &DensityMatrix, h: &Operator, channels: &ChannelSet) -> Result<Operator> {
    let d = rho.dim();
    if channels.dim() != d {
        return Err(CompassError::DimensionMismatch {
            expected: d,
            got: channels.dim(),
        });
    }
    let h_full;
    let h = if h.nrows() == rho.d_spin() {
        h_full = pad_shelves(h);
        &h_full
    } else if h.nrows() == d {
        h
    } else {
        return Err(CompassError::DimensionMismatch {
            expected: d,
            got: h.nrows(),
        });
    };
    let r = rho.entries();
    let mut out = (h * r - r * h).map(|z| -I * z);
    for c in channels {
        if c.rate != 0.0 {
            out += dissipator(&c.operator, r).scale(c.rate);
        }
    }
    Ok(out)
}

/// Superoperator of `ρ ↦ A ρ B` in row-major vectorization.
fn sandwich(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(&b.transpose())
}

fn commutator_super(h: &Operator) -> Operator {
    let id = identity(h.nrows());
    (sandwich(h, &id) - sandwich(&id, h)).map(|z| -I * z)
}

#[derive(Debug, Clone)]
struct RfTerm {
    op: CsrMatrix,
    omega: f64,
    phase: f64,
}

/// Vectorized master-equation generator `ẋ = G(t) x`.
#[derive(Debug, Clone)]
pub struct CompiledGenerator {
    d_spin: usize,
    /// Decay-free spin-block part: static coherent term plus spin channels.
    static_part: CsrMatrix,
    rf: Option<RfTerm>,
    /// `−½{Σ rate P†P, ·}` from the shelving channels.
    drain: CsrMatrix,
    shelf_s: Vec<C64>,
    shelf_t: Vec<C64>,
    uniform_decay: Option<f64>,
}

impl CompiledGenerator {
    /// `h_static` is on the spin space; `rf` is `(H_rf, ω, phase)` with the
    /// time-dependent part `cos(ωt + phase)·H_rf`.
    pub fn compile(
        h_static: &Operator,
        rf: Option<(&Operator, f64, f64)>,
        channels: &ChannelSet,
    ) -> Result<Self> {
        let d = channels.d_spin();
        if h_static.nrows() != d {
            return Err(CompassError::DimensionMismatch {
                expected: d,
                got: h_static.nrows(),
            });
        }
        let dd = d * d;
        let mut static_dense = commutator_super(h_static);
        let mut drain_dense = Operator::zeros(dd, dd);
        let mut drain_op = Operator::zeros(d, d);
        let mut shelf_s = vec![ZERO; dd];
        let mut shelf_t = vec![ZERO; dd];
        let id = identity(d);

        for c in channels {
            if c.rate == 0.0 {
                continue;
            }
            let op = &c.operator;
            let spin = op.view((0, 0), (d, d)).into_owned();
            let to_shelf = op.view((d, 0), (2, d)).into_owned();
            let from_shelf = op.view((0, d), (d + 2, 2));
            if from_shelf.iter().any(|z| *z != ZERO) {
                return Err(CompassError::UnsupportedChannel(c.label.clone()));
            }
            let shelf_rows: Vec<usize> = (0..2)
                .filter(|&r| to_shelf.row(r).iter().any(|z| *z != ZERO))
                .collect();
            match shelf_rows.as_slice() {
                [] => {
                    let ldl = spin.adjoint() * &spin;
                    let term = sandwich(&spin, &spin.adjoint())
                        - (sandwich(&ldl, &id) + sandwich(&id, &ldl)).scale(0.5);
                    static_dense += term.scale(c.rate);
                }
                [row] if spin.iter().all(|z| *z == ZERO) => {
                    let p = to_shelf.row(*row);
                    let target = if *row == 0 { &mut shelf_s } else { &mut shelf_t };
                    for i in 0..d {
                        for j in 0..d {
                            target[i * d + j] += p[i] * p[j].conj() * c.rate;
                        }
                    }
                    let ptp = p.adjoint() * p;
                    drain_op += ptp.scale(c.rate);
                }
                _ => return Err(CompassError::UnsupportedChannel(c.label.clone())),
            }
        }
        if drain_op.iter().any(|z| *z != ZERO) {
            drain_dense -= (sandwich(&drain_op, &id) + sandwich(&id, &drain_op)).scale(0.5);
        }
        let uniform_decay = {
            let k = drain_op[(0, 0)].re;
            let dev = (&drain_op - id.scale(k)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            (k > 0.0 && dev <= 1e-12 * k).then_some(k)
        };
        let rf = match rf {
            Some((h_rf, omega, phase)) => {
                if h_rf.nrows() != d {
                    return Err(CompassError::DimensionMismatch {
                        expected: d,
                        got: h_rf.nrows(),
                    });
                }
                Some(RfTerm {
                    op: CsrMatrix::from_dense(&commutator_super(h_rf), 0.0),
                    omega,
                    phase,
                })
            }
            None => None,
        };
        Ok(Self {
            d_spin: d,
            static_part: CsrMatrix::from_dense(&static_dense, 0.0),
            rf,
            drain: CsrMatrix::from_dense(&drain_dense, 0.0),
            shelf_s,
            shelf_t,
            uniform_decay,
        })
    }

    /// Builds the generator of `m` in field `f` with the selected channels.
    pub fn from_model(
        m: &ModelSpec,
        f: &FieldSpec,
        flags: ChannelFlags,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        m.validate()?;
        f.validate()?;
        let channels = build_channels(m, f, flags, consts)?;
        let h_static = hamiltonian(m, f.static_vector(), consts)?;
        if f.has_rf() {
            let h_rf = zeeman_hamiltonian(m, f.rf_vector(), consts)?;
            Self::compile(&h_static, Some((&h_rf, f.omega, f.rf_phase)), &channels)
        } else {
            Self::compile(&h_static, None, &channels)
        }
    }

    pub fn d_spin(&self) -> usize {
        self.d_spin
    }

    /// Length of the packed state.
    pub fn state_len(&self) -> usize {
        self.d_spin * self.d_spin + 2
    }

    pub fn is_time_dependent(&self) -> bool {
        self.rf.is_some()
    }

    /// Common decay rate when `Σ rate·P†P = k·I` on the spin space.
    pub fn uniform_decay(&self) -> Option<f64> {
        self.uniform_decay
    }

    pub fn rf_omega(&self) -> Option<f64> {
        self.rf.as_ref().map(|r| r.omega)
    }

    pub fn modulation(&self, t: f64) -> f64 {
        self.rf
            .as_ref()
            .map_or(0.0, |r| (r.omega * t + r.phase).cos())
    }

    /// `out = G(t) x`.
    pub fn apply(&self, t: f64, x: &[C64], out: &mut [C64]) {
        let dd = self.d_spin * self.d_spin;
        let (xs, _) = x.split_at(dd);
        let (os, oh) = out.split_at_mut(dd);
        self.static_part.mul_into(xs, os);
        self.drain.mul_add(C64::new(1.0, 0.0), xs, os);
        if let Some(rf) = &self.rf {
            let c = (rf.omega * t + rf.phase).cos();
            rf.op.mul_add(C64::new(c, 0.0), xs, os);
        }
        oh[0] = dot(&self.shelf_s, xs);
        oh[1] = dot(&self.shelf_t, xs);
    }

    /// Decay-free spin-block action: `out = (L_static + c·L_rf) xs`.
    pub fn apply_decay_free(&self, modulation: f64, xs: &[C64], out: &mut [C64]) {
        self.static_part.mul_into(xs, out);
        if let Some(rf) = &self.rf {
            rf.op.mul_add(C64::new(modulation, 0.0), xs, out);
        }
    }

    /// Dense `(D+2)²` generator at time `t`.
    pub fn dense_at(&self, t: f64) -> Operator {
        self.dense_at_modulation(self.modulation(t))
    }

    /// Dense `(D+2)²` static generator and, when present, the dense rf
    /// term (zero on the shelf rows) so that `G(t) = G₀ + modulation(t)·G₁`.
    pub fn dense_parts(&self) -> (Operator, Option<Operator>) {
        let dd = self.d_spin * self.d_spin;
        let n = dd + 2;
        let g0 = self.dense_at_modulation(0.0);
        let g1 = self.rf.as_ref().map(|rf| {
            let mut g = Operator::zeros(n, n);
            g.view_mut((0, 0), (dd, dd)).copy_from(&rf.op.to_dense());
            g
        });
        (g0, g1)
    }

    fn dense_at_modulation(&self, c: f64) -> Operator {
        let dd = self.d_spin * self.d_spin;
        let n = dd + 2;
        let mut g = Operator::zeros(n, n);
        let mut block = self.static_part.to_dense() + self.drain.to_dense();
        if let Some(rf) = &self.rf {
            if c != 0.0 {
                block += rf.op.to_dense().scale(c);
            }
        }
        g.view_mut((0, 0), (dd, dd)).copy_from(&block);
        for j in 0..dd {
            g[(dd, j)] = self.shelf_s[j];
            g[(dd + 1, j)] = self.shelf_t[j];
        }
        g
    }

    /// Decay-free static spin-block superoperator (dense).
    pub fn decay_free_static_dense(&self) -> Operator {
        self.static_part.to_dense()
    }

    /// Drain plus decay-free static part (dense).
    pub fn spin_block_static_dense(&self) -> Operator {
        self.static_part.to_dense() + self.drain.to_dense()
    }

    pub fn shelf_functionals(&self) -> (&[C64], &[C64]) {
        (&self.shelf_s, &self.shelf_t)
    }

    pub fn pack(&self, rho: &DensityMatrix) -> Result<Vec<C64>> {
        if rho.d_spin() != self.d_spin {
            return Err(CompassError::DimensionMismatch {
                expected: self.d_spin,
                got: rho.d_spin(),
            });
        }
        let scale = rho.entries().iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if !rho.is_block_diagonal(1e-12 * scale.max(1e-300)) {
            return Err(CompassError::InvalidParameter {
                name: "rho0".into(),
                reason: "spin/shelf coherences must vanish".into(),
            });
        }
        let d = self.d_spin;
        let e = rho.entries();
        let mut x = Vec::with_capacity(d * d + 2);
        for i in 0..d {
            for j in 0..d {
                x.push(e[(i, j)]);
            }
        }
        x.push(e[(d, d)]);
        x.push(e[(d + 1, d + 1)]);
        Ok(x)
    }

    pub fn unpack(&self, x: &[C64]) -> DensityMatrix {
        let d = self.d_spin;
        let e = Operator::from_row_slice(d, d, &x[..d * d]);
        // symmetrize away the rounding-level anti-Hermitian residue
        let e = (&e + e.adjoint()).scale(0.5);
        DensityMatrix::from_blocks(&e, x[d * d].re, x[d * d + 1].re)
            .expect("packed state has consistent dimensions")
    }
}

fn dot(w: &[C64], x: &[C64]) -> C64 {
    w.iter().zip(x).fold(ZERO, |acc, (a, b)| acc + a * b)
}

/// Hamiltonian of `m` at time `t` on the full space (spin ⊕ shelves).
pub fn full_hamiltonian_at(m: &ModelSpec, f: &FieldSpec, t: f64, consts: &PhysicalConstants) -> Result<Operator> {
    Ok(pad_shelves(&hamiltonian(m, field_at(f, t), consts)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::channels::{generic_noise_channels, shelving_projectors};
    use crate::linalg::{is_hermitian, max_abs};
    use crate::spin::{initial_state, RfGeometry, RF_AMPLITUDE};
    use crate::state::InitialKind;

    fn noisy_model() -> ModelSpec {
        ModelSpec {
            gamma_noise: 2.5e3,
            gamma_z: 4e3,
            ..ModelSpec::cigar(1e4)
        }
    }

    fn test_state(m: &ModelSpec) -> DensityMatrix {
        // a non-trivial block-diagonal state: rotated singlet plus shelf weight
        let c = PhysicalConstants::default();
        let rho0 = initial_state(m, InitialKind::Singlet).unwrap();
        let h = hamiltonian(m, FieldSpec::earth(0.5).static_vector(), &c).unwrap();
        let u = h.map(|z| z * C64::new(0.0, -3e-8)).exp();
        let spin = &u * rho0.spin_block() * u.adjoint();
        DensityMatrix::from_blocks(&spin.scale(0.7), 0.2, 0.1).unwrap()
    }

    #[test]
    fn empty_channels_and_commuting_state_give_zero() {
        let m = ModelSpec::uncoupled(1e4);
        let c = PhysicalConstants::default();
        let h = hamiltonian(&m, FieldSpec::earth(0.3).static_vector(), &c).unwrap();
        let rho = initial_state(&m, InitialKind::Singlet).unwrap();
        let out = generator_rhs(&rho, &h, &ChannelSet::empty(8)).unwrap();
        assert!(max_abs(&out) < 1e-6 * max_abs(&h));
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let m = noisy_model();
        let c = PhysicalConstants::default();
        let f = FieldSpec::earth(0.5);
        let channels = build_channels(&m, &f, ChannelFlags { decay: true, generic_noise: true, dephasing: true }, &c).unwrap();
        let h = full_hamiltonian_at(&m, &f, 0.0, &c).unwrap();
        let rho = test_state(&m);
        let out = generator_rhs(&rho, &h, &channels).unwrap();
        let scale = max_abs(&out);
        assert!(out.trace().norm() < 1e-12 * scale);
        assert!(is_hermitian(&out, 1e-12));
    }

    #[test]
    fn zero_noise_rate_contributes_nothing() {
        let m = ModelSpec::cigar(1e4);
        let set = generic_noise_channels(&m).unwrap();
        let rho = test_state(&m);
        let zero_h = Operator::zeros(10, 10);
        let out = generator_rhs(&rho, &zero_h, &set).unwrap();
        assert_eq!(max_abs(&out), 0.0);
    }

    #[test]
    fn compiled_generator_matches_dense_rhs() {
        let c = PhysicalConstants::default();
        for m in [noisy_model(), ModelSpec::two_nuclei(1e5), ModelSpec::anisotropic_g(1e3)] {
            let f = FieldSpec::earth(0.8).oriented(0.8, RfGeometry::Perpendicular, RF_AMPLITUDE);
            let flags = ChannelFlags { decay: true, generic_noise: true, dephasing: true };
            let g = CompiledGenerator::from_model(&m, &f, flags, &c).unwrap();
            let channels = build_channels(&m, &f, flags, &c).unwrap();
            let rho = test_state(&m);
            let x = g.pack(&rho).unwrap();
            for t in [0.0, 1.3e-7, 4.1e-7] {
                let mut out = vec![ZERO; g.state_len()];
                g.apply(t, &x, &mut out);
                let h = full_hamiltonian_at(&m, &f, t, &c).unwrap();
                let dense = generator_rhs(&rho, &h, &channels).unwrap();
                let d = m.d_spin();
                let scale = max_abs(&dense);
                for i in 0..d {
                    for j in 0..d {
                        assert!((out[i * d + j] - dense[(i, j)]).norm() < 1e-11 * scale);
                    }
                }
                assert!((out[d * d] - dense[(d, d)]).norm() < 1e-11 * scale);
                assert!((out[d * d + 1] - dense[(d + 1, d + 1)]).norm() < 1e-11 * scale);
            }
            assert_eq!(g.uniform_decay(), Some(m.k));
        }
    }

    #[test]
    fn pack_round_trip_and_rejects_coherences() {
        let m = ModelSpec::cigar(1e4);
        let g = CompiledGenerator::compile(&Operator::zeros(8, 8), None, &shelving_projectors(&m)).unwrap();
        let rho = test_state(&m);
        let back = g.unpack(&g.pack(&rho).unwrap());
        assert!(max_abs(&(back.entries() - rho.entries())) < 1e-15);

        let mut bad = rho.into_entries();
        bad[(0, 8)] = C64::new(0.1, 0.0);
        let bad = DensityMatrix::new(8, bad).unwrap();
        assert!(g.pack(&bad).is_err());
    }
}
