//! Jump operators of the master equation: shelving projectors, generic
//! single-electron Pauli noise and pure dephasing in the subsystem energy
//! eigenbases.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{CompassError, Result};
use crate::linalg::{identity, kron, outer, Operator, StateVector, ZERO};
use crate::spin::{embed, pauli, singlet_triplet_states, Axis, FieldSpec, ModelSpec, PhysicalConstants};

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub operator: Operator,
    /// s⁻¹
    pub rate: f64,
    pub label: String,
}

/// Jump operators on the full space (spin ⊕ shelves) with their rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    d_spin: usize,
    channels: Vec<Channel>,
}

impl ChannelSet {
    pub fn empty(d_spin: usize) -> Self {
        Self {
            d_spin,
            channels: Vec::new(),
        }
    }

    pub fn d_spin(&self) -> usize {
        self.d_spin
    }

    pub fn dim(&self) -> usize {
        self.d_spin + 2
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Channel> {
        self.channels.iter()
    }

    pub fn push(&mut self, channel: Channel) -> Result<()> {
        if channel.operator.nrows() != self.dim() || channel.operator.ncols() != self.dim() {
            return Err(CompassError::DimensionMismatch {
                expected: self.dim(),
                got: channel.operator.nrows(),
            });
        }
        if !(channel.rate.is_finite() && channel.rate >= 0.0) {
            return Err(crate::error::invalid(&channel.label, "rate must be non-negative"));
        }
        self.channels.push(channel);
        Ok(())
    }

    pub fn extend(&mut self, other: ChannelSet) -> Result<()> {
        if other.d_spin != self.d_spin {
            return Err(CompassError::DimensionMismatch {
                expected: self.d_spin,
                got: other.d_spin,
            });
        }
        self.channels.extend(other.channels);
        Ok(())
    }
}

impl<'a> IntoIterator for &'a ChannelSet {
    type Item = &'a Channel;
    type IntoIter = std::slice::Iter<'a, Channel>;

    fn into_iter(self) -> Self::IntoIter {
        self.channels.iter()
    }
}

/// Which channel families enter the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelFlags {
    pub decay: bool,
    pub generic_noise: bool,
    pub dephasing: bool,
}

impl Default for ChannelFlags {
    fn default() -> Self {
        Self::DECAY_ONLY
    }
}

impl ChannelFlags {
    pub const DECAY_ONLY: Self = Self {
        decay: true,
        generic_noise: false,
        dephasing: false,
    };
    pub const NOISE: Self = Self {
        decay: true,
        generic_noise: true,
        dephasing: false,
    };
    pub const DEPHASING: Self = Self {
        decay: true,
        generic_noise: false,
        dephasing: true,
    };
    pub const ALL: Self = Self {
        decay: true,
        generic_noise: true,
        dephasing: true,
    };
}

/// Zero-extends a spin-space operator to spin ⊕ shelves.
pub fn pad_shelves(op: &Operator) -> Operator {
    let d = op.nrows();
    let mut full = Operator::zeros(d + 2, d + 2);
    full.view_mut((0, 0), (d, d)).copy_from(op);
    full
}

/// Spin basis vector `|nuclear n⟩ ⊗ |electron pair e⟩`.
fn product_state(n_index: usize, d_nuc: usize, electron: &StateVector) -> StateVector {
    let mut nuc = StateVector::zeros(d_nuc);
    nuc[n_index] = crate::linalg::ONE;
    nuc.kronecker(electron)
}

/// `|S⟩⟨s, n|` and `|T⟩⟨t_j, n|` for every nuclear basis state `n`, all at
/// rate `k`.
pub fn shelving_projectors(m: &ModelSpec) -> ChannelSet {
    let d_spin = m.d_spin();
    let d_nuc = d_spin / 4;
    let [s, t0, tp, tm] = singlet_triplet_states();
    let mut set = ChannelSet::empty(d_spin);
    for n in 0..d_nuc {
        for (electron, shelf, name) in [
            (&s, d_spin, "S,s"),
            (&t0, d_spin + 1, "T,t0"),
            (&tp, d_spin + 1, "T,t+"),
            (&tm, d_spin + 1, "T,t-"),
        ] {
            let v = product_state(n, d_nuc, electron);
            let mut op = Operator::from_element(d_spin + 2, d_spin + 2, ZERO);
            for j in 0..d_spin {
                op[(shelf, j)] = v[j].conj();
            }
            set.channels.push(Channel {
                operator: op,
                rate: m.k,
                label: format!("P[{name};n={n}]"),
            });
        }
    }
    set
}

/// `σ_α` on each electron (six operators) at rate `gamma_noise`.
pub fn generic_noise_channels(m: &ModelSpec) -> Result<ChannelSet> {
    let dims = m.dims();
    let mut set = ChannelSet::empty(m.d_spin());
    for (slot, name) in [(m.electron1_slot(), "e1"), (m.electron2_slot(), "e2")] {
        for (axis, a) in Axis::ALL.iter().zip(["x", "y", "z"]) {
            let op = pad_shelves(&embed(&pauli(*axis), slot, &dims)?);
            set.push(Channel {
                operator: op,
                rate: m.gamma_noise,
                label: format!("sigma_{a}[{name}]"),
            })?;
        }
    }
    Ok(set)
}

/// Static-field Hamiltonians of the two dephasing subsystems, in rad/s:
/// the remote electron (2×2) and nuclei ⊗ electron 1 (`2^(n+1)` square).
pub fn subsystem_hamiltonians(
    m: &ModelSpec,
    b: [f64; 3],
    consts: &PhysicalConstants,
) -> Result<(Operator, Operator)> {
    if m.nuclei.len() > 2 {
        return Err(CompassError::TooManyNuclei(m.nuclei.len()));
    }
    let zeeman_single = |g: [f64; 3]| {
        let mut h = Operator::zeros(2, 2);
        for axis in Axis::ALL {
            let i = axis.index();
            let w = consts.mev_to_angular(0.5 * consts.bohr_magneton * g[i] * b[i]);
            h += pauli(axis).scale(w);
        }
        h
    };
    let remote = zeeman_single(m.g2.components());

    let n = m.nuclei.len();
    let dims = vec![2; n + 1];
    let e1 = n;
    let mut coupled = embed(&zeeman_single(m.g1.components()), e1, &dims)?;
    for (slot, tensor) in m.nuclei.iter().enumerate() {
        let a = tensor.matrix();
        for alpha in Axis::ALL {
            let sig_n = embed(&pauli(alpha), slot, &dims)?;
            for beta in Axis::ALL {
                let c = a[alpha.index()][beta.index()];
                if c != 0.0 {
                    let sig_e = embed(&pauli(beta), e1, &dims)?;
                    coupled += (&sig_n * sig_e).scale(consts.mev_to_angular(c));
                }
            }
        }
    }
    Ok((remote, coupled))
}

/// Orthonormal eigenvectors of a Hermitian matrix, ordered by eigenvalue.
pub fn sorted_eigenvectors(h: &Operator) -> Vec<StateVector> {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order
        .into_iter()
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

/// `Z_i = (I − 2|λ_i⟩⟨λ_i|)/√2` for each eigenvector of `h`.
pub fn dephasing_operators(h: &Operator) -> Vec<Operator> {
    let d = h.nrows();
    sorted_eigenvectors(h)
        .iter()
        .map(|v| (identity(d) - outer(v, v).scale(2.0)).scale(FRAC_1_SQRT_2))
        .collect()
}

/// Pure-dephasing channels built from the static-field subsystem
/// eigenbases: two for the remote electron and `2^(n+1)` for nuclei ⊗
/// electron 1, all at rate `gamma_z`. Exactly degenerate subsystem levels
/// take whichever orthonormal eigenbasis the eigensolver returns.
pub fn dephasing_channels(m: &ModelSpec, b: [f64; 3], consts: &PhysicalConstants) -> Result<ChannelSet> {
    let (remote, coupled) = subsystem_hamiltonians(m, b, consts)?;
    let d_coupled = coupled.nrows();
    let mut set = ChannelSet::empty(m.d_spin());
    for (i, z) in dephasing_operators(&remote).into_iter().enumerate() {
        set.push(Channel {
            operator: pad_shelves(&kron(&identity(d_coupled), &z)),
            rate: m.gamma_z,
            label: format!("Z[e2;{i}]"),
        })?;
    }
    for (i, z) in dephasing_operators(&coupled).into_iter().enumerate() {
        set.push(Channel {
            operator: pad_shelves(&kron(&z, &identity(2))),
            rate: m.gamma_z,
            label: format!("Z[e1n;{i}]"),
        })?;
    }
    Ok(set)
}

/// Assembles the channel families selected by `flags`. Dephasing bases use
/// the static part of `f` only.
pub fn build_channels(
    m: &ModelSpec,
    f: &FieldSpec,
    flags: ChannelFlags,
    consts: &PhysicalConstants,
) -> Result<ChannelSet> {
    let mut set = ChannelSet::empty(m.d_spin());
    if flags.decay {
        set.extend(shelving_projectors(m))?;
    }
    if flags.generic_noise && m.gamma_noise > 0.0 {
        set.extend(generic_noise_channels(m)?)?;
    }
    if flags.dephasing && m.gamma_z > 0.0 {
        set.extend(dephasing_channels(m, f.static_vector(), consts)?)?;
    }
    Ok(set)
}
