//! Spin operators, Hamiltonians, magnetic fields and initial states.
//!
//! Tensor slots are ordered `nucleus₁ ⊗ nucleus₂ ⊗ electron₁ ⊗ electron₂`
//! (absent nuclei are simply omitted), with the first slot most significant
//! in the basis index. Spin up is basis state 0 of each slot, so
//! `σ_z = diag(1, −1)`.
//!
//! Energies are given in meV and converted to angular frequencies (rad/s)
//! by dividing by ħ; every Hamiltonian returned here is in rad/s.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, CompassError, Result};
use crate::linalg::{identity, kron, outer, Operator, StateVector, C64, ONE, ZERO};
use crate::state::{DensityMatrix, InitialKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, meV·s.
    pub hbar: f64,
    /// Bohr magneton, meV/T.
    pub bohr_magneton: f64,
    pub g_free: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 6.582_119_57e-13,
            bohr_magneton: 5.788_381_8e-2,
            g_free: 2.0,
        }
    }
}

impl PhysicalConstants {
    /// `γ = ½ μ_B g` in meV/T.
    pub fn gamma(&self) -> f64 {
        0.5 * self.bohr_magneton * self.g_free
    }

    pub fn mev_to_angular(&self, energy_mev: f64) -> f64 {
        energy_mev / self.hbar
    }

    pub fn angular_to_mev(&self, omega: f64) -> f64 {
        omega * self.hbar
    }

    /// Resonance of the uncoupled electron, `ħω = 2γB₀`, in rad/s.
    pub fn resonance_omega(&self, b0: f64) -> f64 {
        2.0 * self.gamma() * b0 / self.hbar
    }
}

/// Hyperfine tensor in its principal frame (meV). `orientation` rotates the
/// principal frame into the molecular frame: `A = R·diag(ax, ay, az)·Rᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineTensor {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    #[serde(default = "identity3")]
    pub orientation: [[f64; 3]; 3],
}

fn identity3() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

impl HyperfineTensor {
    pub fn diagonal(ax: f64, ay: f64, az: f64) -> Self {
        Self {
            ax,
            ay,
            az,
            orientation: identity3(),
        }
    }

    /// Axially symmetric "cigar": `A_z = 10⁻⁵ meV`, `A_x = A_y = A_z/2`.
    pub fn cigar() -> Self {
        let az = 1e-5;
        Self::diagonal(az / 2.0, az / 2.0, az)
    }

    /// "Disc": `A_x = 0.5×10⁻⁵ meV`, `A_y = A_x/6`, `A_z = A_x`.
    pub fn disc() -> Self {
        let ax = 0.5e-5;
        Self::diagonal(ax, ax / 6.0, ax)
    }

    pub fn zero() -> Self {
        Self::diagonal(0.0, 0.0, 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ax: self.ax * factor,
            ay: self.ay * factor,
            az: self.az * factor,
            orientation: self.orientation,
        }
    }

    /// Full 3×3 tensor in the molecular frame, meV.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let r = &self.orientation;
        let d = [self.ax, self.ay, self.az];
        let mut a = [[0.0; 3]; 3];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|m| r[i][m] * d[m] * r[j][m]).sum();
            }
        }
        a
    }

    fn validate(&self, name: &str) -> Result<()> {
        let all = [self.ax, self.ay, self.az]
            .into_iter()
            .chain(self.orientation.iter().flatten().copied());
        for v in all {
            if !v.is_finite() {
                return Err(invalid(name, "non-finite entry"));
            }
        }
        Ok(())
    }
}

/// Per-axis g-factors of one electron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GTensor {
    pub gx: f64,
    pub gy: f64,
    pub gz: f64,
}

impl Default for GTensor {
    fn default() -> Self {
        Self::isotropic(2.0)
    }
}

impl GTensor {
    pub fn isotropic(g: f64) -> Self {
        Self { gx: g, gy: g, gz: g }
    }

    /// `g_z = 0.8·2`, `g_x = g_y = 0.3·2`.
    pub fn anisotropic() -> Self {
        Self {
            gx: 0.6,
            gy: 0.6,
            gz: 1.6,
        }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.gx, self.gy, self.gz]
    }
}

/// The radical-pair spin system: two electrons, up to two nuclei coupled to
/// electron 1, and the rates of the master equation (all in s⁻¹).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub nuclei: Vec<HyperfineTensor>,
    pub g1: GTensor,
    pub g2: GTensor,
    /// Shelving decay rate.
    pub k: f64,
    /// Rate of the six single-electron Pauli noise channels.
    pub gamma_noise: f64,
    /// Pure-dephasing rate.
    pub gamma_z: f64,
}

impl ModelSpec {
    pub fn with_nuclei(nuclei: Vec<HyperfineTensor>, k: f64) -> Self {
        Self {
            nuclei,
            g1: GTensor::default(),
            g2: GTensor::default(),
            k,
            gamma_noise: 0.0,
            gamma_z: 0.0,
        }
    }

    pub fn cigar(k: f64) -> Self {
        Self::with_nuclei(vec![HyperfineTensor::cigar()], k)
    }

    pub fn disc(k: f64) -> Self {
        Self::with_nuclei(vec![HyperfineTensor::disc()], k)
    }

    /// One nucleus with all couplings zero.
    pub fn uncoupled(k: f64) -> Self {
        Self::with_nuclei(vec![HyperfineTensor::zero()], k)
    }

    /// Cigar tensor plus a parallel second nucleus with `A₂ = ⅔·A₁`.
    pub fn two_nuclei(k: f64) -> Self {
        let a1 = HyperfineTensor::cigar();
        Self::with_nuclei(vec![a1, a1.scaled(2.0 / 3.0)], k)
    }

    /// No nuclei; electron 1 carries the anisotropic g-tensor.
    pub fn anisotropic_g(k: f64) -> Self {
        Self {
            g1: GTensor::anisotropic(),
            ..Self::with_nuclei(Vec::new(), k)
        }
    }

    pub fn n_nuclei(&self) -> usize {
        self.nuclei.len()
    }

    pub fn d_spin(&self) -> usize {
        4 << self.nuclei.len()
    }

    pub fn d_total(&self) -> usize {
        self.d_spin() + 2
    }

    /// Local dimensions in slot order.
    pub fn dims(&self) -> Vec<usize> {
        vec![2; self.nuclei.len() + 2]
    }

    pub fn electron1_slot(&self) -> usize {
        self.nuclei.len()
    }

    pub fn electron2_slot(&self) -> usize {
        self.nuclei.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.nuclei.len() > 2 {
            return Err(CompassError::TooManyNuclei(self.nuclei.len()));
        }
        for (i, n) in self.nuclei.iter().enumerate() {
            n.validate(&format!("nuclei[{i}]"))?;
        }
        for (name, g) in [("g1", &self.g1), ("g2", &self.g2)] {
            if g.components().iter().any(|v| !v.is_finite()) {
                return Err(invalid(name, "non-finite g-factor"));
            }
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(invalid("k", "decay rate must be positive"));
        }
        if !(self.gamma_noise.is_finite() && self.gamma_noise >= 0.0) {
            return Err(invalid("gamma_noise", "noise rate must be non-negative"));
        }
        if !(self.gamma_z.is_finite() && self.gamma_z >= 0.0) {
            return Err(invalid("gamma_z", "dephasing rate must be non-negative"));
        }
        Ok(())
    }
}

/// Static plus linearly polarized oscillatory field:
/// `B(t) = B₀ n̂(ϑ, φ) + B_rf cos(ωt + phase) n̂(θ_rf, φ_rf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    /// Tesla.
    pub b0: f64,
    pub theta_static: f64,
    pub phi_static: f64,
    /// Tesla; zero switches the oscillatory term off.
    pub b_rf: f64,
    pub theta_rf: f64,
    pub phi_rf: f64,
    /// rad/s.
    pub omega: f64,
    pub rf_phase: f64,
}

/// Earth's field used throughout, T.
pub const EARTH_FIELD: f64 = 47e-6;
/// Oscillatory amplitude, T.
pub const RF_AMPLITUDE: f64 = 150e-9;

/// Orientation of the oscillatory field relative to the static one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RfGeometry {
    #[default]
    Off,
    /// In the static field's plane (φ_rf = φ), `θ_rf = ϑ + π/2`.
    Perpendicular,
    /// Along ŷ, orthogonal to any static field in the xz-plane.
    PerpendicularOutOfPlane,
    Parallel,
    /// Fixed direction independent of ϑ.
    Fixed { theta: f64, phi: f64 },
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self::earth(0.0)
    }
}

impl FieldSpec {
    /// Static Earth field at polar angle `theta` (φ = 0), no oscillatory term.
    pub fn earth(theta: f64) -> Self {
        let consts = PhysicalConstants::default();
        Self {
            b0: EARTH_FIELD,
            theta_static: theta,
            phi_static: 0.0,
            b_rf: 0.0,
            theta_rf: 0.0,
            phi_rf: 0.0,
            omega: consts.resonance_omega(EARTH_FIELD),
            rf_phase: 0.0,
        }
    }

    /// Sets the static angle and re-derives the rf direction from `geometry`.
    /// `b_rf` is the amplitude used when the geometry is not `Off`.
    pub fn oriented(&self, theta: f64, geometry: RfGeometry, b_rf: f64) -> Self {
        let mut f = Self {
            theta_static: theta,
            ..*self
        };
        match geometry {
            RfGeometry::Off => f.b_rf = 0.0,
            RfGeometry::Perpendicular => {
                f.b_rf = b_rf;
                f.theta_rf = theta + FRAC_PI_2;
                f.phi_rf = f.phi_static;
            }
            RfGeometry::PerpendicularOutOfPlane => {
                f.b_rf = b_rf;
                f.theta_rf = FRAC_PI_2;
                f.phi_rf = FRAC_PI_2;
            }
            RfGeometry::Parallel => {
                f.b_rf = b_rf;
                f.theta_rf = theta;
                f.phi_rf = f.phi_static;
            }
            RfGeometry::Fixed { theta, phi } => {
                f.b_rf = b_rf;
                f.theta_rf = theta;
                f.phi_rf = phi;
            }
        }
        f
    }

    pub fn has_rf(&self) -> bool {
        self.b_rf != 0.0
    }

    pub fn static_vector(&self) -> [f64; 3] {
        scale3(direction(self.theta_static, self.phi_static), self.b0)
    }

    /// Oscillatory amplitude vector (the field at phase zero).
    pub fn rf_vector(&self) -> [f64; 3] {
        scale3(direction(self.theta_rf, self.phi_rf), self.b_rf)
    }

    /// `cos(ωt + phase)`.
    pub fn rf_modulation(&self, t: f64) -> f64 {
        (self.omega * t + self.rf_phase).cos()
    }

    /// Oscillation period `2π/ω`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.b0,
            self.theta_static,
            self.phi_static,
            self.b_rf,
            self.theta_rf,
            self.phi_rf,
            self.omega,
            self.rf_phase,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(invalid("field", "non-finite value"));
        }
        if self.has_rf() && self.omega <= 0.0 {
            return Err(invalid("omega", "oscillatory field needs a positive frequency"));
        }
        Ok(())
    }
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [phi.cos() * theta.sin(), phi.sin() * theta.sin(), theta.cos()]
}

fn scale3(v: [f64; 3], s: f64) -> [f64; 3] {
    [v[0] * s, v[1] * s, v[2] * s]
}

/// Field vector in tesla at time `t` (seconds).
pub fn field_at(f: &FieldSpec, t: f64) -> [f64; 3] {
    let s = f.static_vector();
    if !f.has_rf() {
        return s;
    }
    let r = f.rf_vector();
    let c = f.rf_modulation(t);
    [s[0] + c * r[0], s[1] + c * r[1], s[2] + c * r[2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

pub fn pauli(axis: Axis) -> Operator {
    let r = |v: f64| C64::new(v, 0.0);
    match axis {
        Axis::X => Operator::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => Operator::from_row_slice(2, 2, &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]),
        Axis::Z => Operator::from_row_slice(2, 2, &[r(1.0), ZERO, ZERO, r(-1.0)]),
    }
}

/// Places `op` on `slot` with identities elsewhere.
pub fn embed(op: &Operator, slot: usize, dims: &[usize]) -> Result<Operator> {
    let Some(&local) = dims.get(slot) else {
        return Err(CompassError::DimensionMismatch {
            expected: dims.len(),
            got: slot,
        });
    };
    if op.nrows() != local || op.ncols() != local {
        return Err(CompassError::DimensionMismatch {
            expected: local,
            got: op.nrows(),
        });
    }
    let left: usize = dims[..slot].iter().product();
    let right: usize = dims[slot + 1..].iter().product();
    Ok(kron(&kron(&identity(left), op), &identity(right)))
}

/// Two-electron basis states in `e₁ ⊗ e₂`, returned as `[s, t₀, t₊, t₋]`.
pub fn singlet_triplet_states() -> [StateVector; 4] {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let basis = |amps: [C64; 4]| StateVector::from_column_slice(&amps);
    // |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩
    [
        basis([ZERO, h, -h, ZERO]),
        basis([ZERO, h, h, ZERO]),
        basis([ONE, ZERO, ZERO, ZERO]),
        basis([ZERO, ZERO, ZERO, ONE]),
    ]
}

/// Hyperfine part `Σ_n Σ_{αβ} A_{αβ} σ_α^(n) σ_β^(e₁) / ħ`.
pub fn hyperfine_hamiltonian(m: &ModelSpec, consts: &PhysicalConstants) -> Result<Operator> {
    if m.nuclei.len() > 2 {
        return Err(CompassError::TooManyNuclei(m.nuclei.len()));
    }
    let dims = m.dims();
    let e1 = m.electron1_slot();
    let mut h = Operator::zeros(m.d_spin(), m.d_spin());
    let sig_e1: Vec<Operator> = Axis::ALL
        .iter()
        .map(|&a| embed(&pauli(a), e1, &dims))
        .collect::<Result<_>>()?;
    for (slot, tensor) in m.nuclei.iter().enumerate() {
        let a = tensor.matrix();
        for &alpha in &Axis::ALL {
            let sig_n = embed(&pauli(alpha), slot, &dims)?;
            for &beta in &Axis::ALL {
                let coupling = a[alpha.index()][beta.index()];
                if coupling != 0.0 {
                    let w = consts.mev_to_angular(coupling);
                    h += (&sig_n * &sig_e1[beta.index()]).scale(w);
                }
            }
        }
    }
    Ok(h)
}

/// Zeeman part `½μ_B Σ_α (g1_α b_α σ_α^(e₁) + g2_α b_α σ_α^(e₂)) / ħ`.
pub fn zeeman_hamiltonian(m: &ModelSpec, b: [f64; 3], consts: &PhysicalConstants) -> Result<Operator> {
    if m.nuclei.len() > 2 {
        return Err(CompassError::TooManyNuclei(m.nuclei.len()));
    }
    let dims = m.dims();
    let mut h = Operator::zeros(m.d_spin(), m.d_spin());
    for (slot, g) in [(m.electron1_slot(), m.g1), (m.electron2_slot(), m.g2)] {
        let g = g.components();
        for &axis in &Axis::ALL {
            let i = axis.index();
            let energy = 0.5 * consts.bohr_magneton * g[i] * b[i];
            if energy != 0.0 {
                h += embed(&pauli(axis), slot, &dims)?.scale(consts.mev_to_angular(energy));
            }
        }
    }
    Ok(h)
}

/// Full spin Hamiltonian at field `b` (tesla), in rad/s.
pub fn hamiltonian(m: &ModelSpec, b: [f64; 3], consts: &PhysicalConstants) -> Result<Operator> {
    if b.iter().any(|v| !v.is_finite()) {
        return Err(invalid("b", "field must be finite"));
    }
    Ok(hyperfine_hamiltonian(m, consts)? + zeeman_hamiltonian(m, b, consts)?)
}

/// Electron-pair state for `kind`, normalized, on `e₁ ⊗ e₂`.
pub fn electron_state(kind: InitialKind) -> Operator {
    let [s, t0, _, _] = singlet_triplet_states();
    match kind {
        InitialKind::Singlet => outer(&s, &s),
        InitialKind::Dephased => (outer(&s, &s) + outer(&t0, &t0)).scale(0.5),
    }
}

/// `(I_nuc / 2ⁿ) ⊗ ρ_e` with empty shelves, trace 1.
pub fn initial_state(m: &ModelSpec, kind: InitialKind) -> Result<DensityMatrix> {
    if m.nuclei.len() > 2 {
        return Err(CompassError::TooManyNuclei(m.nuclei.len()));
    }
    let d_nuc = 1usize << m.nuclei.len();
    let nuc = identity(d_nuc).scale(1.0 / d_nuc as f64);
    let spin = kron(&nuc, &electron_state(kind));
    DensityMatrix::from_blocks(&spin, 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_hermitian, max_abs};

    fn close(a: &Operator, b: &Operator, tol: f64) -> bool {
        max_abs(&(a - b)) < tol
    }

    #[test]
    fn pauli_algebra() {
        let up = StateVector::from_column_slice(&[ONE, ZERO]);
        assert_eq!(pauli(Axis::Z) * &up, up);
        for a in Axis::ALL {
            let p = pauli(a);
            assert!(close(&(&p * &p), &identity(2), 1e-15));
            assert_eq!(p.trace(), ZERO);
            assert!(is_hermitian(&p, 0.0));
        }
        // σxσy = iσz
        let xy = pauli(Axis::X) * pauli(Axis::Y);
        assert!(close(&xy, &pauli(Axis::Z).scale(1.0).map(|z| z * C64::new(0.0, 1.0)), 1e-15));
    }

    #[test]
    fn embed_places_slots_in_declared_order() {
        let e = embed(&pauli(Axis::Z), 0, &[2, 2]).unwrap();
        assert_eq!(e, kron(&pauli(Axis::Z), &identity(2)));
        assert_eq!(embed(&identity(2), 1, &[2, 2, 2]).unwrap(), identity(8));

        // σ_x on slot 2 of [n, e1, e2]: oracle is the explicit 8×8 kron.
        let sx = embed(&pauli(Axis::X), 2, &[2, 2, 2]).unwrap();
        let direct = kron(&kron(&identity(2), &identity(2)), &pauli(Axis::X));
        assert_eq!(sx, direct);
        // |n=↓, ↑, ↑⟩ = index 0b100 → |↓, ↑, ↓⟩ = 0b101 for slot 2.
        let mut v = StateVector::zeros(8);
        v[0b100] = ONE;
        let w = &sx * &v;
        assert_eq!(w[0b101], ONE);
        // slot 1 (electron 1) flips the middle bit instead
        let s1 = embed(&pauli(Axis::X), 1, &[2, 2, 2]).unwrap();
        assert_eq!((&s1 * &v)[0b110], ONE);
    }

    #[test]
    fn embed_rejects_bad_dims() {
        assert!(matches!(
            embed(&identity(3), 0, &[2, 2]),
            Err(CompassError::DimensionMismatch { .. })
        ));
        assert!(embed(&identity(2), 5, &[2, 2]).is_err());
    }

    #[test]
    fn singlet_triplet_basis_is_orthonormal() {
        let b = singlet_triplet_states();
        for i in 0..4 {
            for j in 0..4 {
                let ip = b[i].dotc(&b[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
        let dims = [2, 2];
        let total_z = embed(&pauli(Axis::Z), 0, &dims).unwrap() + embed(&pauli(Axis::Z), 1, &dims).unwrap();
        assert!((total_z * &b[0]).norm() < 1e-15);
    }

    #[test]
    fn field_follows_definition() {
        let f = FieldSpec::earth(0.7);
        let b = field_at(&f, 123.0);
        assert!((b[0] - EARTH_FIELD * 0.7f64.sin()).abs() < 1e-20);
        assert_eq!(b[1], 0.0);
        assert!((b[2] - EARTH_FIELD * 0.7f64.cos()).abs() < 1e-20);

        let nu = f.omega / (2.0 * PI);
        assert!((nu - 1.316e6).abs() / 1.316e6 < 1e-3, "nu = {nu}");

        let rf = f.oriented(0.7, RfGeometry::Perpendicular, RF_AMPLITUDE);
        let at0 = field_at(&rf, 0.0);
        let at_half = field_at(&rf, PI / rf.omega);
        let s = rf.static_vector();
        for i in 0..3 {
            assert!(((at_half[i] - s[i]) + (at0[i] - s[i])).abs() < 1e-18);
        }
        // perpendicular geometry is orthogonal to the static field
        let r = rf.rf_vector();
        let dot: f64 = (0..3).map(|i| r[i] * s[i]).sum();
        assert!(dot.abs() < 1e-25);
    }

    #[test]
    fn hamiltonian_dimensions() {
        let c = PhysicalConstants::default();
        let b = FieldSpec::earth(0.3).static_vector();
        let h = hamiltonian(&ModelSpec::cigar(1e4), b, &c).unwrap();
        assert_eq!(h.nrows(), 8);
        assert!(is_hermitian(&h, 1e-12));
        assert_eq!(hamiltonian(&ModelSpec::anisotropic_g(1e4), b, &c).unwrap().nrows(), 4);
        assert_eq!(hamiltonian(&ModelSpec::two_nuclei(1e4), b, &c).unwrap().nrows(), 16);
        let mut m = ModelSpec::two_nuclei(1e4);
        m.nuclei.push(HyperfineTensor::cigar());
        assert_eq!(hamiltonian(&m, b, &c), Err(CompassError::TooManyNuclei(3)));
    }

    #[test]
    fn cigar_zero_field_spectrum() {
        // (a/2)(σxσx + σyσy) + a σzσz has spectrum {−2a, 0, a, a}; the
        // oracle here is the numerical eigensolver on the full 8×8 matrix.
        let c = PhysicalConstants::default();
        let a = c.mev_to_angular(1e-5);
        let h = hamiltonian(&ModelSpec::cigar(1e4), [0.0; 3], &c).unwrap();
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().map(|v| v / a).collect();
        ev.sort_by(|x, y| x.total_cmp(y));
        let expected = [-2.0, -2.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        for (got, want) in ev.iter().zip(expected) {
            assert!((got - want).abs() < 1e-10, "{ev:?}");
        }
    }

    #[test]
    fn resonance_splitting_of_free_electron() {
        let c = PhysicalConstants::default();
        let m = ModelSpec::with_nuclei(Vec::new(), 1e4);
        let h = zeeman_hamiltonian(&m, [0.0, 0.0, EARTH_FIELD], &c).unwrap();
        // electron 2 alone: levels ±γB₀/ħ
        let h2 = embed(&pauli(Axis::Z), 1, &[2, 2]).unwrap().scale(c.mev_to_angular(c.gamma() * EARTH_FIELD));
        let split = 2.0 * c.gamma() * EARTH_FIELD / c.hbar / (2.0 * PI);
        assert!((split - 1.316e6).abs() / 1.316e6 < 1e-3);
        let diff = &h - &h2;
        // remaining piece is electron 1's identical Zeeman term
        assert!(close(&diff, &embed(&pauli(Axis::Z), 0, &[2, 2]).unwrap().scale(c.mev_to_angular(c.gamma() * EARTH_FIELD)), 1e-6));
    }

    #[test]
    fn initial_states() {
        let m = ModelSpec::cigar(1e4);
        let rho = initial_state(&m, InitialKind::Singlet).unwrap();
        assert_eq!(rho.dim(), 10);
        assert!((rho.trace() - ONE).norm() < 1e-15);
        let rho0 = initial_state(&ModelSpec::anisotropic_g(1e4), InitialKind::Singlet).unwrap();
        assert_eq!(rho0.dim(), 6);
        let deph = initial_state(&m, InitialKind::Dephased).unwrap();
        assert!((deph.trace() - ONE).norm() < 1e-15);
        assert_eq!(deph.shelf_s(), 0.0);
    }

    #[test]
    fn unit_round_trip() {
        let c = PhysicalConstants::default();
        for e in [1e-5, 3.3e-9, 0.25, 7.0] {
            let back = c.angular_to_mev(c.mev_to_angular(e));
            assert!(((back - e) / e).abs() < 1e-12);
        }
        assert_eq!(c.gamma(), c.bohr_magneton);
    }

    #[test]
    fn model_validation() {
        assert!(ModelSpec::cigar(1e4).validate().is_ok());
        assert!(ModelSpec::cigar(-1.0).validate().is_err());
        let mut m = ModelSpec::cigar(1e4);
        m.gamma_noise = -1.0;
        assert!(m.validate().is_err());
        assert_eq!(ModelSpec::two_nuclei(1.0).d_total(), 18);
    }
}
