use serde::{Deserialize, Serialize};

use crate::error::{CompassError, Result};
use crate::linalg::{Operator, C64};

/// Density matrix over the spin space followed by the two shelf levels
/// `|S⟩` (index `d_spin`) and `|T⟩` (index `d_spin + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    d_spin: usize,
    entries: Operator,
}

impl DensityMatrix {
    pub fn new(d_spin: usize, entries: Operator) -> Result<Self> {
        let d = d_spin + 2;
        if entries.nrows() != d || entries.ncols() != d {
            return Err(CompassError::DimensionMismatch {
                expected: d,
                got: entries.nrows(),
            });
        }
        if d_spin < 4 || !d_spin.is_power_of_two() {
            return Err(CompassError::InvalidParameter {
                name: "d_spin".into(),
                reason: format!("{d_spin} is not 4·2^n"),
            });
        }
        Ok(Self { d_spin, entries })
    }

    /// Builds the block-diagonal state `ρ_spin ⊕ diag(p_S, p_T)`.
    pub fn from_blocks(spin: &Operator, shelf_s: f64, shelf_t: f64) -> Result<Self> {
        let d_spin = spin.nrows();
        let mut entries = Operator::zeros(d_spin + 2, d_spin + 2);
        entries.view_mut((0, 0), (d_spin, d_spin)).copy_from(spin);
        entries[(d_spin, d_spin)] = C64::new(shelf_s, 0.0);
        entries[(d_spin + 1, d_spin + 1)] = C64::new(shelf_t, 0.0);
        Self::new(d_spin, entries)
    }

    pub fn dim(&self) -> usize {
        self.d_spin + 2
    }

    pub fn d_spin(&self) -> usize {
        self.d_spin
    }

    pub fn n_nuclei(&self) -> usize {
        (self.d_spin / 4).trailing_zeros() as usize
    }

    pub fn entries(&self) -> &Operator {
        &self.entries
    }

    pub fn into_entries(self) -> Operator {
        self.entries
    }

    /// Spin block with the shelves dropped (not renormalized).
    pub fn spin_block(&self) -> Operator {
        self.entries
            .view((0, 0), (self.d_spin, self.d_spin))
            .into_owned()
    }

    pub fn shelf_s(&self) -> f64 {
        self.entries[(self.d_spin, self.d_spin)].re
    }

    pub fn shelf_t(&self) -> f64 {
        self.entries[(self.d_spin + 1, self.d_spin + 1)].re
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Population remaining in the spin subspace.
    pub fn spin_population(&self) -> f64 {
        (0..self.d_spin).map(|i| self.entries[(i, i)].re).sum()
    }

    /// True if the spin/shelf coherences and the `|S⟩⟨T|` coherence vanish.
    pub fn is_block_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        for r in 0..d {
            for c in 0..d {
                let r_shelf = r >= self.d_spin;
                let c_shelf = c >= self.d_spin;
                let off_block = (r_shelf != c_shelf) || (r_shelf && c_shelf && r != c);
                if off_block && self.entries[(r, c)].norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Initial electron-pair preparation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// Electrons in the singlet, nuclei maximally mixed.
    #[default]
    Singlet,
    /// Electrons in `(|s⟩⟨s| + |t₀⟩⟨t₀|)/2`, nuclei maximally mixed.
    Dephased,
}
