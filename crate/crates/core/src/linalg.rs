//! Dense complex matrices plus a small compressed-row sparse type used for
//! the vectorized master-equation generator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense complex operator. Spin operators, Hamiltonians and jump operators
/// all use this type.
pub type Operator = DMatrix<C64>;
pub type StateVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

/// Largest absolute entry.
pub fn max_abs(a: &Operator) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `‖A − A†‖_max ≤ rel_tol · ‖A‖_max`.
pub fn is_hermitian(a: &Operator, rel_tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = max_abs(a);
    let diff = max_abs(&(a - a.adjoint()));
    diff <= rel_tol * scale.max(f64::MIN_POSITIVE)
}

/// Outer product `|u⟩⟨v|`.
pub fn outer(u: &StateVector, v: &StateVector) -> Operator {
    u * v.adjoint()
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &Operator) -> Vec<f64> {
    let h = (a + a.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigen-decomposition `a = Q diag(e) Q†` of the Hermitian part of `a`.
pub fn hermitian_eigh(a: &Operator) -> (Vec<f64>, Operator) {
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `exp(−i·t·H)` for Hermitian `H`, via its eigenbasis (exactly unitary up
/// to rounding).
pub fn unitary_exp(h: &Operator, t: f64) -> Operator {
    let (e, q) = hermitian_eigh(h);
    let mut scaled = q.clone();
    for (j, ej) in e.iter().enumerate() {
        let phase = C64::from_polar(1.0, -ej * t);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    scaled * q.adjoint()
}

/// Compressed sparse row matrix over `C64`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds from a dense matrix, dropping entries with `|z| <= drop_tol`.
    pub fn from_dense(m: &Operator, drop_tol: f64) -> Self {
        let (rows, cols) = m.shape();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..rows {
            for c in 0..cols {
                let z = m[(r, c)];
                if z.norm() > drop_tol {
                    col_idx.push(c);
                    values.push(z);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> Operator {
        let mut m = Operator::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[p])] += self.values[p];
            }
        }
        m
    }

    /// `y = alpha · A x + y`.
    #[inline]
    pub fn mul_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yr += alpha * acc;
        }
    }

    /// `y = A x`.
    #[inline]
    pub fn mul_into(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        self.mul_add(ONE, x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_matches_dense_product() {
        let m = Operator::from_fn(5, 5, |r, c| {
            if (r + 2 * c) % 3 == 0 {
                C64::new(r as f64 - c as f64, 0.5 * c as f64)
            } else {
                ZERO
            }
        });
        let x = StateVector::from_fn(5, |i, _| C64::new(i as f64, 1.0 - i as f64));
        let csr = CsrMatrix::from_dense(&m, 0.0);
        let mut y = vec![ZERO; 5];
        csr.mul_into(x.as_slice(), &mut y);
        let expected = &m * &x;
        for i in 0..5 {
            assert!((y[i] - expected[i]).norm() < 1e-14);
        }
        assert_eq!(csr.to_dense(), m);
        assert!(csr.nnz() < 25);
    }

    #[test]
    fn hermitian_check() {
        let mut h = Operator::zeros(2, 2);
        h[(0, 1)] = C64::new(1.0, 2.0);
        h[(1, 0)] = C64::new(1.0, -2.0);
        assert!(is_hermitian(&h, 1e-12));
        h[(1, 0)] = C64::new(1.0, 2.0);
        assert!(!is_hermitian(&h, 1e-12));
    }
}
