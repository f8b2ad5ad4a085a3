use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::potential::Potential;

/// `e^{−iHt} q₀` for the linear lattice operator
/// `(Hq)_j = v_j q_j + ε₁(q_{j−1} + q_{j+1})` with open ends, through the
/// eigendecomposition of the dense real symmetric matrix.
pub fn dense_linear_propagate(v: &Potential, eps1: f64, q0: &[C64], t: f64) -> Vec<C64> {
    let n = v.values().len();
    assert_eq!(q0.len(), n);
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, &vi) in v.values().iter().enumerate() {
        h[(i, i)] = vi;
        if i + 1 < n {
            h[(i, i + 1)] = eps1;
            h[(i + 1, i)] = eps1;
        }
    }
    let eig = h.symmetric_eigen();
    let u = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let q = DVector::from_column_slice(q0);
    let mut c = u.adjoint() * q;
    for (ck, &lk) in c.iter_mut().zip(eig.eigenvalues.iter()) {
        *ck *= C64::from_polar(1.0, -lk * t);
    }
    (u * c).iter().copied().collect()
}
