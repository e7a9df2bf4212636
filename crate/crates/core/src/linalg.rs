//! Small shared helpers for dense complex Hermitian linear algebra.

use crate::{C64, CMatrix};
use nalgebra::DVector;

/// Eigendecomposition of a Hermitian matrix: real eigenvalues (ascending is
/// not guaranteed by nalgebra, callers must not rely on order) and the
/// unitary of column eigenvectors.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let sym = nalgebra::SymmetricEigen::new(m.clone());
    (sym.eigenvalues, sym.eigenvectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(m);
    vals.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// exp(i * scale * H) for Hermitian H, via eigendecomposition.
pub fn expi_hermitian(h: &CMatrix, scale: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let d = CMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| C64::new(0.0, scale * l).exp()),
    ));
    &vecs * d * vecs.adjoint()
}

/// Max elementwise absolute value.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max elementwise deviation from Hermiticity, |M - M^dag|_max / 2.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let d = m - m.adjoint();
    max_abs(&d) / 2.0
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Re-orthonormalize a near-unitary matrix via QR.
pub fn reorthonormalize(u: &CMatrix) -> CMatrix {
    let qr = u.clone().qr();
    qr.q()
}
