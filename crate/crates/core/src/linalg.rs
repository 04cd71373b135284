//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Spectral norm `sqrt(λ_max(AᵀA))`.
pub fn op_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let gram = a.transpose() * a;
    let eig = SymmetricEigen::new(gram);
    eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
}

/// Largest entrywise deviation from symmetry.
pub fn asymmetry(a: &Matrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(a: &Matrix) -> alloc::vec::Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut values: alloc::vec::Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
    values.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    values
}

/// Modified Gram–Schmidt on the columns of `m` with respect to the
/// conformal metric `scale² · Id`. Columns must be linearly independent.
pub fn orthonormalize_columns(m: &mut Matrix, scale: f64) {
    let cols = m.ncols();
    for j in 0..cols {
        for i in 0..j {
            let proj = m.column(i).dot(&m.column(j)) * scale * scale;
            let ci = m.column(i).clone_owned();
            let mut cj = m.column_mut(j);
            cj.axpy(-proj, &ci, 1.0);
        }
        let len = m.column(j).norm() * scale;
        m.column_mut(j).scale_mut(1.0 / len);
    }
}

/// Rank-one projector `n nᵀ`.
pub fn outer(n: &Vector) -> Matrix {
    n * n.transpose()
}
