//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix};

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Smallest eigenvalue a Hermitian system matrix may have before it is
/// treated as singular.
pub const MIN_EIGENVALUE: f64 = 1e-9;

/// Largest entrywise deviation `|a_ij - a_ji^*|`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Inverse of a Hermitian positive-definite matrix.
///
/// Fails with [`Error::Singular`] when the smallest eigenvalue does not exceed
/// [`MIN_EIGENVALUE`].
pub fn hermitian_inverse(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let min_eigenvalue = hermitian_eigenvalues(a).first().copied().unwrap_or(f64::NAN);
    if !(min_eigenvalue > MIN_EIGENVALUE) {
        return Err(Error::Singular { min_eigenvalue });
    }
    a.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::Singular { min_eigenvalue })
}

/// `max_ij |a_ij - b_ij|`, infinite on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_hermitian_matrix() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.5, 0.5),
                C64::new(0.5, -0.5),
                C64::new(3.0, 0.0),
            ],
        );
        let inv = hermitian_inverse(&a).unwrap();
        let eye = CMatrix::identity(2, 2);
        assert!(max_abs_diff(&(&a * &inv), &eye) < 1e-12);
        assert!(hermitian_defect(&a) == 0.0);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let ones = CMatrix::from_element(3, 3, C64::new(1.0, 0.0));
        match hermitian_inverse(&ones) {
            Err(Error::Singular { min_eigenvalue }) => assert!(min_eigenvalue.abs() < 1e-9),
            other => panic!("expected singular error, got {other:?}"),
        }
    }
}
