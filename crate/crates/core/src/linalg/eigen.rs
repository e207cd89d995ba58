//! Cyclic Jacobi diagonalization of dense Hermitian matrices.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Columns whose eigenvalue is strictly below `mu`.
    pub fn count_below(&self, mu: f64) -> usize {
        self.values.iter().take_while(|&&v| v < mu).count()
    }
}

/// Largest entry of `M - M*`, the quantity compared against `Tolerances::herm`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

pub fn hermitian_eig(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Format("matrix has non-finite entries".into()));
    }
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let defect = hermitian_defect(m);
    if defect > tol.herm * scale {
        return Err(Error::NotHermitian { defect });
    }

    let n = m.nrows();
    let mut a = (m + m.adjoint()).scale(0.5);
    let mut v = ComplexMatrix::identity(n, n);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            total += a[(i, i)].norm_sqr();
            for j in (i + 1)..n {
                off += 2.0 * a[(i, j)].norm_sqr();
            }
        }
        total += off;
        if off <= (f64::EPSILON * f64::EPSILON) * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

// Annihilates a[p][q] with the unitary W = D G, where D = diag(e^{i arg a_pq}, 1)
// makes the 2x2 block real and G is the real Jacobi rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let theta = 0.5 * (2.0 * mag).atan2(app - aqq);
    let (s, c) = theta.sin_cos();
    let w00 = phase * c;
    let w01 = -phase * s;
    let w10 = Complex64::new(s, 0.0);
    let w11 = Complex64::new(c, 0.0);

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * w00 + akq * w10;
        a[(k, q)] = akp * w01 + akq * w11;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = w00.conj() * apk + w10.conj() * aqk;
        a[(q, k)] = w01.conj() * apk + w11.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * w00 + vkq * w10;
        v[(k, q)] = vkp * w01 + vkq * w11;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = hermitian_eig(&ComplexMatrix::identity(3, 3), &tol()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        );
        let e = hermitian_eig(&m, &tol()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_offdiagonal_is_resolved() {
        // Pauli Y: eigenvalues -1, 1 with complex eigenvectors.
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        );
        let e = hermitian_eig(&m, &tol()).unwrap();
        let resid = &m * &e.vectors
            - &e.vectors
                * ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    2,
                    e.values.iter().map(|&x| c(x, 0.0)),
                ));
        assert!(resid.norm() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        assert!(matches!(
            hermitian_eig(&m, &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn empty_matrix() {
        let e = hermitian_eig(&ComplexMatrix::zeros(0, 0), &tol()).unwrap();
        assert_eq!(e.dim(), 0);
    }
}
