//! Dense complex linear algebra on finite Z2-graded Hermitian spaces.
//!
//! A graded space `E = E0 + E1` is always laid out with the even coordinates
//! first. Odd (degree 1) maps are block off-diagonal in that layout, degree 0
//! maps are block diagonal.

mod eigen;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub use eigen::{hermitian_defect, hermitian_eig, HermitianEigen};

pub type ComplexMatrix = DMatrix<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Frobenius norm.
pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `max |M*M - I|` over entries; zero for an empty column set.
pub fn orthonormality_defect(m: &ComplexMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let n = gram.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedSpace {
    pub dim_even: usize,
    pub dim_odd: usize,
}

impl GradedSpace {
    pub fn new(dim_even: usize, dim_odd: usize) -> Self {
        Self { dim_even, dim_odd }
    }

    pub fn dim(&self) -> usize {
        self.dim_even + self.dim_odd
    }

    pub fn index(&self) -> i64 {
        self.dim_even as i64 - self.dim_odd as i64
    }
}

/// Hermitian map of degree 1 on a graded space.
#[derive(Clone, Debug, PartialEq)]
pub struct OddMap {
    space: GradedSpace,
    matrix: ComplexMatrix,
}

impl OddMap {
    /// Checks hermiticity and the off-diagonal block form.
    pub fn new(space: GradedSpace, matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "odd map on a space of dimension {n} given as {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !is_finite(&matrix) {
            return Err(Error::Format("odd map has non-finite entries".into()));
        }
        let scale = matrix.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
        let defect = hermitian_defect(&matrix);
        if defect > tol.herm * scale {
            return Err(Error::NotHermitian { defect });
        }
        let diag = degree_defect(&matrix, space, space, Parity::Odd);
        if diag > tol.herm * scale {
            return Err(Error::ShapeMismatch(format!(
                "map is not of degree 1 (even-even/odd-odd block size {diag:.3e})"
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn zero(space: GradedSpace) -> Self {
        let n = space.dim();
        Self {
            space,
            matrix: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn space(&self) -> GradedSpace {
        self.space
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// The odd-to-even block (`A*` for a hat map), `n0 x n1`.
    pub fn upper_block(&self) -> ComplexMatrix {
        let (n0, n1) = (self.space.dim_even, self.space.dim_odd);
        self.matrix.view((0, n0), (n0, n1)).into_owned()
    }

    /// The even-to-odd block (`A` for a hat map), `n1 x n0`.
    pub fn lower_block(&self) -> ComplexMatrix {
        let (n0, n1) = (self.space.dim_even, self.space.dim_odd);
        self.matrix.view((n0, 0), (n1, n0)).into_owned()
    }

    /// The two diagonal blocks of the square, which preserves degree.
    pub fn square_blocks(&self) -> (ComplexMatrix, ComplexMatrix) {
        let upper = self.upper_block();
        let lower = self.lower_block();
        (&upper * &lower, &lower * &upper)
    }

    /// Eigendecompositions of the even and odd blocks of the square.
    pub fn square_spectrum(&self, tol: &Tolerances) -> Result<GradedSpectrum> {
        let (even, odd) = self.square_blocks();
        Ok(GradedSpectrum {
            space: self.space,
            even: hermitian_eig(&even, tol)?,
            odd: hermitian_eig(&odd, tol)?,
        })
    }
}

/// Spectrum of the square of an odd map, kept separately per degree.
#[derive(Clone, Debug)]
pub struct GradedSpectrum {
    pub space: GradedSpace,
    pub even: HermitianEigen,
    pub odd: HermitianEigen,
}

impl GradedSpectrum {
    /// All eigenvalues (both degrees), ascending, clamped at zero.
    pub fn values(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .even
            .values
            .iter()
            .chain(self.odd.values.iter())
            .map(|v| v.max(0.0))
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Graded dimensions of the part of the spectrum strictly below `mu`.
    pub fn dims_below(&self, mu: f64) -> (usize, usize) {
        (self.even.count_below(mu), self.odd.count_below(mu))
    }

    pub fn check_admissible(&self, mu: f64, gap_tol: f64) -> Result<()> {
        let hit = self
            .even
            .values
            .iter()
            .chain(self.odd.values.iter())
            .any(|&v| (v.max(0.0) - mu).abs() <= gap_tol);
        if hit {
            Err(Error::CutoffOnSpectrum { mu, gap_tol })
        } else {
            Ok(())
        }
    }

    /// Low-spectrum subspace for an admissible cutoff.
    pub fn subspace_below(&self, mu: f64, gap_tol: f64) -> Result<GradedSubspace> {
        self.check_admissible(mu, gap_tol)?;
        let (k0, k1) = self.dims_below(mu);
        let (n0, n1) = (self.space.dim_even, self.space.dim_odd);
        let mut basis = ComplexMatrix::zeros(n0 + n1, k0 + k1);
        basis
            .view_mut((0, 0), (n0, k0))
            .copy_from(&self.even.vectors.columns(0, k0));
        basis
            .view_mut((n0, k0), (n1, k1))
            .copy_from(&self.odd.vectors.columns(0, k1));
        let labels = self.even.values[..k0]
            .iter()
            .chain(self.odd.values[..k1].iter())
            .map(|v| v.max(0.0))
            .collect();
        Ok(GradedSubspace {
            ambient: self.space,
            basis,
            dim_even: k0,
            labels,
        })
    }
}

/// A subspace spanned by homogeneous orthonormal vectors, even ones first.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSubspace {
    pub ambient: GradedSpace,
    /// `ambient.dim() x dim()` matrix of basis columns.
    pub basis: ComplexMatrix,
    pub dim_even: usize,
    /// Eigenvalue of the squared map attached to each basis vector.
    pub labels: Vec<f64>,
}

impl GradedSubspace {
    pub fn zero(ambient: GradedSpace) -> Self {
        Self {
            ambient,
            basis: ComplexMatrix::zeros(ambient.dim(), 0),
            dim_even: 0,
            labels: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim_odd(&self) -> usize {
        self.dim() - self.dim_even
    }

    pub fn graded_dims(&self) -> GradedSpace {
        GradedSpace::new(self.dim_even, self.dim_odd())
    }

    pub fn index(&self) -> i64 {
        self.graded_dims().index()
    }

    /// Orthogonal projector onto the subspace, in ambient coordinates.
    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Restriction `B* M B` of an ambient map to the subspace.
    pub fn compress(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint() * m * &self.basis
    }
}

/// `A -> [[0, A*], [A, 0]]` on `GradedSpace(n0, n1)` for an `n1 x n0` matrix `A`.
pub fn hat(a: &ComplexMatrix) -> OddMap {
    let (n1, n0) = a.shape();
    let space = GradedSpace::new(n0, n1);
    let mut m = ComplexMatrix::zeros(n0 + n1, n0 + n1);
    m.view_mut((0, n0), (n0, n1)).copy_from(&a.adjoint());
    m.view_mut((n0, 0), (n1, n0)).copy_from(a);
    OddMap { space, matrix: m }
}

/// Span of the eigenvectors of `h^2` with eigenvalue below `mu`.
pub fn low_spectrum(h: &OddMap, mu: f64, tol: &Tolerances) -> Result<GradedSubspace> {
    h.square_spectrum(tol)?.subspace_below(mu, tol.gap)
}

/// Open intervals `(lo, hi)` below `lambda_max` that avoid every spectrum and
/// are wider than `2 * gap_tol`, in ascending order.
pub fn spectral_gaps(spectra: &[Vec<f64>], lambda_max: f64, gap_tol: f64) -> Vec<(f64, f64)> {
    let mut points: Vec<f64> = spectra
        .iter()
        .flatten()
        .map(|v| v.max(0.0))
        .filter(|&v| v < lambda_max)
        .collect();
    points.sort_by(f64::total_cmp);
    let mut gaps = Vec::new();
    let mut lo = 0.0;
    for p in points.into_iter().chain(std::iter::once(lambda_max)) {
        if p - lo > 2.0 * gap_tol {
            gaps.push((lo, p));
        }
        lo = lo.max(p);
    }
    gaps
}

/// Midpoint of the widest common spectral gap below `lambda_max`; ties go to
/// the lowest gap.
pub fn select_gap(spectra: &[Vec<f64>], lambda_max: f64, gap_tol: f64) -> Result<f64> {
    if spectra.is_empty() || !(lambda_max > 0.0) {
        return Err(Error::NoGap {
            lambda_max,
            gap_tol,
            patch: None,
        });
    }
    widest(&spectral_gaps(spectra, lambda_max, gap_tol))
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .ok_or(Error::NoGap {
            lambda_max,
            gap_tol,
            patch: None,
        })
}

pub(crate) fn widest(gaps: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &(lo, hi) in gaps {
        if best.map_or(true, |(blo, bhi)| hi - lo > bhi - blo) {
            best = Some((lo, hi));
        }
    }
    best
}

/// Matrix of (projection onto `target`) composed with (inclusion of `sub`),
/// `target.dim() x sub.dim()`.
pub fn orthogonal_project(sub: &GradedSubspace, target: &GradedSubspace) -> Result<ComplexMatrix> {
    if sub.ambient != target.ambient {
        return Err(Error::AmbientMismatch);
    }
    Ok(target.basis.adjoint() * &sub.basis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Largest entry in the blocks a map of the given parity must leave empty.
/// `source` describes the columns, `target` the rows.
pub fn degree_defect(
    m: &ComplexMatrix,
    source: GradedSpace,
    target: GradedSpace,
    parity: Parity,
) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        let row_even = i < target.dim_even;
        for j in 0..m.ncols() {
            let col_even = j < source.dim_even;
            let allowed = match parity {
                Parity::Even => row_even == col_even,
                Parity::Odd => row_even != col_even,
            };
            if !allowed {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Block-diagonal matrix with the given blocks on the diagonal.
pub fn block_diagonal(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), b.shape()).copy_from(*b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Unitary factor `Q` of the polar decomposition `M = Q |M|` of a square
/// matrix, or `None` when `M` is numerically singular.
pub fn polar_unitary(m: &ComplexMatrix, tol: &Tolerances) -> Option<ComplexMatrix> {
    let n = m.nrows();
    if n != m.ncols() {
        return None;
    }
    if n == 0 {
        return Some(ComplexMatrix::zeros(0, 0));
    }
    let gram = m.adjoint() * m;
    let eig = hermitian_eig(&gram, tol).ok()?;
    if eig.values[0] <= 1e-10 {
        return None;
    }
    let inv_sqrt = ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| eig.vectors[(i, k)] * eig.vectors[(j, k)].conj() / eig.values[k].sqrt())
            .sum()
    });
    Some(m * inv_sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn real(rows: usize, cols: usize, vals: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            rows,
            cols,
            &vals.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn hat_of_zero_is_zero() {
        let h = hat(&ComplexMatrix::zeros(1, 1));
        assert_eq!(h.space(), GradedSpace::new(1, 1));
        assert!(h.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn hat_of_scalar_two_squares_to_four() {
        let h = hat(&real(1, 1, &[2.0]));
        let s = h.square_spectrum(&tol()).unwrap();
        assert_eq!(s.values(), vec![4.0, 4.0]);
    }

    #[test]
    fn hat_of_diagonal() {
        let h = hat(&real(2, 2, &[0.1, 0.0, 0.0, 3.0]));
        let vals = h.square_spectrum(&tol()).unwrap().values();
        let want = [0.01, 0.01, 9.0, 9.0];
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn hat_is_hermitian_and_odd() {
        let a = ComplexMatrix::from_fn(3, 2, |i, j| c(i as f64 - j as f64, 0.5 * (i * j) as f64));
        let h = hat(&a);
        OddMap::new(h.space(), h.matrix().clone(), &tol()).unwrap();
    }

    #[test]
    fn low_spectrum_of_diagonal_below_one() {
        let h = hat(&real(2, 2, &[0.1, 0.0, 0.0, 3.0]));
        let sub = low_spectrum(&h, 1.0, &tol()).unwrap();
        assert_eq!((sub.dim_even, sub.dim_odd()), (1, 1));
        assert!(sub.labels.iter().all(|l| (l - 0.01).abs() < 1e-12));
    }

    #[test]
    fn low_spectrum_below_everything_is_zero() {
        let h = hat(&real(2, 2, &[0.5, 0.0, 0.0, 3.0]));
        let sub = low_spectrum(&h, 0.1, &tol()).unwrap();
        assert_eq!(sub.dim(), 0);
    }

    #[test]
    fn low_spectrum_at_kernel_is_ker_plus_coker() {
        // A: C^3 -> C^2 with kernel span(e2) and cokernel span(f1).
        let a = real(2, 3, &[1.5, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let sub = low_spectrum(&hat(&a), 1.0, &tol()).unwrap();
        assert_eq!((sub.dim_even, sub.dim_odd()), (2, 1));
        // every basis vector is killed by A-hat
        let ha = hat(&a);
        assert!(frobenius(&(ha.matrix() * &sub.basis)) < 1e-12);
    }

    #[test]
    fn cutoff_on_spectrum_is_rejected() {
        let h = hat(&real(1, 1, &[1.0]));
        assert!(matches!(
            low_spectrum(&h, 1.0, &tol()),
            Err(Error::CutoffOnSpectrum { .. })
        ));
    }

    #[test]
    fn select_gap_examples() {
        assert_eq!(select_gap(&[vec![0.0, 4.0]], 4.0, 1e-6).unwrap(), 2.0);
        let mu = select_gap(&[vec![0.01, 9.0], vec![0.02, 8.0]], 5.0, 1e-6).unwrap();
        assert!((mu - 2.51).abs() < 1e-12);
    }

    #[test]
    fn select_gap_on_dense_grid_fails() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 1e-6).collect();
        assert!(matches!(
            select_gap(&[grid], 1e-5, 1e-6),
            Err(Error::NoGap { .. })
        ));
    }

    #[test]
    fn projection_identity_and_orthogonal() {
        let h = hat(&real(2, 2, &[0.1, 0.0, 0.0, 3.0]));
        let s = h.square_spectrum(&tol()).unwrap();
        let low = s.subspace_below(1.0, 1e-6).unwrap();
        let p = orthogonal_project(&low, &low).unwrap();
        assert!(frobenius(&(p - ComplexMatrix::identity(2, 2))) < 1e-12);

        // complement: eigenvalue 9 part
        let all = s.subspace_below(10.0, 1e-6).unwrap();
        let proj_low_into_all = orthogonal_project(&low, &all).unwrap();
        assert!(orthonormality_defect(&proj_low_into_all) < 1e-12);

        let mut high = all.clone();
        high.basis = ComplexMatrix::from_fn(4, 2, |i, j| {
            let col = if j == 0 { 1 } else { 3 };
            all.basis[(i, col)]
        });
        high.dim_even = 1;
        let zero = orthogonal_project(&low, &high).unwrap();
        assert!(frobenius(&zero) < 1e-12);
    }

    #[test]
    fn projection_across_ambients_fails() {
        let a = GradedSubspace::zero(GradedSpace::new(1, 1));
        let b = GradedSubspace::zero(GradedSpace::new(2, 1));
        assert!(matches!(
            orthogonal_project(&a, &b),
            Err(Error::AmbientMismatch)
        ));
    }
}
