use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use vectk::fredholm::{approximate_single, random_operator};
use vectk::linalg::{
    c, hat, hermitian_eig, low_spectrum, spectral_gaps, ComplexMatrix, GradedSpace, OddMap,
};
use vectk::Tolerances;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), rows * cols).prop_map(move |v| {
        DMatrix::from_iterator(rows, cols, v.into_iter().map(|(re, im)| c(re, im)))
    })
}

fn shaped() -> impl Strategy<Value = ComplexMatrix> {
    (0usize..6, 0usize..6).prop_flat_map(|(r, c)| matrix(r, c))
}

/// Eigenvalues from nalgebra's own Hermitian solver, ascending.
fn oracle_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #[test]
    fn jacobi_matches_reference(a in (1usize..8).prop_flat_map(|n| matrix(n, n))) {
        let tol = Tolerances::default();
        let h = &a + a.adjoint();
        let eig = hermitian_eig(&h, &tol).unwrap();
        for (x, y) in eig.values.iter().zip(oracle_values(&h)) {
            prop_assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()));
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            eig.dim(),
            eig.values.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let recon = &eig.vectors * d * eig.vectors.adjoint();
        prop_assert!((recon - &h).norm() < 1e-9 * (1.0 + h.norm()));
    }

    #[test]
    fn hat_squares_to_gram_blocks(a in shaped()) {
        let h = hat(&a);
        let (even, odd) = h.square_blocks();
        prop_assert!((even - a.adjoint() * &a).norm() < 1e-12);
        prop_assert!((odd - &a * a.adjoint()).norm() < 1e-12);
        prop_assert_eq!(h.space(), GradedSpace::new(a.ncols(), a.nrows()));
    }

    #[test]
    fn low_spectrum_dimension_and_index(a in shaped(), mu in 0.05f64..6.0) {
        let tol = Tolerances::default();
        let h = hat(&a);
        let all = oracle_values(&(h.matrix() * h.matrix()));
        prop_assume!(all.iter().all(|v| (v - mu).abs() > 1e-5));
        let sub = low_spectrum(&h, mu, &tol).unwrap();
        prop_assert_eq!(sub.dim(), all.iter().filter(|&&v| v < mu).count());
        // nonzero spectrum pairs up between the degrees
        let zeros_even = oracle_values(&(a.adjoint() * &a)).iter().filter(|&&v| v < mu).count();
        prop_assert_eq!(sub.dim_even, zeros_even);
    }

    #[test]
    fn truncation_keeps_index(n0 in 0usize..7, n1 in 0usize..7, seed in any::<u64>(), lambda in 0.5f64..5.0) {
        let rank = n0.min(n1);
        let k = rank.min((seed % 3) as usize);
        let a = random_operator(n0, n1, n0 - (rank - k), n1 - (rank - k), seed).unwrap();
        let tol = Tolerances::default();
        let s = approximate_single(&a, lambda, &tol).unwrap();
        prop_assert_eq!(s.subspace.index(), n0 as i64 - n1 as i64);
        let h2 = &s.h * &s.h;
        let low: Vec<f64> = s.spectrum.iter().copied().filter(|&v| v < s.mu).collect();
        for (x, y) in oracle_values(&h2).iter().zip(&low) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn gaps_avoid_every_spectrum() {
    let spectra = vec![vec![0.0, 1.0, 3.0], vec![0.1, 2.0]];
    let gaps = spectral_gaps(&spectra, 2.5, 1e-6);
    assert_eq!(gaps, vec![(0.0, 0.1), (0.1, 1.0), (1.0, 2.0), (2.0, 2.5)]);
    for (lo, hi) in gaps {
        for s in &spectra {
            assert!(s.iter().all(|&v| v <= lo || v >= hi));
        }
    }
}

#[test]
fn odd_map_rejects_even_part() {
    let tol = Tolerances::default();
    let m =
        ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(OddMap::new(GradedSpace::new(1, 1), m, &tol).is_err());
}
