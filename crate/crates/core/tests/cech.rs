use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use vectk::cech::{
    dd_cocycle, recognize_turn, turn, u1_delta, CechContext, Obstruction, U1Cochain,
    UnitaryLiftSystem,
};
use vectk::fredholm::{builtin_complex, pauli_lifts};
use vectk::linalg::{c, ComplexMatrix};
use vectk::simplicial::{SimplicialComplex, StarCover};
use vectk::{Error, Tolerances};

/// Mod-2 cochains as 0/1 vectors indexed like the complex's simplices.
fn mod2_delta_rows(k: &SimplicialComplex, deg: usize) -> Vec<Vec<u8>> {
    let cols = k.count(deg);
    k.simplices(deg + 1)
        .iter()
        .map(|s| {
            let mut row = vec![0u8; cols];
            for i in 0..s.len() {
                let mut face = s.to_vec();
                face.remove(i);
                row[k.index_of(&face).unwrap()] ^= 1;
            }
            row
        })
        .collect()
}

/// Whether `v` lies in the column span of `delta_deg` over F_2.
fn is_mod2_coboundary(k: &SimplicialComplex, deg: usize, v: &[u8]) -> bool {
    let rows = mod2_delta_rows(k, deg);
    let cols = k.count(deg);
    // augmented system rows: [delta | v]
    let mut m: Vec<Vec<u8>> = rows
        .iter()
        .zip(v)
        .map(|(r, &b)| r.iter().copied().chain([b]).collect())
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][col] == 1) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][col] == 1 {
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    m[rank..].iter().all(|r| r[cols] == 0)
}

/// The Z/2 classes the Pauli lifts are built from, read off vertex labels
/// `v = 3 p + s` (RP^2 vertex p, circle vertex s).
fn rp2_class(a: usize, b: usize) -> u8 {
    let (p, q) = ((a / 3).min(b / 3), (a / 3).max(b / 3));
    u8::from([(1, 2), (1, 4), (2, 3), (3, 5), (4, 5)].contains(&(p, q)))
}

fn circle_class(a: usize, b: usize) -> u8 {
    let (s, t) = ((a % 3).min(b % 3), (a % 3).max(b % 3));
    u8::from((s, t) == (0, 2))
}

#[test]
fn pauli_cocycle_is_half_the_cup_product() {
    let tol = Tolerances::default();
    let k = builtin_complex("rp2xs1").unwrap();
    let cover = Arc::new(StarCover::new(k.clone()));
    let c2 = dd_cocycle(&pauli_lifts(cover, &tol).unwrap(), &tol).unwrap();
    for (s, q) in k.simplices(2).iter().zip(c2.turns()) {
        let cup = rp2_class(s[0], s[1]) * circle_class(s[1], s[2]);
        assert_eq!(q, &turn(i64::from(cup), 2), "triangle {s:?}");
    }
}

#[test]
fn pauli_class_is_the_nonzero_element_of_z2() {
    let tol = Tolerances::default();
    let k = builtin_complex("rp2xs1").unwrap();
    let cover = Arc::new(StarCover::new(k.clone()));
    let c2 = dd_cocycle(&pauli_lifts(cover, &tol).unwrap(), &tol).unwrap();
    let ctx = CechContext::new(k.clone());
    let class = ctx.dd_class(&c2).unwrap();
    assert_eq!(class.coordinates.torsion_orders, vec![BigInt::from(2)]);
    assert_eq!(class.coordinates.torsion, vec![BigInt::from(1)]);
    assert!(class.coordinates.free.is_empty());

    // Sq^1 (x t) = x x t mod 2 must be the mod-2 reduction of the class
    let sq: Vec<u8> = k
        .simplices(3)
        .iter()
        .map(|s| rp2_class(s[0], s[1]) * rp2_class(s[1], s[2]) * circle_class(s[2], s[3]))
        .collect();
    assert!(
        !is_mod2_coboundary(&k, 2, &sq),
        "x x t is nonzero in H^3(F_2)"
    );
    let reduced: Vec<u8> = class
        .integer_cocycle
        .values
        .iter()
        .zip(&sq)
        .map(|(v, s)| u8::from(v.is_odd()) ^ s)
        .collect();
    assert!(is_mod2_coboundary(&k, 2, &reduced));
}

#[test]
fn pauli_rank_obstruction() {
    let tol = Tolerances::default();
    let k = builtin_complex("rp2xs1").unwrap();
    let cover = Arc::new(StarCover::new(k.clone()));
    let c2 = dd_cocycle(&pauli_lifts(cover, &tol).unwrap(), &tol).unwrap();
    let ctx = CechContext::new(k);
    for r in 1..=6u32 {
        match ctx.rank_obstruction(&c2, r).unwrap() {
            Obstruction::Solvable(w) => {
                assert!(r % 2 == 0);
                assert!(ctx.check_witness(&c2, r, &w));
            }
            Obstruction::Obstructed { order } => {
                assert!(r % 2 == 1);
                assert_eq!(order, Some(BigInt::from(2)));
            }
        }
    }
}

#[test]
fn synthesized_torsion_classes() {
    for n in 2..=4u32 {
        let k = builtin_complex(&format!("suspended-moore-{n}")).unwrap();
        let ctx = CechContext::new(k);
        let c2 = ctx.torsion_cocycle(3, 0).unwrap();
        assert!(ctx.is_cocycle(&c2));
        assert_eq!(
            ctx.dd_class(&c2).unwrap().coordinates.order(),
            Some(BigInt::from(n))
        );
        for r in 1..=12u32 {
            let verdict = ctx.rank_obstruction(&c2, r).unwrap();
            assert_eq!(verdict.is_solvable(), r % n == 0, "n = {n}, r = {r}");
            if let Obstruction::Solvable(w) = verdict {
                assert!(ctx.check_witness(&c2, r, &w));
                assert_eq!(
                    u1_delta(ctx.complex(), &w.potential),
                    c2.times(i64::from(r))
                );
            }
        }
    }
}

#[test]
fn lifts_that_are_not_projectively_flat() {
    let tol = Tolerances::default();
    let cover = Arc::new(StarCover::new(SimplicialComplex::build(&[vec![0, 1, 2]])));
    let h =
        ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)])
            * c(1.0 / 2f64.sqrt(), 0.0);
    let id = ComplexMatrix::identity(2, 2);
    let lifts = BTreeMap::from([((0, 1), h), ((1, 2), id.clone()), ((0, 2), id)]);
    let system = UnitaryLiftSystem::new(cover, 2, lifts, &tol).unwrap();
    assert!(matches!(
        dd_cocycle(&system, &tol),
        Err(Error::NotProjectivelyFlat { .. })
    ));
}

#[test]
fn irrational_phase_is_reported() {
    let tol = Tolerances::default();
    let cover = Arc::new(StarCover::new(SimplicialComplex::build(&[vec![0, 1, 2]])));
    let w = ComplexMatrix::identity(1, 1) * num_complex::Complex64::from_polar(1.0, 1.0);
    let id = ComplexMatrix::identity(1, 1);
    let lifts = BTreeMap::from([((0, 1), w), ((1, 2), id.clone()), ((0, 2), id)]);
    let system = UnitaryLiftSystem::new(cover, 1, lifts, &tol).unwrap();
    assert!(matches!(
        dd_cocycle(&system, &tol),
        Err(Error::IrrationalPhase { .. })
    ));
}

fn random_turns(len: usize) -> impl Strategy<Value = Vec<BigRational>> {
    proptest::collection::vec((0i64..12, 1i64..13), len)
        .prop_map(|v| v.into_iter().map(|(p, q)| turn(p, q)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coboundaries_are_solved(b in random_turns(builtin_complex("rp2xs1").unwrap().count(1))) {
        let k = builtin_complex("rp2xs1").unwrap();
        let ctx = CechContext::new(k.clone());
        let c2 = u1_delta(&k, &U1Cochain::new(1, b));
        let sol = ctx.solve_u1_coboundary(&c2).unwrap().expect("a coboundary is solvable");
        prop_assert_eq!(u1_delta(&k, &sol), c2.clone());
        prop_assert!(ctx.dd_class(&c2).unwrap().is_zero());
        prop_assert!(ctx.rank_obstruction(&c2, 1).unwrap().is_solvable());
    }

    #[test]
    fn class_is_additive(b in random_turns(builtin_complex("rp2xs1").unwrap().count(1)), m in 0i64..4) {
        let k = builtin_complex("rp2xs1").unwrap();
        let ctx = CechContext::new(k.clone());
        let z = ctx.torsion_cocycle(3, 0).unwrap();
        let c2 = z.times(m).add(&u1_delta(&k, &U1Cochain::new(1, b)));
        let class = ctx.dd_class(&c2).unwrap();
        prop_assert_eq!(class.coordinates.torsion, vec![BigInt::from(m % 2)]);
    }

    #[test]
    fn rational_phases_are_recognized(p in 0i64..200, q in 1i64..65) {
        let x = p as f64 / q as f64;
        let r = recognize_turn(x, 64, 1e-10).unwrap();
        prop_assert_eq!(r, turn(p, q));
    }
}

#[test]
fn zero_cochain_class() {
    let k = SimplicialComplex::simplex_boundary(4);
    let ctx = CechContext::new(k.clone());
    let z = U1Cochain::zero(&k, 2);
    assert!(ctx.dd_class(&z).unwrap().is_zero());
    assert!(ctx.rank_obstruction(&z, 1).unwrap().is_solvable());
    assert!(u1_delta(&k, &z).turns().iter().all(Zero::is_zero));
}
