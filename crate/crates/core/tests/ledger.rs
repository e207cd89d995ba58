use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;
use vectk::fredholm::{
    approximate_family, approximate_single, approximate_twisted_family, builtin_scenario,
    random_operator, FredholmFamily, ScenarioInput, ScenarioParams,
};
use vectk::ledger::{
    add, class_of, equals, negate, witness_isomorphism, Equality, FormalDifference,
};
use vectk::simplicial::{SimplicialComplex, StarCover};
use vectk::vectorial::{direct_sum, gauge_transform, BundleMap, VectorialBundle};
use vectk::Tolerances;

fn point_bundle(n0: usize, n1: usize, k: usize, seed: u64) -> VectorialBundle {
    let tol = Tolerances::default();
    let r = n0.min(n1).saturating_sub(k);
    let a = random_operator(n0, n1, n0 - r, n1 - r, seed).unwrap();
    let cover = Arc::new(StarCover::new(SimplicialComplex::build(&[vec![0]])));
    approximate_family(&FredholmFamily::constant(cover, &a), 0.5, &tol)
        .unwrap()
        .bundle
}

fn shape() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (0usize..6, 0usize..6, 0usize..3, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn point_classes_are_the_index((n0, n1, k, seed) in shape(), (m0, m1, l, seed2) in shape()) {
        let tol = Tolerances::default();
        let (a, b) = (point_bundle(n0, n1, k, seed), point_bundle(m0, m1, l, seed2));
        let ca = class_of(&a, "a", &tol).unwrap();
        let cb = class_of(&b, "b", &tol).unwrap();
        prop_assert_eq!(ca.index.clone(), vec![n0 as i64 - n1 as i64]);
        let single = approximate_single(&random_operator(n0, n1, n0 - n0.min(n1).saturating_sub(k), n1 - n0.min(n1).saturating_sub(k), seed).unwrap(), 0.5, &tol).unwrap();
        prop_assert_eq!(ca.index[0], single.subspace.index());

        let (da, db) = (FormalDifference::class(ca), FormalDifference::class(cb));
        let sum = add(&da, &db).unwrap();
        let direct = FormalDifference::class(class_of(&direct_sum(&a, &b).unwrap(), "a+b", &tol).unwrap());
        prop_assert_eq!(equals(&sum, &direct), Equality::Equal);
        let diff = add(&da, &negate(&db)).unwrap();
        prop_assert_eq!(diff.index(), vec![(n0 as i64 - n1 as i64) - (m0 as i64 - m1 as i64)]);
        let verdict = equals(&da, &db);
        prop_assert_ne!(verdict, Equality::Unknown);
        prop_assert_eq!(verdict == Equality::Equal, n0 as i64 - n1 as i64 == m0 as i64 - m1 as i64);
        prop_assert_eq!(equals(&add(&diff, &db).unwrap(), &da), Equality::Equal);
        prop_assert_eq!(equals(&da, &db), equals(&db, &da));
    }
}

#[test]
fn pauli_descriptor_carries_the_torsion_twist() {
    let tol = Tolerances::default();
    let s = builtin_scenario("pauli-torsion", &ScenarioParams::default(), &tol).unwrap();
    let ScenarioInput::Twisted(t) = &s.input else {
        unreachable!()
    };
    let vb = approximate_twisted_family(t, s.lambda_max, &tol)
        .unwrap()
        .bundle;
    let d = class_of(&vb, "pauli", &tol).unwrap();
    assert_eq!(d.index, vec![0]);
    assert_eq!(d.twist.torsion, vec![BigInt::from(1)]);
    assert_eq!(d.twist.torsion_orders, vec![BigInt::from(2)]);
    let untwisted = FormalDifference::class(
        class_of(&VectorialBundle::zero(vb.cover().clone(), None), "0", &tol).unwrap(),
    );
    assert!(add(&FormalDifference::class(d), &untwisted).is_err());
}

#[test]
fn isomorphic_bundles_are_never_distinct() {
    let tol = Tolerances::default();
    let s = builtin_scenario("bott-s2", &ScenarioParams::default(), &tol).unwrap();
    let ScenarioInput::Family(f) = &s.input else {
        unreachable!()
    };
    let vb = approximate_family(f, s.lambda_max, &tol).unwrap().bundle;
    let u = BundleMap {
        maps: vb
            .locals()
            .iter()
            .map(|l| {
                l.fibers
                    .iter()
                    .map(|(x, f)| {
                        (
                            *x,
                            vectk::linalg::ComplexMatrix::identity(f.dim(), f.dim())
                                * vectk::linalg::c(0.0, 1.0),
                        )
                    })
                    .collect()
            })
            .collect(),
    };
    let moved = gauge_transform(&vb, &u).unwrap();
    let mut a = class_of(&vb, "bott", &tol).unwrap();
    let mut b = class_of(&moved, "bott'", &tol).unwrap();
    assert_eq!(
        equals(
            &FormalDifference::class(a.clone()),
            &FormalDifference::class(b.clone())
        ),
        Equality::Unknown
    );
    assert!(witness_isomorphism(&mut a, &mut b, (&u, &u.adjoint()), (&vb, &moved), &tol).unwrap());
    let (da, db) = (FormalDifference::class(a), FormalDifference::class(b));
    assert_eq!(equals(&da, &db), Equality::Equal);
    assert!(add(&da, &negate(&db)).unwrap().is_empty());
    let json = da.to_json();
    assert_eq!(json["index"], serde_json::json!([1]));
}
