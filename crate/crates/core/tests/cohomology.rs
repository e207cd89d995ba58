//! Integral cohomology checked against ranks of independently built
//! coboundary matrices over prime fields (universal coefficients).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use vectk::cech::CechContext;
use vectk::fredholm::builtin_complex;
use vectk::simplicial::{integer_class, smith_normal_form, IntMatrix, SimplicialComplex};

/// `delta_k` as dense rows over Z: rows are (k+1)-simplices.
fn coboundary_rows(k: &SimplicialComplex, deg: usize) -> Vec<Vec<i64>> {
    let cols = k.count(deg);
    k.simplices(deg + 1)
        .iter()
        .map(|s| {
            let mut row = vec![0i64; cols];
            for i in 0..s.len() {
                let mut face = s.to_vec();
                face.remove(i);
                let j = k.index_of(&face).unwrap();
                row[j] += if i % 2 == 0 { 1 } else { -1 };
            }
            row
        })
        .collect()
}

fn rank_mod(rows: &[Vec<i64>], p: i64) -> usize {
    let mut m: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| r.iter().map(|v| v.rem_euclid(p)).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][col], p - 2, p);
        for v in m[rank].iter_mut() {
            *v = *v * inv % p;
        }
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..cols {
                    m[r][c] = (m[r][c] - f * m[rank][c]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: i64, mut e: i64, p: i64) -> i64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// `dim H^deg(K; F_p)`.
fn mod_p_betti(k: &SimplicialComplex, deg: usize, p: i64) -> usize {
    let out = if k.count(deg + 1) > 0 {
        rank_mod(&coboundary_rows(k, deg), p)
    } else {
        0
    };
    let inc = if deg > 0 {
        rank_mod(&coboundary_rows(k, deg - 1), p)
    } else {
        0
    };
    k.count(deg) - out - inc
}

fn check_against_oracle(k: &SimplicialComplex) {
    let ctx = CechContext::new(k.clone());
    let top = k.dim().unwrap();
    for deg in 0..=top {
        let b = mod_p_betti(k, deg, 1_000_003);
        let g = ctx.group(deg);
        assert_eq!(g.free_rank, b, "rank of H^{deg}");
        for p in [2i64, 3, 5, 7] {
            let count = |d: usize| {
                ctx.group(d)
                    .torsion
                    .iter()
                    .filter(|t| (*t % BigInt::from(p)).is_zero())
                    .count()
            };
            assert_eq!(
                mod_p_betti(k, deg, p),
                b + count(deg) + count(deg + 1),
                "H^{deg} mod {p}"
            );
        }
    }
}

fn describe(k: &SimplicialComplex) -> Vec<String> {
    let ctx = CechContext::new(k.clone());
    (0..=k.dim().unwrap())
        .map(|d| ctx.group(d).describe())
        .collect()
}

#[test]
fn spheres_and_circle() {
    for k in [
        SimplicialComplex::simplex_boundary(3),
        SimplicialComplex::simplex_boundary(4),
        SimplicialComplex::circle(7),
    ] {
        check_against_oracle(&k);
    }
    assert_eq!(
        describe(&SimplicialComplex::simplex_boundary(4)),
        ["Z", "0", "0", "Z"]
    );
}

#[test]
fn rp2_times_circle() {
    let k = builtin_complex("rp2xs1").unwrap();
    check_against_oracle(&k);
    assert_eq!(describe(&k), ["Z", "Z", "Z/2", "Z/2"]);
    assert_eq!(k.euler_characteristic(), 0);
}

#[test]
fn suspended_moore_spaces() {
    for n in 2..=4 {
        let k = builtin_complex(&format!("suspended-moore-{n}")).unwrap();
        check_against_oracle(&k);
        assert_eq!(CechContext::new(k).group(3).describe(), format!("Z/{n}"));
    }
}

#[test]
fn torsion_generators_have_their_order() {
    let k = builtin_complex("rp2xs1").unwrap();
    let ctx = CechContext::new(k.clone());
    let h3 = ctx.group(3);
    let z = &h3.torsion_generators[0];
    let class = integer_class(&k, z).unwrap();
    assert_eq!(class.coordinates.torsion, vec![BigInt::from(1)]);
    assert!(integer_class(&k, &z.scale(&BigInt::from(2)))
        .unwrap()
        .coordinates
        .is_zero());
    assert!(
        integer_class(&k, &z.scale(&BigInt::from(3)))
            .unwrap()
            .coordinates
            .torsion
            == vec![BigInt::from(1)]
    );
}

fn gcd_all(m: &IntMatrix) -> BigInt {
    let mut g = BigInt::zero();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            g = g.gcd(m.get(i, j));
        }
    }
    g
}

proptest! {
    #[test]
    fn smith_factors_match_determinant_and_gcd(n in 1usize..6, entries in proptest::collection::vec(-6i64..7, 36)) {
        let rows: Vec<Vec<i64>> = (0..n).map(|i| entries[i * 6..i * 6 + n].to_vec()).collect();
        let m = IntMatrix::from_rows(&rows);
        let form = smith_normal_form(&m);
        let factors = form.invariant_factors();
        let det = m.determinant();
        if det.is_zero() {
            prop_assert!(factors.len() < n);
        } else {
            let prod = factors.iter().fold(BigInt::from(1), |a, d| a * d);
            prop_assert_eq!(prod, det.abs());
        }
        if let Some(d1) = factors.first() {
            prop_assert_eq!(d1, &gcd_all(&m));
        }
    }
}
