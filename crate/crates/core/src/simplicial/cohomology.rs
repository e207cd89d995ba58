//! Integer cochains, coboundaries and integral cohomology via Smith forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::complex::SimplicialComplex;
use super::intmat::{smith_normal_form, IntMatrix, SmithForm};
use crate::error::{Error, Result};

/// Integer k-cochain, one value per ascending k-simplex in the complex's order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerCochain {
    pub degree: usize,
    pub values: Vec<BigInt>,
}

impl IntegerCochain {
    pub fn zero(complex: &SimplicialComplex, degree: usize) -> Self {
        Self {
            degree,
            values: vec![BigInt::zero(); complex.count(degree)],
        }
    }

    pub fn from_i64(degree: usize, values: &[i64]) -> Self {
        Self {
            degree,
            values: values.iter().map(|&v| BigInt::from(v)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    /// Value on an ordered tuple of distinct vertices; permuted tuples pick up
    /// the sign of the permutation. Tuples that are not simplices give zero.
    pub fn evaluate(&self, complex: &SimplicialComplex, tuple: &[usize]) -> BigInt {
        match sort_with_sign(tuple) {
            Some((sorted, sign)) => match complex.index_of(&sorted) {
                Some(i) if sorted.len() == self.degree + 1 => &self.values[i] * sign,
                _ => BigInt::zero(),
            },
            None => BigInt::zero(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        Self {
            degree: self.degree,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, r: &BigInt) -> Self {
        Self {
            degree: self.degree,
            values: self.values.iter().map(|v| v * r).collect(),
        }
    }
}

/// Sorts a tuple of vertices, returning the sign of the sorting permutation,
/// or `None` when a vertex repeats.
pub fn sort_with_sign(tuple: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut v = tuple.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// Matrix of `delta_k : C^k -> C^(k+1)` for any `k`; rows or columns may be empty.
pub(crate) fn delta(complex: &SimplicialComplex, k: usize) -> IntMatrix {
    let rows = complex.simplices(k + 1);
    let mut m = IntMatrix::zeros(rows.len(), complex.count(k));
    for (r, s) in rows.iter().enumerate() {
        for i in 0..s.len() {
            let mut face = s.clone();
            face.remove(i);
            let col = complex
                .index_of(&face)
                .expect("complex is closed under faces");
            m.set(r, col, BigInt::from(if i % 2 == 0 { 1 } else { -1 }));
        }
    }
    m
}

/// Matrix of `delta_(k-1) : C^(k-1) -> C^k`; zero columns when `k = 0`.
pub(crate) fn delta_into(complex: &SimplicialComplex, k: usize) -> IntMatrix {
    if k == 0 {
        IntMatrix::zeros(complex.count(0), 0)
    } else {
        delta(complex, k - 1)
    }
}

pub fn coboundary_matrix(complex: &SimplicialComplex, k: usize) -> Result<IntMatrix> {
    let dim = complex.dim().unwrap_or(0);
    if k >= dim {
        return Err(Error::DegreeOutOfRange {
            degree: k,
            min: 0,
            max: dim.saturating_sub(1),
        });
    }
    Ok(delta(complex, k))
}

pub fn coboundary(complex: &SimplicialComplex, c: &IntegerCochain) -> IntegerCochain {
    IntegerCochain {
        degree: c.degree + 1,
        values: delta(complex, c.degree).mul_vec(&c.values),
    }
}

/// Coordinates of a class: free part in the basis of free generators,
/// torsion part reduced modulo the orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCoordinates {
    pub free: Vec<BigInt>,
    pub torsion: Vec<BigInt>,
    pub torsion_orders: Vec<BigInt>,
}

impl ClassCoordinates {
    pub fn is_zero(&self) -> bool {
        self.free.iter().chain(&self.torsion).all(Zero::is_zero)
    }

    /// Order of the class, `None` if it has infinite order.
    pub fn order(&self) -> Option<BigInt> {
        if self.free.iter().any(|v| !v.is_zero()) {
            return None;
        }
        Some(
            self.torsion
                .iter()
                .zip(&self.torsion_orders)
                .fold(BigInt::one(), |acc, (c, d)| acc.lcm(&(d / c.gcd(d)))),
        )
    }
}

#[derive(Clone, Debug)]
pub struct IntegerClass {
    pub coordinates: ClassCoordinates,
    /// `b` with `delta b = c`, present when the class vanishes in positive degree.
    pub witness: Option<IntegerCochain>,
}

impl IntegerClass {
    pub fn is_zero(&self) -> bool {
        self.coordinates.is_zero()
    }
}

/// `H^k(K; Z)` with representative cocycles and the data needed to
/// decompose arbitrary cocycles.
#[derive(Clone, Debug)]
pub struct CohomologyGroup {
    pub degree: usize,
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
    pub free_generators: Vec<IntegerCochain>,
    pub torsion_generators: Vec<IntegerCochain>,
    delta_out: IntMatrix,
    image: SmithForm,
    image_factors: Vec<BigInt>,
    kernel: SmithForm,
    kernel_rank: usize,
}

impl CohomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Smith form `U delta_(k-1) V = D` of the incoming coboundary.
    pub(crate) fn image_form(&self) -> (&SmithForm, &[BigInt]) {
        (&self.image, &self.image_factors)
    }

    pub fn is_cocycle(&self, c: &IntegerCochain) -> bool {
        c.degree == self.degree && self.delta_out.mul_vec(&c.values).iter().all(Zero::is_zero)
    }

    pub fn integer_class(&self, c: &IntegerCochain) -> Result<IntegerClass> {
        if c.degree != self.degree || c.values.len() != self.delta_out.cols() {
            return Err(Error::ShapeMismatch(format!(
                "cochain of degree {} with {} values for H^{}",
                c.degree,
                c.values.len(),
                self.degree
            )));
        }
        if !self.is_cocycle(c) {
            return Err(Error::NotACocycle { degree: c.degree });
        }
        let y = self.image.u.mul_vec(&c.values);
        let r = self.image_factors.len();
        let mut torsion = Vec::new();
        let mut orders = Vec::new();
        for (yi, d) in y.iter().zip(&self.image_factors) {
            if !d.is_one() {
                torsion.push(yi.mod_floor(d));
                orders.push(d.clone());
            }
        }
        let w = self.kernel.v_inv.mul_vec(&y[r..]);
        debug_assert!(w[..self.kernel_rank].iter().all(Zero::is_zero));
        let free = w[self.kernel_rank..].to_vec();
        let coordinates = ClassCoordinates {
            free,
            torsion,
            torsion_orders: orders,
        };
        let witness = if coordinates.is_zero() && self.degree > 0 {
            let t: Vec<BigInt> = y[..r]
                .iter()
                .zip(&self.image_factors)
                .map(|(yi, d)| yi / d)
                .chain(std::iter::repeat(BigInt::zero()).take(self.image.v.rows() - r))
                .collect();
            Some(IntegerCochain {
                degree: self.degree - 1,
                values: self.image.v.mul_vec(&t),
            })
        } else {
            None
        };
        Ok(IntegerClass {
            coordinates,
            witness,
        })
    }

    /// Human-readable group, e.g. `Z^2 + Z/2`, or `0`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            n => parts.push(format!("Z^{n}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

pub fn cohomology(complex: &SimplicialComplex, k: usize) -> Result<CohomologyGroup> {
    let dim = complex.dim().unwrap_or(0);
    if k > dim {
        return Err(Error::DegreeOutOfRange {
            degree: k,
            min: 0,
            max: dim,
        });
    }
    Ok(compute_cohomology(complex, k))
}

/// Cohomology in any degree; above the dimension the group is trivial.
pub(crate) fn compute_cohomology(complex: &SimplicialComplex, k: usize) -> CohomologyGroup {
    let n_k = complex.count(k);
    let image = smith_normal_form(&delta_into(complex, k));
    let image_factors = image.invariant_factors();
    let r = image_factors.len();

    let delta_out = delta(complex, k);
    let shifted = delta_out.mul(&image.u_inv);
    debug_assert!((0..shifted.rows()).all(|i| (0..r).all(|j| shifted.get(i, j).is_zero())));
    let kernel = smith_normal_form(&shifted.columns_from(r));
    let kernel_rank = kernel.rank();
    let free_rank = n_k - r - kernel_rank;

    let lift = |y: Vec<BigInt>| IntegerCochain {
        degree: k,
        values: image.u_inv.mul_vec(&y),
    };
    let mut free_generators = Vec::with_capacity(free_rank);
    for j in kernel_rank..(n_k - r) {
        let mut y = vec![BigInt::zero(); r];
        y.extend(kernel.v.column(j));
        free_generators.push(lift(y));
    }
    let mut torsion = Vec::new();
    let mut torsion_generators = Vec::new();
    for (i, d) in image_factors.iter().enumerate() {
        if d.is_one() {
            continue;
        }
        let mut y = vec![BigInt::zero(); n_k];
        y[i] = BigInt::one();
        torsion.push(d.clone());
        torsion_generators.push(lift(y));
    }
    debug_assert!(torsion.iter().all(|d| d.is_positive()));
    CohomologyGroup {
        degree: k,
        free_rank,
        torsion,
        free_generators,
        torsion_generators,
        delta_out,
        image,
        image_factors,
        kernel,
        kernel_rank,
    }
}

pub fn integer_class(complex: &SimplicialComplex, c: &IntegerCochain) -> Result<IntegerClass> {
    cohomology(complex, c.degree)?.integer_class(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sphere(n: usize) -> SimplicialComplex {
        SimplicialComplex::simplex_boundary(n)
    }

    #[test]
    fn edge_coboundary_sign() {
        let k = SimplicialComplex::build(&[vec![0, 1]]);
        let m = coboundary_matrix(&k, 0).unwrap();
        assert_eq!(m, IntMatrix::from_rows(&[vec![-1, 1]]));
        assert!(matches!(
            coboundary_matrix(&k, 1),
            Err(Error::DegreeOutOfRange { .. })
        ));
    }

    #[test]
    fn tetrahedron_boundary_degree_one() {
        let k = sphere(3);
        let m = coboundary_matrix(&k, 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 6));
        // triangle [0,1,2] sees edges [1,2] - [0,2] + [0,1]
        let edges = k.simplices(1);
        let row: Vec<i64> = m.row(0).iter().map(|v| i64::try_from(v).unwrap()).collect();
        let pos = |e: [usize; 2]| edges.iter().position(|x| x[..] == e[..]).unwrap();
        assert_eq!(row[pos([1, 2])], 1);
        assert_eq!(row[pos([0, 2])], -1);
        assert_eq!(row[pos([0, 1])], 1);
        assert_eq!(row.iter().filter(|v| **v != 0).count(), 3);
    }

    #[test]
    fn delta_squared_vanishes() {
        for k in [sphere(3), sphere(4), SimplicialComplex::circle(5)] {
            for d in 0..k.dim().unwrap() {
                assert!(delta(&k, d + 1).mul(&delta(&k, d)).is_zero());
            }
        }
    }

    #[test]
    fn two_sphere() {
        let k = sphere(3);
        let h: Vec<String> = (0..=2)
            .map(|d| cohomology(&k, d).unwrap().describe())
            .collect();
        assert_eq!(h, ["Z", "0", "Z"]);
        assert!(cohomology(&k, 3).is_err());
    }

    #[test]
    fn three_sphere_generator() {
        let k = sphere(4);
        let h3 = cohomology(&k, 3).unwrap();
        assert_eq!(h3.describe(), "Z");
        let class = h3.integer_class(&h3.free_generators[0]).unwrap();
        assert_eq!(class.coordinates.free, vec![BigInt::one()]);
        // the indicator of one tetrahedron generates as well
        let mut c = IntegerCochain::zero(&k, 3);
        c.values[2] = BigInt::one();
        let class = h3.integer_class(&c).unwrap();
        assert!(class.coordinates.free[0].abs().is_one());
    }

    #[test]
    fn zero_and_exact_classes() {
        let k = sphere(4);
        let h2 = cohomology(&k, 2).unwrap();
        let class = h2.integer_class(&IntegerCochain::zero(&k, 2)).unwrap();
        assert!(class.is_zero());
        assert!(class.witness.unwrap().is_zero());

        let b = IntegerCochain::from_i64(1, &[3, -1, 4, 1, -5, 9, 2, -6, 5, 3]);
        let c = coboundary(&k, &b);
        let class = h2.integer_class(&c).unwrap();
        assert!(class.is_zero());
        assert_eq!(coboundary(&k, &class.witness.unwrap()), c);
    }

    #[test]
    fn non_cocycle_rejected() {
        let k = sphere(3);
        let h1 = cohomology(&k, 1).unwrap();
        let c = IntegerCochain::from_i64(1, &[1, 0, 0, 0, 0, 0]);
        assert!(matches!(
            h1.integer_class(&c),
            Err(Error::NotACocycle { degree: 1 })
        ));
    }

    #[test]
    fn circle_and_point() {
        let k = SimplicialComplex::circle(4);
        assert_eq!(cohomology(&k, 1).unwrap().describe(), "Z");
        let p = SimplicialComplex::build(&[vec![0]]);
        assert_eq!(cohomology(&p, 0).unwrap().describe(), "Z");
    }

    #[test]
    fn euler_characteristic_matches_betti_numbers() {
        for k in [sphere(3), sphere(4), SimplicialComplex::circle(6)] {
            let betti: i64 = (0..=k.dim().unwrap())
                .map(|d| {
                    let r = cohomology(&k, d).unwrap().free_rank as i64;
                    if d % 2 == 0 {
                        r
                    } else {
                        -r
                    }
                })
                .sum();
            assert_eq!(betti, k.euler_characteristic());
        }
    }

    #[test]
    fn sort_sign() {
        assert_eq!(sort_with_sign(&[2, 0, 1]), Some((vec![0, 1, 2], 1)));
        assert_eq!(sort_with_sign(&[1, 0, 2]), Some((vec![0, 1, 2], -1)));
        assert_eq!(sort_with_sign(&[1, 1]), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn class_invariant_under_coboundaries(
            a in proptest::collection::vec(-5i64..=5, 10),
            b in proptest::collection::vec(-5i64..=5, 10),
        ) {
            let k = sphere(4);
            let h2 = cohomology(&k, 2).unwrap();
            let h3 = cohomology(&k, 3).unwrap();
            // any 3-cochain is a cocycle on the 3-sphere
            let c = IntegerCochain::from_i64(3, &a[..5]);
            let shift = coboundary(&k, &IntegerCochain::from_i64(2, &b));
            let lhs = h3.integer_class(&c).unwrap().coordinates;
            let rhs = h3.integer_class(&c.add(&shift)).unwrap().coordinates;
            prop_assert_eq!(lhs, rhs);
            let exact = coboundary(&k, &IntegerCochain::from_i64(1, &a));
            let class = h2.integer_class(&exact).unwrap();
            prop_assert!(class.is_zero());
            prop_assert_eq!(coboundary(&k, &class.witness.unwrap()), exact);
        }
    }
}
