//! U(1)-valued Čech cochains on star covers with exact rational phases.
//!
//! Phases are stored as turns `q` (meaning `exp(2 pi i q)`) reduced to
//! `[0, 1)`. Through the nerve of the star cover, Čech cochains are simplicial
//! cochains on the complex, evaluated on ascending vertex tuples.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, orthonormality_defect, ComplexMatrix};
use crate::simplicial::{
    compute_cohomology, delta, sort_with_sign, ClassCoordinates, CohomologyGroup, IntegerCochain,
    SampleId, SimplicialComplex, StarCover,
};
use crate::tolerance::Tolerances;

pub fn reduce_turn(q: &BigRational) -> BigRational {
    q - q.floor()
}

pub fn turn(p: i64, q: i64) -> BigRational {
    reduce_turn(&BigRational::new(BigInt::from(p), BigInt::from(q)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct U1Cochain {
    degree: usize,
    turns: Vec<BigRational>,
}

impl U1Cochain {
    pub fn new(degree: usize, turns: Vec<BigRational>) -> Self {
        Self {
            degree,
            turns: turns.iter().map(reduce_turn).collect(),
        }
    }

    pub fn zero(complex: &SimplicialComplex, degree: usize) -> Self {
        Self {
            degree,
            turns: vec![BigRational::zero(); complex.count(degree)],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Reduced turns, which double as the canonical rational lift.
    pub fn turns(&self) -> &[BigRational] {
        &self.turns
    }

    pub fn is_zero(&self) -> bool {
        self.turns.iter().all(Zero::is_zero)
    }

    pub fn times(&self, r: i64) -> Self {
        let r = BigRational::from_integer(BigInt::from(r));
        Self::new(self.degree, self.turns.iter().map(|q| q * &r).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            self.degree, other.degree,
            "adding cochains of different degree"
        );
        Self::new(
            self.degree,
            self.turns
                .iter()
                .zip(&other.turns)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        self.times(-1)
    }

    /// Turn on an ordered tuple; odd permutations conjugate the phase.
    pub fn evaluate(&self, complex: &SimplicialComplex, tuple: &[usize]) -> BigRational {
        match sort_with_sign(tuple) {
            Some((sorted, sign)) if sorted.len() == self.degree + 1 => {
                match complex.index_of(&sorted) {
                    Some(i) if sign > 0 => self.turns[i].clone(),
                    Some(i) => reduce_turn(&-self.turns[i].clone()),
                    None => BigRational::zero(),
                }
            }
            _ => BigRational::zero(),
        }
    }

    pub fn check_shape(&self, complex: &SimplicialComplex) -> Result<()> {
        if self.turns.len() != complex.count(self.degree) {
            return Err(Error::ShapeMismatch(format!(
                "U(1) cochain of degree {} has {} entries, complex has {} simplices",
                self.degree,
                self.turns.len(),
                complex.count(self.degree)
            )));
        }
        Ok(())
    }
}

pub fn u1_delta(complex: &SimplicialComplex, c: &U1Cochain) -> U1Cochain {
    U1Cochain::new(
        c.degree + 1,
        delta(complex, c.degree).mul_rational(&c.turns),
    )
}

/// `delta(potential) + residual = r c` modulo integers, where `residual` is
/// a real (rational) cocycle. Real cocycles are coboundaries of continuous
/// U(1)-valued functions, so the witness trivializes `r c` in sheaf
/// cohomology; without a residual it trivializes `r c` with constant phases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistWitness {
    pub potential: U1Cochain,
    pub residual: Option<Vec<BigRational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obstruction {
    Solvable(TwistWitness),
    /// `order` is the order of the class of `c`, `None` when infinite.
    Obstructed {
        order: Option<BigInt>,
    },
}

impl Obstruction {
    pub fn is_solvable(&self) -> bool {
        matches!(self, Obstruction::Solvable(_))
    }
}

#[derive(Clone, Debug)]
pub struct DDClass {
    pub coordinates: ClassCoordinates,
    pub integer_cocycle: IntegerCochain,
    pub representative: U1Cochain,
    pub witness: Option<TwistWitness>,
}

impl DDClass {
    pub fn is_zero(&self) -> bool {
        self.coordinates.is_zero()
    }
}

/// Čech computations over one complex, caching integral cohomology by degree.
pub struct CechContext {
    complex: SimplicialComplex,
    groups: Mutex<BTreeMap<usize, Arc<CohomologyGroup>>>,
}

impl CechContext {
    pub fn new(complex: SimplicialComplex) -> Self {
        Self {
            complex,
            groups: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    /// `H^k(K; Z)` in any degree (trivial above the dimension).
    pub fn group(&self, k: usize) -> Arc<CohomologyGroup> {
        let mut groups = self.groups.lock().expect("cohomology cache poisoned");
        groups
            .entry(k)
            .or_insert_with(|| Arc::new(compute_cohomology(&self.complex, k)))
            .clone()
    }

    pub fn is_cocycle(&self, c: &U1Cochain) -> bool {
        u1_delta(&self.complex, c).is_zero()
    }

    fn require_cocycle(&self, c: &U1Cochain) -> Result<()> {
        c.check_shape(&self.complex)?;
        if !self.is_cocycle(c) {
            return Err(Error::NotACocycle { degree: c.degree });
        }
        Ok(())
    }

    /// `b` with `delta b = c` in Q/Z-valued cochains, if one exists.
    pub fn solve_u1_coboundary(&self, c: &U1Cochain) -> Result<Option<U1Cochain>> {
        if c.degree == 0 {
            return Err(Error::DegreeOutOfRange {
                degree: 0,
                min: 1,
                max: usize::MAX,
            });
        }
        self.require_cocycle(c)?;
        let group = self.group(c.degree);
        let (smith, factors) = group.image_form();
        let y = smith.u.mul_rational(&c.turns);
        let r = factors.len();
        if !y[r..].iter().all(BigRational::is_integer) {
            return Ok(None);
        }
        let t: Vec<BigRational> = y[..r]
            .iter()
            .zip(factors)
            .map(|(yi, d)| yi / BigRational::from_integer(d.clone()))
            .chain(std::iter::repeat(BigRational::zero()).take(smith.v.rows() - r))
            .collect();
        let b = U1Cochain::new(c.degree - 1, smith.v.mul_rational(&t));
        debug_assert_eq!(&u1_delta(&self.complex, &b), c);
        Ok(Some(b))
    }

    /// Integer coboundary of the canonical lift of a U(1) cocycle.
    pub fn connecting_to_integer(&self, c: &U1Cochain) -> Result<IntegerCochain> {
        c.check_shape(&self.complex)?;
        self.connecting_from_lift(c.degree, &c.turns)
    }

    /// Integer coboundary of an arbitrary rational lift.
    pub fn connecting_from_lift(
        &self,
        degree: usize,
        lift: &[BigRational],
    ) -> Result<IntegerCochain> {
        if lift.len() != self.complex.count(degree) {
            return Err(Error::ShapeMismatch(format!(
                "lift of degree {degree} has {} entries, complex has {}",
                lift.len(),
                self.complex.count(degree)
            )));
        }
        let image = delta(&self.complex, degree).mul_rational(lift);
        if !image.iter().all(BigRational::is_integer) {
            return Err(Error::NotACocycle { degree });
        }
        Ok(IntegerCochain {
            degree: degree + 1,
            values: image.into_iter().map(|q| q.to_integer()).collect(),
        })
    }

    pub fn dd_class(&self, c: &U1Cochain) -> Result<DDClass> {
        let integer_cocycle = self.connecting_to_integer(c)?;
        let class = self.group(c.degree + 1).integer_class(&integer_cocycle)?;
        let witness = match (&class.witness, c.degree) {
            (Some(w), k) if k > 0 => Some(self.trivialize(c, w)?),
            _ => None,
        };
        Ok(DDClass {
            coordinates: class.coordinates,
            integer_cocycle,
            representative: c.clone(),
            witness,
        })
    }

    /// Witness for a cocycle `c` whose connecting image is `delta w` for the
    /// integer cochain `w`.
    fn trivialize(&self, c: &U1Cochain, w: &IntegerCochain) -> Result<TwistWitness> {
        if let Some(b) = self.solve_u1_coboundary(c)? {
            return Ok(TwistWitness {
                potential: b,
                residual: None,
            });
        }
        let residual: Vec<BigRational> = c
            .turns
            .iter()
            .zip(&w.values)
            .map(|(q, n)| q - BigRational::from_integer(n.clone()))
            .collect();
        debug_assert!(delta(&self.complex, c.degree)
            .mul_rational(&residual)
            .iter()
            .all(Zero::is_zero));
        Ok(TwistWitness {
            potential: U1Cochain::zero(&self.complex, c.degree - 1),
            residual: Some(residual),
        })
    }

    /// Decides whether `r [c] = 0`, i.e. whether a rank `r` twisted bundle
    /// can have determinant cocycle compatible with `c^r`.
    pub fn rank_obstruction(&self, c: &U1Cochain, r: u32) -> Result<Obstruction> {
        if r == 0 {
            return Err(Error::Format("rank must be positive".into()));
        }
        if c.degree == 0 {
            return Err(Error::DegreeOutOfRange {
                degree: 0,
                min: 1,
                max: usize::MAX,
            });
        }
        self.require_cocycle(c)?;
        let cr = c.times(i64::from(r));
        let z = self.connecting_to_integer(&cr)?;
        let class = self.group(c.degree + 1).integer_class(&z)?;
        match class.witness {
            Some(w) if class.is_zero() => Ok(Obstruction::Solvable(self.trivialize(&cr, &w)?)),
            _ => Ok(Obstruction::Obstructed {
                order: self.dd_class(c)?.coordinates.order(),
            }),
        }
    }

    /// A U(1) cocycle of degree `k - 1` whose class is the `i`-th torsion
    /// generator `z` of `H^k`: `w / d` where `d z = delta w`.
    pub fn torsion_cocycle(&self, k: usize, i: usize) -> Result<U1Cochain> {
        if k == 0 {
            return Err(Error::DegreeOutOfRange {
                degree: 0,
                min: 1,
                max: usize::MAX,
            });
        }
        let group = self.group(k);
        let (Some(z), Some(d)) = (group.torsion_generators.get(i), group.torsion.get(i)) else {
            return Err(Error::Format(format!("H^{k} has no torsion generator {i}")));
        };
        let class = group.integer_class(&z.scale(d))?;
        let w = class.witness.expect("d z is exact");
        let turns = w
            .values
            .iter()
            .map(|v| BigRational::new(v.clone(), d.clone()))
            .collect();
        Ok(U1Cochain::new(k - 1, turns))
    }

    /// Checks `delta(potential) + residual = r c` modulo integers and that the
    /// residual is a rational cocycle.
    pub fn check_witness(&self, c: &U1Cochain, r: u32, w: &TwistWitness) -> bool {
        let mut lhs = u1_delta(&self.complex, &w.potential);
        if let Some(res) = &w.residual {
            if res.len() != c.turns.len()
                || !delta(&self.complex, c.degree)
                    .mul_rational(res)
                    .iter()
                    .all(Zero::is_zero)
            {
                return false;
            }
            lhs = lhs.add(&U1Cochain::new(c.degree, res.clone()));
        }
        lhs == c.times(i64::from(r))
    }
}

pub fn solve_u1_coboundary(
    complex: &SimplicialComplex,
    c: &U1Cochain,
) -> Result<Option<U1Cochain>> {
    CechContext::new(complex.clone()).solve_u1_coboundary(c)
}

pub fn connecting_to_integer(complex: &SimplicialComplex, c: &U1Cochain) -> Result<IntegerCochain> {
    CechContext::new(complex.clone()).connecting_to_integer(c)
}

pub fn dd_class(complex: &SimplicialComplex, c: &U1Cochain) -> Result<DDClass> {
    CechContext::new(complex.clone()).dd_class(c)
}

pub fn rank_obstruction(complex: &SimplicialComplex, c: &U1Cochain, r: u32) -> Result<Obstruction> {
    CechContext::new(complex.clone()).rank_obstruction(c, r)
}

/// Unitary lifts `u_ab` on the edges of a star cover; `u_ba = u_ab^*`.
#[derive(Clone, Debug)]
pub struct UnitaryLiftSystem {
    cover: Arc<StarCover>,
    rank: usize,
    unitaries: BTreeMap<(usize, usize), ComplexMatrix>,
}

impl UnitaryLiftSystem {
    /// Accepts lifts keyed by either orientation of each edge.
    pub fn new(
        cover: Arc<StarCover>,
        rank: usize,
        lifts: BTreeMap<(usize, usize), ComplexMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let complex = cover.complex();
        let mut unitaries = BTreeMap::new();
        for ((a, b), u) in lifts {
            if !complex.contains(&[a.min(b), a.max(b)]) || a == b {
                return Err(Error::Format(format!(
                    "lift on ({a},{b}), which is not an edge"
                )));
            }
            if u.nrows() != rank || u.ncols() != rank {
                return Err(Error::ShapeMismatch(format!(
                    "lift on ({a},{b}) is {}x{}, expected {rank}x{rank}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            let defect = orthonormality_defect(&u);
            if defect > tol.orth {
                return Err(Error::Format(format!(
                    "lift on ({a},{b}) is not unitary (defect {defect:.3e})"
                )));
            }
            let (key, u) = if a < b {
                ((a, b), u)
            } else {
                ((b, a), u.adjoint())
            };
            if unitaries.insert(key, u).is_some() {
                return Err(Error::Format(format!("edge {key:?} has two lifts")));
            }
        }
        if let Some(e) = complex
            .simplices(1)
            .iter()
            .find(|e| !unitaries.contains_key(&(e[0], e[1])))
        {
            return Err(Error::Format(format!("edge {e:?} has no lift")));
        }
        Ok(Self {
            cover,
            rank,
            unitaries,
        })
    }

    pub fn cover(&self) -> &Arc<StarCover> {
        &self.cover
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn unitaries(&self) -> &BTreeMap<(usize, usize), ComplexMatrix> {
        &self.unitaries
    }

    /// `u_ab` for any ordered pair of vertices spanning an edge; the identity on the diagonal.
    pub fn lift(&self, a: usize, b: usize) -> ComplexMatrix {
        if a == b {
            return ComplexMatrix::identity(self.rank, self.rank);
        }
        match self.unitaries.get(&(a.min(b), a.max(b))) {
            Some(u) if a < b => u.clone(),
            Some(u) => u.adjoint(),
            None => panic!("no lift on ({a},{b})"),
        }
    }
}

/// Smallest-denominator rational within `tol` of `x`, reduced to `[0, 1)`.
pub fn recognize_turn(x: f64, q_max: u32, tol: f64) -> Option<BigRational> {
    let x = x.rem_euclid(1.0);
    (1..=i64::from(q_max)).find_map(|q| {
        let p = (x * q as f64).round() as i64;
        ((x - p as f64 / q as f64).abs() <= tol).then(|| turn(p, q))
    })
}

fn triangle_phase(lifts: &UnitaryLiftSystem, s: &[usize], tol: &Tolerances) -> Result<BigRational> {
    let (a, b, c) = (s[0], s[1], s[2]);
    let t = lifts.lift(a, b) * lifts.lift(b, c) * lifts.lift(a, c).adjoint();
    let r = lifts.rank as f64;
    let lambda = t.trace() / r;
    let defect = frobenius(&(&t - ComplexMatrix::identity(lifts.rank, lifts.rank) * lambda));
    if defect > tol.scalar || (lambda.norm() - 1.0).abs() > tol.scalar {
        return Err(Error::NotProjectivelyFlat {
            simplex: s.to_vec(),
            defect,
        });
    }
    let phase = (lambda.arg() / TAU).rem_euclid(1.0);
    recognize_turn(phase, tol.q_max, tol.scalar).ok_or(Error::IrrationalPhase {
        simplex: s.to_vec(),
        phase,
        q_max: tol.q_max,
    })
}

/// The 2-cochain `c_abc` with `u_ab u_bc = c_abc u_ac` on every triangle.
pub fn dd_cocycle(lifts: &UnitaryLiftSystem, tol: &Tolerances) -> Result<U1Cochain> {
    let complex = lifts.cover.complex();
    let phases: Vec<Result<BigRational>> = complex
        .simplices(2)
        .par_iter()
        .map(|s| triangle_phase(lifts, s, tol))
        .collect();
    let turns = phases.into_iter().collect::<Result<Vec<_>>>()?;
    let c = U1Cochain::new(2, turns);
    assert!(
        u1_delta(complex, &c).is_zero(),
        "triple products of lifts failed to form a cocycle"
    );
    Ok(c)
}

/// Sampled U(1) transition functions `g_ab(x)` of a line bundle, one value
/// per sample point of each overlap `U_ab`; `g_ba = conj(g_ab)`.
#[derive(Clone, Debug)]
pub struct LineTransitions {
    cover: Arc<StarCover>,
    values: BTreeMap<(usize, usize), BTreeMap<SampleId, Complex64>>,
}

const MAX_HOP: f64 = 0.45;
const INTEGRALITY_SLACK: f64 = 1e-6;

impl LineTransitions {
    pub fn new(
        cover: Arc<StarCover>,
        values: BTreeMap<(usize, usize), BTreeMap<SampleId, Complex64>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let complex = cover.complex();
        for e in complex.simplices(1) {
            let row = values
                .get(&(e[0], e[1]))
                .ok_or_else(|| Error::Format(format!("edge {e:?} has no transition")))?;
            for x in cover.overlap_samples(e) {
                let g = row.get(&x).ok_or_else(|| {
                    Error::Format(format!("edge {e:?} lacks sample {:?}", cover.simplex(x)))
                })?;
                if (g.norm() - 1.0).abs() > tol.orth {
                    return Err(Error::Format(format!(
                        "transition on {e:?} is not unit modulus"
                    )));
                }
            }
        }
        if values.len() != complex.count(1) {
            return Err(Error::Format(
                "transitions given on pairs that are not ascending edges".into(),
            ));
        }
        Ok(Self { cover, values })
    }

    /// Constant transitions `exp(2 pi i q_ab)` from a U(1) 1-cochain.
    pub fn from_cochain(cover: Arc<StarCover>, c: &U1Cochain) -> Result<Self> {
        if c.degree != 1 {
            return Err(Error::DegreeOutOfRange {
                degree: c.degree,
                min: 1,
                max: 1,
            });
        }
        c.check_shape(cover.complex())?;
        let mut values = BTreeMap::new();
        for (e, q) in cover.complex().simplices(1).iter().zip(&c.turns) {
            let g = Complex64::from_polar(1.0, TAU * q.to_f64().unwrap_or(0.0));
            let row = cover
                .overlap_samples(e)
                .into_iter()
                .map(|x| (x, g))
                .collect();
            values.insert((e[0], e[1]), row);
        }
        Ok(Self { cover, values })
    }

    pub fn cover(&self) -> &Arc<StarCover> {
        &self.cover
    }

    pub fn get(&self, a: usize, b: usize, x: SampleId) -> Complex64 {
        if a == b {
            return Complex64::one();
        }
        let g = self.values[&(a.min(b), a.max(b))][&x];
        if a < b {
            g
        } else {
            g.conj()
        }
    }

    pub fn tensor_power(&self, k: i32) -> Self {
        let values = self
            .values
            .iter()
            .map(|(e, row)| (*e, row.iter().map(|(x, g)| (*x, g.powi(k))).collect()))
            .collect();
        Self {
            cover: self.cover.clone(),
            values,
        }
    }

    /// Continuous log of `g_ab` on `U_ab`, anchored at the edge's own sample.
    fn log_at(&self, e: &[usize], x: SampleId) -> Result<f64> {
        let row = &self.values[&(e[0], e[1])];
        let anchor = self.cover.sample_of(e).expect("edge has a sample");
        let base = row[&anchor].arg() / TAU;
        let hop = (row[&x].arg() / TAU - base + 0.5).rem_euclid(1.0) - 0.5;
        if hop.abs() > MAX_HOP {
            return Err(Error::UnderResolved {
                edge: (e[0], e[1]),
                hop: hop.abs(),
            });
        }
        Ok(base + hop)
    }
}

/// Orientation signs of the triangles of a closed connected oriented
/// surface, the first triangle positive.
pub fn fundamental_cycle(complex: &SimplicialComplex) -> Result<Vec<i64>> {
    if complex.dim() != Some(2) {
        return Err(Error::NotClosedSurface(
            "complex is not two-dimensional".into(),
        ));
    }
    let triangles = complex.simplices(2);
    let mut incident: Vec<Vec<(usize, i64)>> = vec![Vec::new(); complex.count(1)];
    for (t, s) in triangles.iter().enumerate() {
        for i in 0..3 {
            let mut face = s.clone();
            face.remove(i);
            let e = complex.index_of(&face).expect("closed under faces");
            incident[e].push((t, if i % 2 == 0 { 1 } else { -1 }));
        }
    }
    if let Some(e) = incident.iter().position(|v| v.len() != 2) {
        return Err(Error::NotClosedSurface(format!(
            "edge {:?} lies on {} triangles",
            complex.simplices(1)[e],
            incident[e].len()
        )));
    }
    let mut sign = vec![0i64; triangles.len()];
    sign[0] = 1;
    let mut queue = VecDeque::from([0usize]);
    let mut by_triangle: Vec<Vec<usize>> = vec![Vec::new(); triangles.len()];
    for (e, v) in incident.iter().enumerate() {
        for &(t, _) in v {
            by_triangle[t].push(e);
        }
    }
    while let Some(t) = queue.pop_front() {
        for &e in &by_triangle[t] {
            let (mine, other) = if incident[e][0].0 == t {
                (incident[e][0], incident[e][1])
            } else {
                (incident[e][1], incident[e][0])
            };
            // coefficients on the shared edge must cancel
            let wanted = -sign[t] * mine.1 * other.1;
            if sign[other.0] == 0 {
                sign[other.0] = wanted;
                queue.push_back(other.0);
            } else if sign[other.0] != wanted {
                return Err(Error::NotClosedSurface("surface is not orientable".into()));
            }
        }
    }
    if sign.contains(&0) {
        return Err(Error::NotClosedSurface(
            "surface is not connected through edges".into(),
        ));
    }
    Ok(sign)
}

pub fn chern_number(t: &LineTransitions) -> Result<i64> {
    let cycle = fundamental_cycle(t.cover.complex())?;
    chern_number_with(t, &cycle)
}

/// Pairs the integer 2-cocycle `delta log g` with a 2-cycle given by
/// orientation signs of the triangles.
pub fn chern_number_with(t: &LineTransitions, cycle: &[i64]) -> Result<i64> {
    let complex = t.cover.complex();
    if complex.dim() != Some(2) || cycle.len() != complex.count(2) {
        return Err(Error::NotClosedSurface(
            "cycle does not match the triangles".into(),
        ));
    }
    let boundary = delta(complex, 1);
    for e in 0..complex.count(1) {
        let s: BigInt = (0..complex.count(2))
            .map(|r| boundary.get(r, e) * cycle[r])
            .sum();
        if !s.is_zero() {
            return Err(Error::NotClosedSurface(
                "orientation signs do not form a cycle".into(),
            ));
        }
    }
    let mut total = 0i64;
    for (s, &eps) in complex.simplices(2).iter().zip(cycle) {
        let x = t.cover.sample_of(s).expect("triangle has a sample");
        let (a, b, c) = (s[0], s[1], s[2]);
        let n = t.log_at(&[b, c], x)? - t.log_at(&[a, c], x)? + t.log_at(&[a, b], x)?;
        if (n - n.round()).abs() > INTEGRALITY_SLACK {
            return Err(Error::NotACocycle { degree: 1 });
        }
        total += eps * n.round() as i64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn sphere() -> SimplicialComplex {
        SimplicialComplex::simplex_boundary(3)
    }

    #[test]
    fn delta_of_single_edge_turn() {
        let k = sphere();
        let mut turns = vec![BigRational::zero(); 6];
        turns[0] = turn(1, 3); // edge [0,1]
        let d = u1_delta(&k, &U1Cochain::new(1, turns));
        // triangles [0,1,2] and [0,1,3] contain the edge at position 2 (sign +)
        assert_eq!(d.turns()[0], turn(1, 3));
        assert_eq!(d.turns()[1], turn(1, 3));
        assert!(d.turns()[2..].iter().all(Zero::is_zero));
        assert!(u1_delta(&k, &d).is_zero());
    }

    #[test]
    fn evaluate_conjugates_on_odd_permutation() {
        let k = sphere();
        let mut turns = vec![BigRational::zero(); 6];
        turns[0] = turn(1, 3);
        let e = U1Cochain::new(1, turns);
        assert_eq!(e.evaluate(&k, &[1, 0]), turn(2, 3));
        assert_eq!(e.evaluate(&k, &[0, 0]), BigRational::zero());
    }

    #[test]
    fn recognize_turns() {
        assert_eq!(recognize_turn(0.5, 64, 1e-8), Some(turn(1, 2)));
        assert_eq!(recognize_turn(-0.25, 64, 1e-8), Some(turn(3, 4)));
        assert_eq!(recognize_turn(0.999_999_999_9, 64, 1e-8), Some(turn(0, 1)));
        assert_eq!(recognize_turn(1.0 / 67.0, 64, 1e-8), None);
    }

    #[test]
    fn trivial_lifts_give_zero() {
        let cover = Arc::new(StarCover::new(sphere()));
        let lifts: BTreeMap<_, _> = cover
            .complex()
            .simplices(1)
            .iter()
            .map(|e| ((e[0], e[1]), ComplexMatrix::identity(2, 2)))
            .collect();
        let sys = UnitaryLiftSystem::new(cover, 2, lifts, &Tolerances::default()).unwrap();
        assert!(dd_cocycle(&sys, &Tolerances::default()).unwrap().is_zero());
    }

    #[test]
    fn scalar_lifts_give_coboundary() {
        let k = sphere();
        let cover = Arc::new(StarCover::new(k.clone()));
        let b: Vec<BigRational> = [1, 2, 0, 5, 3, 7].iter().map(|&p| turn(p, 8)).collect();
        let b = U1Cochain::new(1, b);
        let lifts: BTreeMap<_, _> = k
            .simplices(1)
            .iter()
            .zip(b.turns())
            .map(|(e, q)| {
                let z = Complex64::from_polar(1.0, TAU * q.to_f64().unwrap());
                ((e[1], e[0]), ComplexMatrix::identity(1, 1) * z.conj())
            })
            .collect();
        let sys = UnitaryLiftSystem::new(cover, 1, lifts, &Tolerances::default()).unwrap();
        assert_eq!(
            dd_cocycle(&sys, &Tolerances::default()).unwrap(),
            u1_delta(&k, &b)
        );
    }

    #[test]
    fn non_scalar_triple_rejected() {
        let cover = Arc::new(StarCover::new(SimplicialComplex::build(&[vec![0, 1, 2]])));
        let x = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        );
        let lifts = BTreeMap::from([
            ((0, 1), x),
            ((1, 2), ComplexMatrix::identity(2, 2)),
            ((0, 2), ComplexMatrix::identity(2, 2)),
        ]);
        let sys = UnitaryLiftSystem::new(cover, 2, lifts, &Tolerances::default()).unwrap();
        assert!(matches!(
            dd_cocycle(&sys, &Tolerances::default()),
            Err(Error::NotProjectivelyFlat { .. })
        ));
    }

    #[test]
    fn irrational_phase_rejected() {
        let cover = Arc::new(StarCover::new(SimplicialComplex::build(&[vec![0, 1, 2]])));
        let z = Complex64::from_polar(1.0, 1.0);
        let lifts = BTreeMap::from([
            ((0, 1), ComplexMatrix::identity(1, 1) * z),
            ((1, 2), ComplexMatrix::identity(1, 1)),
            ((0, 2), ComplexMatrix::identity(1, 1)),
        ]);
        let sys = UnitaryLiftSystem::new(cover, 1, lifts, &Tolerances::default()).unwrap();
        assert!(matches!(
            dd_cocycle(&sys, &Tolerances::default()),
            Err(Error::IrrationalPhase { .. })
        ));
    }

    #[test]
    fn missing_lift_rejected() {
        let cover = Arc::new(StarCover::new(SimplicialComplex::build(&[vec![0, 1, 2]])));
        let lifts = BTreeMap::from([((0, 1), ComplexMatrix::identity(1, 1))]);
        assert!(UnitaryLiftSystem::new(cover, 1, lifts, &Tolerances::default()).is_err());
    }

    #[test]
    fn classes_on_the_two_sphere() {
        let k = sphere();
        let ctx = CechContext::new(k.clone());
        let zero = U1Cochain::zero(&k, 2);
        assert_eq!(
            ctx.solve_u1_coboundary(&zero).unwrap(),
            Some(U1Cochain::zero(&k, 1))
        );
        assert!(ctx.connecting_to_integer(&zero).unwrap().is_zero());

        // half a turn on one triangle: nonzero in H^2(Q/Z), zero in H^3(Z)
        let mut turns = vec![BigRational::zero(); 4];
        turns[1] = turn(1, 2);
        let c = U1Cochain::new(2, turns);
        assert_eq!(ctx.solve_u1_coboundary(&c).unwrap(), None);
        let class = ctx.dd_class(&c).unwrap();
        assert!(class.is_zero());
        let w = class.witness.unwrap();
        assert!(w.residual.is_some());
        assert!(ctx.check_witness(&c, 1, &w));
        assert!(ctx.rank_obstruction(&c, 3).unwrap().is_solvable());
    }

    #[test]
    fn coboundary_solutions_are_exact() {
        let k = SimplicialComplex::simplex_boundary(4);
        let ctx = CechContext::new(k.clone());
        let b = U1Cochain::new(1, (0..10).map(|i| turn(i * 7 + 1, 12)).collect());
        let c = u1_delta(&k, &b);
        let s = ctx.solve_u1_coboundary(&c).unwrap().unwrap();
        assert_eq!(u1_delta(&k, &s), c);
    }

    #[test]
    fn non_cocycle_rejected() {
        let k = SimplicialComplex::simplex_boundary(4);
        let ctx = CechContext::new(k.clone());
        let mut turns = vec![BigRational::zero(); k.count(1)];
        turns[0] = turn(1, 2);
        let c = U1Cochain::new(1, turns);
        assert!(matches!(
            ctx.solve_u1_coboundary(&c),
            Err(Error::NotACocycle { degree: 1 })
        ));
        assert!(matches!(
            ctx.connecting_to_integer(&c),
            Err(Error::NotACocycle { degree: 1 })
        ));
        assert!(matches!(
            ctx.rank_obstruction(&c, 2),
            Err(Error::NotACocycle { degree: 1 })
        ));
    }

    #[test]
    fn fundamental_cycle_of_sphere_cancels() {
        let k = sphere();
        let cycle = fundamental_cycle(&k).unwrap();
        assert_eq!(cycle, vec![1, -1, 1, -1]);
        let circle = SimplicialComplex::circle(4);
        assert!(matches!(
            fundamental_cycle(&circle),
            Err(Error::NotClosedSurface(_))
        ));
        let disk = SimplicialComplex::build(&[vec![0, 1, 2]]);
        assert!(matches!(
            fundamental_cycle(&disk),
            Err(Error::NotClosedSurface(_))
        ));
    }

    #[test]
    fn constant_transitions_have_zero_chern_number() {
        let k = sphere();
        let cover = Arc::new(StarCover::new(k.clone()));
        let b = U1Cochain::new(0, vec![turn(1, 5), turn(2, 5), turn(0, 1), turn(1, 3)]);
        let g = u1_delta(&k, &b);
        let t = LineTransitions::from_cochain(cover.clone(), &g).unwrap();
        assert_eq!(chern_number(&t).unwrap(), 0);
        let t = LineTransitions::from_cochain(cover, &U1Cochain::zero(&k, 1)).unwrap();
        assert_eq!(chern_number(&t).unwrap(), 0);
    }
}
