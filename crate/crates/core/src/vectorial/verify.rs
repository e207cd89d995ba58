//! Verification of the vectorial bundle conditions and of bundle maps.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::doteq::doteq_at;
use super::ops::BundleMap;
use super::{overlap_pairs, Fiber, VectorialBundle};
use crate::cech::U1Cochain;
use crate::error::{Error, Result};
use crate::linalg::{degree_defect, frobenius, hermitian_defect, ComplexMatrix, Parity};
use crate::simplicial::{SampleId, StarCover};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionKind {
    /// `h` Hermitian and odd, maps of degree 0.
    Structure,
    /// `phi_aa ≐ 1`.
    Identity,
    /// `phi_ab phi_bc ≐ c_abc phi_ac`.
    Cocycle,
    /// `h_a phi_ab = phi_ab h_b`, or `f_a h_a = h'_a f_a` for maps.
    Intertwining,
    /// `f_a phi_ab ≐ phi'_ab f_b`.
    Homomorphism,
    /// `f'_a f_a ≐ 1` and `f_a f'_a ≐ 1`.
    Inverse,
}

impl ConditionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConditionKind::Structure => "structure",
            ConditionKind::Identity => "identity",
            ConditionKind::Cocycle => "cocycle",
            ConditionKind::Intertwining => "intertwining",
            ConditionKind::Homomorphism => "homomorphism",
            ConditionKind::Inverse => "inverse",
        }
    }

    fn is_strict(&self) -> bool {
        matches!(self, ConditionKind::Structure | ConditionKind::Intertwining)
    }
}

/// One condition over one tuple of patches. For ≐ conditions `mu_agree` is
/// the minimum over samples and `defect` is zero; strict conditions report
/// the largest defect and an infinite `mu_agree`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub kind: ConditionKind,
    pub patches: Vec<usize>,
    pub mu_agree: f64,
    pub defect: f64,
    pub failing: Vec<SampleId>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct VerifyReport {
    pub conditions: Vec<ConditionReport>,
    pub pass: bool,
}

impl VerifyReport {
    fn from_conditions(conditions: Vec<ConditionReport>) -> Self {
        let pass = conditions.iter().all(|c| c.pass);
        Self { conditions, pass }
    }

    fn extend(&mut self, other: VerifyReport) {
        self.conditions.extend(other.conditions);
        self.pass = self.conditions.iter().all(|c| c.pass);
    }

    /// Minimum `mu_agree` over conditions of one kind (infinite if none).
    pub fn min_mu_agree(&self, kind: ConditionKind) -> f64 {
        self.conditions
            .iter()
            .filter(|c| c.kind == kind)
            .map(|c| c.mu_agree)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_defect(&self, kind: ConditionKind) -> f64 {
        self.conditions
            .iter()
            .filter(|c| c.kind == kind)
            .map(|c| c.defect)
            .fold(0.0, f64::max)
    }

    pub fn count(&self, kind: ConditionKind) -> usize {
        self.conditions.iter().filter(|c| c.kind == kind).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionReport> {
        self.conditions.iter().filter(|c| !c.pass)
    }

    pub fn kinds(&self) -> BTreeSet<ConditionKind> {
        self.conditions.iter().map(|c| c.kind).collect()
    }
}

struct Accumulator {
    kind: ConditionKind,
    patches: Vec<usize>,
    mu_agree: f64,
    defect: f64,
    failing: Vec<SampleId>,
}

impl Accumulator {
    fn new(kind: ConditionKind, patches: Vec<usize>) -> Self {
        Self {
            kind,
            patches,
            mu_agree: f64::INFINITY,
            defect: 0.0,
            failing: Vec::new(),
        }
    }

    fn agree(&mut self, x: SampleId, mu: f64) {
        self.mu_agree = self.mu_agree.min(mu);
        if mu <= 0.0 {
            self.failing.push(x);
        }
    }

    fn strict(&mut self, x: SampleId, defect: f64, bound: f64) {
        self.defect = self.defect.max(defect);
        if !(defect <= bound) {
            self.failing.push(x);
        }
    }

    fn finish(self) -> ConditionReport {
        debug_assert!(!self.kind.is_strict() || self.mu_agree == f64::INFINITY);
        let pass = self.failing.is_empty();
        ConditionReport {
            kind: self.kind,
            patches: self.patches,
            mu_agree: self.mu_agree,
            defect: self.defect,
            failing: self.failing,
            pass,
        }
    }
}

fn scale_of(m: &ComplexMatrix) -> f64 {
    m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()))
}

fn fiber_structure(
    a: usize,
    fibers: &BTreeMap<SampleId, Fiber>,
    tol: &Tolerances,
) -> ConditionReport {
    let mut acc = Accumulator::new(ConditionKind::Structure, vec![a]);
    for (x, f) in fibers {
        let scale = scale_of(&f.h);
        let defect = hermitian_defect(&f.h).max(degree_defect(&f.h, f.space, f.space, Parity::Odd));
        acc.strict(*x, defect / scale, tol.herm);
    }
    acc.finish()
}

/// Ordered triples of patches with a common overlap, repeats allowed.
fn overlap_triples(cover: &StarCover) -> Vec<[usize; 3]> {
    let complex = cover.complex();
    let mut triples = BTreeSet::new();
    for k in 0..=complex.dim().unwrap_or(0).min(2) {
        for s in complex.simplices(k) {
            for &a in s {
                for &b in s {
                    for &c in s {
                        triples.insert([a, b, c]);
                    }
                }
            }
        }
    }
    triples.into_iter().collect()
}

fn distinct_sorted(v: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = v.iter().copied().collect();
    set.into_iter().collect()
}

fn check_bundle(
    vb: &VectorialBundle,
    twist: Option<&U1Cochain>,
    tol: &Tolerances,
) -> Result<VerifyReport> {
    let cover = vb.cover();
    let complex = cover.complex();
    let n = cover.n_patches();

    let mut conditions: Vec<ConditionReport> = (0..n)
        .map(|a| fiber_structure(a, &vb.local(a).fibers, tol))
        .collect();

    for t in vb.transitions() {
        let mut acc = Accumulator::new(ConditionKind::Structure, vec![t.target, t.source]);
        for (x, m) in &t.maps {
            let src = vb.fiber(t.source, *x).space;
            let dst = vb.fiber(t.target, *x).space;
            acc.strict(
                *x,
                degree_defect(m, src, dst, Parity::Even) / scale_of(m),
                tol.doteq,
            );
        }
        conditions.push(acc.finish());
    }

    let identity: Vec<Result<ConditionReport>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut acc = Accumulator::new(ConditionKind::Identity, vec![a]);
            for (x, m) in &vb.transition(a, a).maps {
                let one = ComplexMatrix::identity(m.nrows(), m.ncols());
                acc.agree(*x, doteq_at(m, &one, &vb.fiber(a, *x).h, tol)?);
            }
            Ok(acc.finish())
        })
        .collect();
    for c in identity {
        conditions.push(c?);
    }

    let cocycle: Vec<Result<ConditionReport>> = overlap_triples(cover)
        .into_par_iter()
        .map(|[a, b, c]| {
            let mut acc = Accumulator::new(ConditionKind::Cocycle, vec![a, b, c]);
            let phase = match twist {
                Some(tw) => {
                    let q = tw.evaluate(complex, &[a, b, c]).to_f64().unwrap_or(0.0);
                    Complex64::from_polar(1.0, TAU * q)
                }
                None => Complex64::new(1.0, 0.0),
            };
            for x in cover.overlap_samples(&distinct_sorted(&[a, b, c])) {
                let lhs = vb.phi(a, b, x) * vb.phi(b, c, x);
                let rhs = vb.phi(a, c, x) * phase;
                acc.agree(x, doteq_at(&lhs, &rhs, &vb.fiber(c, x).h, tol)?);
            }
            Ok(acc.finish())
        })
        .collect();
    for c in cocycle {
        conditions.push(c?);
    }

    for (a, b) in overlap_pairs(cover) {
        let mut acc = Accumulator::new(ConditionKind::Intertwining, vec![a, b]);
        for (x, m) in &vb.transition(a, b).maps {
            let ha = &vb.fiber(a, *x).h;
            let hb = &vb.fiber(b, *x).h;
            acc.strict(*x, frobenius(&(ha * m - m * hb)), tol.doteq);
        }
        conditions.push(acc.finish());
    }

    Ok(VerifyReport::from_conditions(conditions))
}

/// Checks the untwisted conditions `phi_aa ≐ 1`, `phi_ab phi_bc ≐ phi_ac`,
/// strict intertwining, and the structural requirements on `h` and `phi`.
pub fn verify_vectorial(vb: &VectorialBundle, tol: &Tolerances) -> Result<VerifyReport> {
    check_bundle(vb, None, tol)
}

/// As [`verify_vectorial`] with `phi_ab phi_bc ≐ c_abc phi_ac`.
pub fn verify_twisted(
    vb: &VectorialBundle,
    c: &U1Cochain,
    tol: &Tolerances,
) -> Result<VerifyReport> {
    if c.degree() != 2 || c.turns().len() != vb.cover().complex().count(2) {
        return Err(Error::TwistMismatch);
    }
    check_bundle(vb, Some(c), tol)
}

pub(crate) fn twists_agree(a: Option<&U1Cochain>, b: Option<&U1Cochain>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => x == y,
        (Some(x), None) | (None, Some(x)) => x.is_zero(),
    }
}

fn check_map_shapes(f: &BundleMap, src: &VectorialBundle, dst: &VectorialBundle) -> Result<()> {
    let cover = src.cover();
    if f.maps.len() != cover.n_patches() {
        return Err(Error::ShapeMismatch(format!(
            "bundle map has {} components for {} patches",
            f.maps.len(),
            cover.n_patches()
        )));
    }
    for (a, maps) in f.maps.iter().enumerate() {
        if maps.len() != cover.patch_samples(a).len() {
            return Err(Error::ShapeMismatch(format!(
                "bundle map on patch {a} misses samples"
            )));
        }
        for &x in cover.patch_samples(a) {
            let m = maps.get(&x).ok_or_else(|| {
                Error::ShapeMismatch(format!("bundle map on patch {a} misses samples"))
            })?;
            if m.nrows() != dst.fiber(a, x).dim() || m.ncols() != src.fiber(a, x).dim() {
                return Err(Error::ShapeMismatch(format!(
                    "bundle map on patch {a} at {:?} is {}x{}",
                    cover.simplex(x),
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
    }
    Ok(())
}

/// Checks that `f = (f_a)` is a homomorphism `src -> dst`.
pub fn verify_homomorphism(
    f: &BundleMap,
    src: &VectorialBundle,
    dst: &VectorialBundle,
    tol: &Tolerances,
) -> Result<VerifyReport> {
    if !src.same_cover(dst) {
        return Err(Error::CoverMismatch);
    }
    if !twists_agree(src.twist(), dst.twist()) {
        return Err(Error::TwistMismatch);
    }
    check_map_shapes(f, src, dst)?;
    let cover = src.cover();
    let mut conditions = Vec::new();
    for (a, maps) in f.maps.iter().enumerate() {
        let mut degree = Accumulator::new(ConditionKind::Structure, vec![a]);
        let mut inter = Accumulator::new(ConditionKind::Intertwining, vec![a]);
        for (x, m) in maps {
            let (s, t) = (src.fiber(a, *x), dst.fiber(a, *x));
            degree.strict(
                *x,
                degree_defect(m, s.space, t.space, Parity::Even) / scale_of(m),
                tol.doteq,
            );
            inter.strict(*x, frobenius(&(m * &s.h - &t.h * m)), tol.doteq);
        }
        conditions.push(degree.finish());
        conditions.push(inter.finish());
    }
    let pairs: Vec<Result<ConditionReport>> = overlap_pairs(cover)
        .into_par_iter()
        .map(|(a, b)| {
            let mut acc = Accumulator::new(ConditionKind::Homomorphism, vec![a, b]);
            for x in cover.overlap_samples(&[a, b]) {
                let lhs = &f.maps[a][&x] * src.phi(a, b, x);
                let rhs = dst.phi(a, b, x) * &f.maps[b][&x];
                acc.agree(x, doteq_at(&lhs, &rhs, &src.fiber(b, x).h, tol)?);
            }
            Ok(acc.finish())
        })
        .collect();
    for c in pairs {
        conditions.push(c?);
    }
    Ok(VerifyReport::from_conditions(conditions))
}

fn inverse_conditions(
    f: &BundleMap,
    g: &BundleMap,
    src: &VectorialBundle,
    tol: &Tolerances,
) -> Result<Vec<ConditionReport>> {
    let mut out = Vec::new();
    for a in 0..f.maps.len() {
        let mut acc = Accumulator::new(ConditionKind::Inverse, vec![a]);
        for (x, fx) in &f.maps[a] {
            let comp = &g.maps[a][x] * fx;
            let one = ComplexMatrix::identity(comp.nrows(), comp.ncols());
            acc.agree(*x, doteq_at(&comp, &one, &src.fiber(a, *x).h, tol)?);
        }
        out.push(acc.finish());
    }
    Ok(out)
}

/// Checks that `f : src -> dst` and `g : dst -> src` are mutually inverse
/// homomorphisms up to ≐.
pub fn verify_isomorphism(
    f: &BundleMap,
    g: &BundleMap,
    src: &VectorialBundle,
    dst: &VectorialBundle,
    tol: &Tolerances,
) -> Result<VerifyReport> {
    let mut report = verify_homomorphism(f, src, dst, tol)?;
    report.extend(verify_homomorphism(g, dst, src, tol)?);
    let mut inverses = inverse_conditions(f, g, src, tol)?;
    inverses.extend(inverse_conditions(g, f, dst, tol)?);
    report.extend(VerifyReport::from_conditions(inverses));
    Ok(report)
}
