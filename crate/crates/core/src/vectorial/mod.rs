//! Z2-graded vectorial bundles over star covers and their verification.
//!
//! A vectorial bundle is stored as data at sample points: for each patch
//! `U_a` and each sample `x` in it, a graded fiber with an odd Hermitian map
//! `h_a(x)`, and for each ordered overlap `U_ab` and sample `x` in it, a
//! degree 0 map `phi_ab(x) : E_b(x) -> E_a(x)`. Fibers use the even-first
//! layout of [`crate::linalg`].

mod doteq;
mod ops;
mod ordinary;
mod verify;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cech::U1Cochain;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, GradedSpace};
use crate::simplicial::{SampleId, StarCover};

pub use doteq::{doteq_at, doteq_check, DoteqReport, PointAgreement};
pub use ops::{direct_sum, gauge_transform, graded_index, support, BundleMap};
pub use ordinary::OrdinaryBundle;
pub use verify::{
    verify_homomorphism, verify_isomorphism, verify_twisted, verify_vectorial, ConditionKind,
    ConditionReport, VerifyReport,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Fiber {
    pub space: GradedSpace,
    /// Odd Hermitian map on the fiber.
    pub h: ComplexMatrix,
}

impl Fiber {
    pub fn zero() -> Self {
        Self {
            space: GradedSpace::new(0, 0),
            h: ComplexMatrix::zeros(0, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalGradedBundle {
    pub patch: usize,
    pub fibers: BTreeMap<SampleId, Fiber>,
}

/// `phi_{target, source}` at every sample of the overlap.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionData {
    pub target: usize,
    pub source: usize,
    pub maps: BTreeMap<SampleId, ComplexMatrix>,
}

#[derive(Clone, Debug)]
pub struct VectorialBundle {
    cover: Arc<StarCover>,
    locals: Vec<LocalGradedBundle>,
    transitions: BTreeMap<(usize, usize), TransitionData>,
    twist: Option<U1Cochain>,
}

/// Ordered pairs `(a, b)` of patches with nonempty overlap, including `a = b`.
pub fn overlap_pairs(cover: &StarCover) -> Vec<(usize, usize)> {
    let complex = cover.complex();
    let mut pairs: Vec<(usize, usize)> = (0..complex.n_vertices()).map(|a| (a, a)).collect();
    for e in complex.simplices(1) {
        pairs.push((e[0], e[1]));
        pairs.push((e[1], e[0]));
    }
    pairs.sort_unstable();
    pairs
}

impl VectorialBundle {
    /// Assembles a bundle after structural checks (coverage and shapes).
    /// Whether the ≐ conditions hold is left to [`verify_vectorial`].
    pub fn new(
        cover: Arc<StarCover>,
        locals: Vec<LocalGradedBundle>,
        transitions: Vec<TransitionData>,
        twist: Option<U1Cochain>,
    ) -> Result<Self> {
        if locals.len() != cover.n_patches() {
            return Err(Error::ShapeMismatch(format!(
                "{} local bundles for {} patches",
                locals.len(),
                cover.n_patches()
            )));
        }
        for (a, local) in locals.iter().enumerate() {
            if local.patch != a {
                return Err(Error::Format(format!(
                    "local bundle {a} is labelled patch {}",
                    local.patch
                )));
            }
            let expected = cover.patch_samples(a);
            if local.fibers.len() != expected.len()
                || !expected.iter().all(|x| local.fibers.contains_key(x))
            {
                return Err(Error::Format(format!(
                    "patch {a} must have a fiber at every sample of its star"
                )));
            }
            for (x, f) in &local.fibers {
                let n = f.space.dim();
                if f.h.nrows() != n || f.h.ncols() != n {
                    return Err(Error::ShapeMismatch(format!(
                        "h on patch {a} at {:?} is {}x{} for a fiber of dimension {n}",
                        cover.simplex(*x),
                        f.h.nrows(),
                        f.h.ncols()
                    )));
                }
            }
        }
        let mut map = BTreeMap::new();
        for t in transitions {
            map.insert((t.target, t.source), t);
        }
        let pairs = overlap_pairs(&cover);
        if map.len() != pairs.len() {
            return Err(Error::Format(format!(
                "{} transitions given, {} ordered overlaps (including a = b) required",
                map.len(),
                pairs.len()
            )));
        }
        for (a, b) in pairs {
            let t = map
                .get(&(a, b))
                .ok_or_else(|| Error::Format(format!("missing transition ({a},{b})")))?;
            let samples = cover.overlap_samples(&[a, b]);
            if t.maps.len() != samples.len() {
                return Err(Error::Format(format!(
                    "transition ({a},{b}) must cover every sample of the overlap"
                )));
            }
            for x in samples {
                let m = t
                    .maps
                    .get(&x)
                    .ok_or_else(|| Error::Format(format!("transition ({a},{b}) lacks a sample")))?;
                let (rows, cols) = (locals[a].fibers[&x].dim(), locals[b].fibers[&x].dim());
                if m.nrows() != rows || m.ncols() != cols {
                    return Err(Error::ShapeMismatch(format!(
                        "phi_({a},{b}) at {:?} is {}x{}, fibers need {rows}x{cols}",
                        cover.simplex(x),
                        m.nrows(),
                        m.ncols()
                    )));
                }
            }
        }
        if let Some(c) = &twist {
            if c.degree() != 2 {
                return Err(Error::TwistMismatch);
            }
            c.check_shape(cover.complex())?;
        }
        Ok(Self {
            cover,
            locals,
            transitions: map,
            twist,
        })
    }

    /// Rank (0, 0) everywhere; the unit for direct sums.
    pub fn zero(cover: Arc<StarCover>, twist: Option<U1Cochain>) -> Self {
        let locals = (0..cover.n_patches())
            .map(|a| LocalGradedBundle {
                patch: a,
                fibers: cover
                    .patch_samples(a)
                    .iter()
                    .map(|&x| (x, Fiber::zero()))
                    .collect(),
            })
            .collect();
        let transitions = overlap_pairs(&cover)
            .into_iter()
            .map(|(a, b)| {
                let maps = cover
                    .overlap_samples(&[a, b])
                    .into_iter()
                    .map(|x| (x, ComplexMatrix::zeros(0, 0)))
                    .collect();
                (
                    (a, b),
                    TransitionData {
                        target: a,
                        source: b,
                        maps,
                    },
                )
            })
            .collect();
        Self {
            cover,
            locals,
            transitions,
            twist,
        }
    }

    pub fn cover(&self) -> &Arc<StarCover> {
        &self.cover
    }

    pub fn locals(&self) -> &[LocalGradedBundle] {
        &self.locals
    }

    pub fn local(&self, a: usize) -> &LocalGradedBundle {
        &self.locals[a]
    }

    pub fn fiber(&self, a: usize, x: SampleId) -> &Fiber {
        &self.locals[a].fibers[&x]
    }

    pub fn transitions(&self) -> impl Iterator<Item = &TransitionData> {
        self.transitions.values()
    }

    pub fn transition(&self, a: usize, b: usize) -> &TransitionData {
        &self.transitions[&(a, b)]
    }

    pub fn phi(&self, a: usize, b: usize, x: SampleId) -> &ComplexMatrix {
        &self.transitions[&(a, b)].maps[&x]
    }

    pub fn phi_mut(&mut self, a: usize, b: usize, x: SampleId) -> Option<&mut ComplexMatrix> {
        self.transitions.get_mut(&(a, b))?.maps.get_mut(&x)
    }

    pub fn twist(&self) -> Option<&U1Cochain> {
        self.twist.as_ref()
    }

    pub(crate) fn set_twist(&mut self, twist: Option<U1Cochain>) {
        self.twist = twist;
    }

    /// True when both bundles live over equal covers.
    pub fn same_cover(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.cover, &other.cover) || self.cover == other.cover
    }
}
