//! Honest (strict cocycle) graded vector bundles given by transition functions.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{overlap_pairs, Fiber, LocalGradedBundle, TransitionData, VectorialBundle};
use crate::cech::LineTransitions;
use crate::error::{Error, Result};
use crate::linalg::{
    degree_defect, frobenius, orthonormality_defect, ComplexMatrix, GradedSpace, Parity,
};
use crate::simplicial::{SampleId, StarCover};
use crate::tolerance::Tolerances;

/// Graded vector bundle with fiber `space` and unitary degree 0 transitions
/// `g_ab(x)` on ascending edges; `g_ba = g_ab*` and `g_aa = 1`.
#[derive(Clone, Debug)]
pub struct OrdinaryBundle {
    cover: Arc<StarCover>,
    space: GradedSpace,
    transitions: BTreeMap<(usize, usize), BTreeMap<SampleId, ComplexMatrix>>,
}

impl OrdinaryBundle {
    pub fn new(
        cover: Arc<StarCover>,
        space: GradedSpace,
        transitions: BTreeMap<(usize, usize), BTreeMap<SampleId, ComplexMatrix>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let complex = cover.complex();
        if transitions.len() != complex.count(1) {
            return Err(Error::Format(
                "transitions must be given exactly on ascending edges".into(),
            ));
        }
        let n = space.dim();
        for e in complex.simplices(1) {
            let row = transitions
                .get(&(e[0], e[1]))
                .ok_or_else(|| Error::Format(format!("edge {e:?} has no transition")))?;
            let samples = cover.overlap_samples(e);
            if row.len() != samples.len() {
                return Err(Error::Format(format!(
                    "transition on {e:?} must cover its overlap"
                )));
            }
            for x in samples {
                let g = row
                    .get(&x)
                    .ok_or_else(|| Error::Format(format!("transition on {e:?} lacks a sample")))?;
                if g.nrows() != n || g.ncols() != n {
                    return Err(Error::ShapeMismatch(format!(
                        "transition on {e:?} is not {n}x{n}"
                    )));
                }
                if orthonormality_defect(g) > tol.orth
                    || degree_defect(g, space, space, Parity::Even) > tol.orth
                {
                    return Err(Error::Format(format!(
                        "transition on {e:?} is not a degree 0 unitary"
                    )));
                }
            }
        }
        let bundle = Self {
            cover,
            space,
            transitions,
        };
        for s in bundle.cover.complex().simplices(2) {
            for x in bundle.cover.overlap_samples(s) {
                let defect = frobenius(
                    &(bundle.g(s[0], s[1], x) * bundle.g(s[1], s[2], x) - bundle.g(s[0], s[2], x)),
                );
                if defect > tol.compat {
                    return Err(Error::NotACocycle { degree: 1 });
                }
            }
        }
        Ok(bundle)
    }

    /// Product bundle: identity transitions.
    pub fn trivial(cover: Arc<StarCover>, space: GradedSpace) -> Self {
        let n = space.dim();
        let transitions = cover
            .complex()
            .simplices(1)
            .iter()
            .map(|e| {
                let row = cover
                    .overlap_samples(e)
                    .into_iter()
                    .map(|x| (x, ComplexMatrix::identity(n, n)))
                    .collect();
                ((e[0], e[1]), row)
            })
            .collect();
        Self {
            cover,
            space,
            transitions,
        }
    }

    pub fn cover(&self) -> &Arc<StarCover> {
        &self.cover
    }

    pub fn space(&self) -> GradedSpace {
        self.space
    }

    pub fn g(&self, a: usize, b: usize, x: SampleId) -> ComplexMatrix {
        let n = self.space.dim();
        if a == b {
            return ComplexMatrix::identity(n, n);
        }
        let g = &self.transitions[&(a.min(b), a.max(b))][&x];
        if a < b {
            g.clone()
        } else {
            g.adjoint()
        }
    }

    /// The vectorial bundle with `h = 0` and `phi = g`.
    pub fn promote(&self) -> VectorialBundle {
        let n = self.space.dim();
        let locals = (0..self.cover.n_patches())
            .map(|a| LocalGradedBundle {
                patch: a,
                fibers: self
                    .cover
                    .patch_samples(a)
                    .iter()
                    .map(|&x| {
                        (
                            x,
                            Fiber {
                                space: self.space,
                                h: ComplexMatrix::zeros(n, n),
                            },
                        )
                    })
                    .collect(),
            })
            .collect();
        let transitions = overlap_pairs(&self.cover)
            .into_iter()
            .map(|(a, b)| TransitionData {
                target: a,
                source: b,
                maps: self
                    .cover
                    .overlap_samples(&[a, b])
                    .into_iter()
                    .map(|x| (x, self.g(a, b, x)))
                    .collect(),
            })
            .collect();
        VectorialBundle::new(self.cover.clone(), locals, transitions, None)
            .expect("transitions cover every overlap by construction")
    }

    /// The U(1) transitions of a line bundle.
    pub fn line_transitions(&self, tol: &Tolerances) -> Result<LineTransitions> {
        if self.space.dim() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "bundle has rank {}, not a line bundle",
                self.space.dim()
            )));
        }
        let values = self
            .transitions
            .iter()
            .map(|(e, row)| (*e, row.iter().map(|(x, g)| (*x, g[(0, 0)])).collect()))
            .collect();
        LineTransitions::new(self.cover.clone(), values, tol)
    }
}
