//! Direct sums, gauge transformations, support and graded index.

use std::collections::{BTreeMap, BTreeSet};

use super::verify::twists_agree;
use super::{Fiber, LocalGradedBundle, TransitionData, VectorialBundle};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, GradedSpace};
use crate::simplicial::SampleId;
use crate::tolerance::Tolerances;

/// Per-patch fiber maps `f_a(x)`, one per sample of `U_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleMap {
    pub maps: Vec<BTreeMap<SampleId, ComplexMatrix>>,
}

impl BundleMap {
    pub fn identity(vb: &VectorialBundle) -> Self {
        Self {
            maps: vb
                .locals()
                .iter()
                .map(|l| {
                    l.fibers
                        .iter()
                        .map(|(x, f)| (*x, ComplexMatrix::identity(f.dim(), f.dim())))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn zero(src: &VectorialBundle, dst: &VectorialBundle) -> Self {
        Self {
            maps: src
                .locals()
                .iter()
                .map(|l| {
                    l.fibers
                        .iter()
                        .map(|(x, f)| {
                            (
                                *x,
                                ComplexMatrix::zeros(dst.fiber(l.patch, *x).dim(), f.dim()),
                            )
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            maps: self
                .maps
                .iter()
                .map(|m| m.iter().map(|(x, f)| (*x, f.adjoint())).collect())
                .collect(),
        }
    }
}

/// Position of coordinate `i` of a summand inside the graded direct sum,
/// laid out as `[a even, b even, a odd, b odd]`.
fn sum_positions(a: GradedSpace, b: GradedSpace) -> (Vec<usize>, Vec<usize>) {
    let even = a.dim_even + b.dim_even;
    let pa = (0..a.dim())
        .map(|i| {
            if i < a.dim_even {
                i
            } else {
                even + i - a.dim_even
            }
        })
        .collect();
    let pb = (0..b.dim())
        .map(|j| {
            if j < b.dim_even {
                a.dim_even + j
            } else {
                even + a.dim_odd + j - b.dim_even
            }
        })
        .collect();
    (pa, pb)
}

fn sum_space(a: GradedSpace, b: GradedSpace) -> GradedSpace {
    GradedSpace::new(a.dim_even + b.dim_even, a.dim_odd + b.dim_odd)
}

/// Block-diagonal sum of `ma : sa -> ta` and `mb : sb -> tb` in graded layout.
fn sum_map(
    ma: &ComplexMatrix,
    mb: &ComplexMatrix,
    (sa, sb): (GradedSpace, GradedSpace),
    (ta, tb): (GradedSpace, GradedSpace),
) -> ComplexMatrix {
    let (ca, cb) = sum_positions(sa, sb);
    let (ra, rb) = sum_positions(ta, tb);
    let mut out = ComplexMatrix::zeros(ta.dim() + tb.dim(), sa.dim() + sb.dim());
    for (i, &r) in ra.iter().enumerate() {
        for (j, &c) in ca.iter().enumerate() {
            out[(r, c)] = ma[(i, j)];
        }
    }
    for (i, &r) in rb.iter().enumerate() {
        for (j, &c) in cb.iter().enumerate() {
            out[(r, c)] = mb[(i, j)];
        }
    }
    out
}

/// Fiberwise graded direct sum with block-diagonal transitions.
pub fn direct_sum(a: &VectorialBundle, b: &VectorialBundle) -> Result<VectorialBundle> {
    if !a.same_cover(b) {
        return Err(Error::CoverMismatch);
    }
    if !twists_agree(a.twist(), b.twist()) {
        return Err(Error::TwistMismatch);
    }
    let cover = a.cover().clone();
    let locals = (0..cover.n_patches())
        .map(|p| LocalGradedBundle {
            patch: p,
            fibers: a
                .local(p)
                .fibers
                .iter()
                .map(|(x, fa)| {
                    let fb = b.fiber(p, *x);
                    let spaces = (fa.space, fb.space);
                    let h = sum_map(&fa.h, &fb.h, spaces, spaces);
                    (
                        *x,
                        Fiber {
                            space: sum_space(fa.space, fb.space),
                            h,
                        },
                    )
                })
                .collect(),
        })
        .collect();
    let transitions = a
        .transitions()
        .map(|t| {
            let (s, r) = (t.source, t.target);
            let maps = t
                .maps
                .iter()
                .map(|(x, ma)| {
                    let m = sum_map(
                        ma,
                        b.phi(r, s, *x),
                        (a.fiber(s, *x).space, b.fiber(s, *x).space),
                        (a.fiber(r, *x).space, b.fiber(r, *x).space),
                    );
                    (*x, m)
                })
                .collect();
            TransitionData {
                target: r,
                source: s,
                maps,
            }
        })
        .collect();
    let twist = a.twist().or(b.twist()).cloned();
    VectorialBundle::new(cover, locals, transitions, twist)
}

/// Transports `h` and `phi` along degree 0 unitaries `u_a(x)`:
/// `h -> u h u*`, `phi_ab -> u_a phi_ab u_b*`.
pub fn gauge_transform(vb: &VectorialBundle, u: &BundleMap) -> Result<VectorialBundle> {
    let cover = vb.cover().clone();
    if u.maps.len() != cover.n_patches() {
        return Err(Error::ShapeMismatch(
            "gauge must have one component per patch".into(),
        ));
    }
    let mut locals = Vec::with_capacity(cover.n_patches());
    for (p, local) in vb.locals().iter().enumerate() {
        let mut fibers = BTreeMap::new();
        for (x, f) in &local.fibers {
            let g = u.maps[p]
                .get(x)
                .filter(|g| g.nrows() == f.dim() && g.ncols() == f.dim())
                .ok_or_else(|| {
                    Error::ShapeMismatch(format!("gauge on patch {p} does not fit the fiber"))
                })?;
            fibers.insert(
                *x,
                Fiber {
                    space: f.space,
                    h: g * &f.h * g.adjoint(),
                },
            );
        }
        locals.push(LocalGradedBundle { patch: p, fibers });
    }
    let transitions = vb
        .transitions()
        .map(|t| TransitionData {
            target: t.target,
            source: t.source,
            maps: t
                .maps
                .iter()
                .map(|(x, m)| (*x, &u.maps[t.target][x] * m * u.maps[t.source][x].adjoint()))
                .collect(),
        })
        .collect();
    VectorialBundle::new(cover, locals, transitions, vb.twist().cloned())
}

/// Samples where some `h_a(x)` has a singular value below `threshold`.
pub fn support(
    vb: &VectorialBundle,
    threshold: f64,
    tol: &Tolerances,
) -> Result<BTreeSet<SampleId>> {
    let mut out = BTreeSet::new();
    for local in vb.locals() {
        for (x, f) in &local.fibers {
            if f.dim() == 0 || out.contains(x) {
                continue;
            }
            let eig = hermitian_eig(&(f.h.adjoint() * &f.h), tol)?;
            if eig.values[0].max(0.0).sqrt() < threshold {
                out.insert(*x);
            }
        }
    }
    Ok(out)
}

/// `dim E0 - dim E1` per connected component of the base, in the order of
/// [`crate::simplicial::SimplicialComplex::component_labels`].
pub fn graded_index(vb: &VectorialBundle) -> Result<Vec<i64>> {
    let complex = vb.cover().complex();
    let labels = complex.component_labels();
    let mut index: Vec<Option<(i64, usize, SampleId)>> = vec![None; complex.n_components()];
    for local in vb.locals() {
        for (x, f) in &local.fibers {
            let comp = labels[local.patch];
            let value = f.space.index();
            match index[comp] {
                None => index[comp] = Some((value, local.patch, *x)),
                Some((v, p, y)) if v != value => {
                    let cover = vb.cover();
                    return Err(Error::InconsistentIndex(format!(
                        "patch {p} at {:?} has index {v}, patch {} at {:?} has {value}",
                        cover.simplex(y),
                        local.patch,
                        cover.simplex(*x)
                    )));
                }
                Some(_) => {}
            }
        }
    }
    Ok(index
        .into_iter()
        .map(|v| v.map_or(0, |(i, _, _)| i))
        .collect())
}
