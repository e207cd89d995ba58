//! Realizing a vector bundle as the kernel bundle of a family.

use std::collections::BTreeMap;

use crate::cech::LineTransitions;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::simplicial::SampleId;
use crate::tolerance::Tolerances;
use crate::vectorial::OrdinaryBundle;

use super::family::{FamilyApproximation, FredholmFamily};

/// A family with `Ker A_x = E0_x` and `Ker A_x^* = E1_x`, together with the
/// embeddings `S_p(x) : E_x -> C^n0 + C^n1` in each patch's local frame.
#[derive(Clone, Debug)]
pub struct KernelFamily {
    pub family: FredholmFamily,
    pub embeddings: Vec<BTreeMap<SampleId, ComplexMatrix>>,
}

/// Orthonormal basis of the orthogonal complement of the columns of `k`.
fn complement(k: &ComplexMatrix, n: usize, tol: &Tolerances) -> Result<ComplexMatrix> {
    let m = n - k.ncols();
    let projector = ComplexMatrix::identity(n, n) - k * k.adjoint();
    let eig = hermitian_eig(&projector, tol)?;
    Ok(eig.vectors.columns(n - m, m).into_owned())
}

/// Embeds the bundle into a trivial bundle with the partition of unity
/// `rho_a` (barycentric weights): `S_b(x) = [sqrt(rho_a(x)) g_ab(x)]_a`,
/// then takes `A_x` to be a partial isometry from the complement of
/// `S(E0_x)` onto the complement of `S(E1_x)`. Thus `hat(A_x)^2` has
/// spectrum in `{0, 1}` and its kernel is the embedded fiber.
///
/// The default even ambient dimension is `r0 + (P - 1) max(r0, r1) + 1` for
/// `P` patches, which leaves a nonzero `A_x` even over a point; `ambient`
/// overrides it.
pub fn kernel_bundle_family(
    e: &OrdinaryBundle,
    ambient: Option<usize>,
    tol: &Tolerances,
) -> Result<KernelFamily> {
    let cover = e.cover().clone();
    let space = e.space();
    let (r0, r1) = (space.dim_even, space.dim_odd);
    let patches = cover.n_patches();
    let needed = r0 + (patches - 1) * r0.max(r1);
    let n0 = match ambient {
        Some(n0) if n0 < needed => return Err(Error::EmbeddingTooSmall { needed, given: n0 }),
        Some(n0) => n0,
        None => needed + 1,
    };
    let n1 = n0 - r0 + r1;

    let embed = |b: usize, x: SampleId| -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(n0 + n1, r0 + r1);
        for &a in cover.simplex(x) {
            let w = cover.barycentric_weight(a, x).sqrt();
            let g = e.g(a, b, x) * num_complex::Complex64::new(w, 0.0);
            s.view_mut((a * r0, 0), (r0, r0))
                .copy_from(&g.view((0, 0), (r0, r0)));
            s.view_mut((n0 + a * r1, r0), (r1, r1))
                .copy_from(&g.view((r0, r0), (r1, r1)));
        }
        s
    };

    let mut matrices = BTreeMap::new();
    for x in cover.samples() {
        let s = embed(cover.simplex(x)[0], x);
        let k0 = s.view((0, 0), (n0, r0)).into_owned();
        let k1 = s.view((n0, r0), (n1, r1)).into_owned();
        let y = complement(&k0, n0, tol)?;
        let z = complement(&k1, n1, tol)?;
        matrices.insert(x, z * y.adjoint());
    }
    let embeddings = (0..patches)
        .map(|p| {
            cover
                .patch_samples(p)
                .iter()
                .map(|&x| (x, embed(p, x)))
                .collect()
        })
        .collect();
    let family = FredholmFamily::new(cover, n0, n1, matrices)?;
    Ok(KernelFamily { family, embeddings })
}

/// Transitions of a truncated family whose fibers are all lines (graded
/// dimensions `(1, 0)` or `(0, 1)`), read off from `phi_ab`.
pub fn kernel_line_transitions(
    approx: &FamilyApproximation,
    tol: &Tolerances,
) -> Result<LineTransitions> {
    let vb = &approx.bundle;
    let cover = vb.cover();
    for local in vb.locals() {
        if let Some((x, f)) = local.fibers.iter().find(|(_, f)| f.dim() != 1) {
            return Err(Error::ShapeMismatch(format!(
                "fiber of patch {} at {:?} has dimension {}, not a line",
                local.patch,
                cover.simplex(*x),
                f.dim()
            )));
        }
    }
    let values = cover
        .complex()
        .simplices(1)
        .iter()
        .map(|edge| {
            let t = vb.transition(edge[0], edge[1]);
            (
                (edge[0], edge[1]),
                t.maps.iter().map(|(x, m)| (*x, m[(0, 0)])).collect(),
            )
        })
        .collect();
    LineTransitions::new(cover.clone(), values, tol)
}
