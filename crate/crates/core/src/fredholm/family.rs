//! Sampled Fredholm families and their spectral truncation.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::cech::{dd_cocycle, UnitaryLiftSystem};
use crate::error::{Error, Result};
use crate::linalg::{
    block_diagonal, frobenius, hat, is_finite, polar_unitary, select_gap, spectral_gaps, widest,
    ComplexMatrix, GradedSpectrum, GradedSubspace, OddMap,
};
use crate::simplicial::{SampleId, StarCover};
use crate::tolerance::Tolerances;
use crate::vectorial::{overlap_pairs, Fiber, LocalGradedBundle, TransitionData, VectorialBundle};

/// `A_x : C^n0 -> C^n1` (an `n1 x n0` matrix) at every sample point.
#[derive(Clone, Debug)]
pub struct FredholmFamily {
    cover: Arc<StarCover>,
    n0: usize,
    n1: usize,
    matrices: BTreeMap<SampleId, ComplexMatrix>,
}

fn check_matrix(m: &ComplexMatrix, n0: usize, n1: usize, what: &str) -> Result<()> {
    if m.nrows() != n1 || m.ncols() != n0 {
        return Err(Error::ShapeMismatch(format!(
            "{what} is {}x{}, family shape needs {n1}x{n0}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::Format(format!("{what} has non-finite entries")));
    }
    Ok(())
}

impl FredholmFamily {
    pub fn new(
        cover: Arc<StarCover>,
        n0: usize,
        n1: usize,
        matrices: BTreeMap<SampleId, ComplexMatrix>,
    ) -> Result<Self> {
        if matrices.len() != cover.n_samples() {
            return Err(Error::Format(format!(
                "family has {} matrices for {} sample points",
                matrices.len(),
                cover.n_samples()
            )));
        }
        for x in cover.samples() {
            let m = matrices
                .get(&x)
                .ok_or_else(|| Error::Format(format!("no matrix at {:?}", cover.simplex(x))))?;
            check_matrix(m, n0, n1, &format!("matrix at {:?}", cover.simplex(x)))?;
        }
        Ok(Self {
            cover,
            n0,
            n1,
            matrices,
        })
    }

    pub fn constant(cover: Arc<StarCover>, a: &ComplexMatrix) -> Self {
        let matrices = cover.samples().map(|x| (x, a.clone())).collect();
        Self {
            n0: a.ncols(),
            n1: a.nrows(),
            cover,
            matrices,
        }
    }

    pub fn cover(&self) -> &Arc<StarCover> {
        &self.cover
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n0, self.n1)
    }

    pub fn matrix(&self, x: SampleId) -> &ComplexMatrix {
        &self.matrices[&x]
    }

    pub fn matrices(&self) -> &BTreeMap<SampleId, ComplexMatrix> {
        &self.matrices
    }
}

/// `n0 - n1`, the index of every member of the family.
pub fn index_of_family(f: &FredholmFamily) -> i64 {
    f.n0 as i64 - f.n1 as i64
}

/// Local families `A_p` on each patch, related on overlaps by conjugation
/// with the lifts: `A_p = g_pq A_q g_pq^*`.
#[derive(Clone, Debug)]
pub struct TwistedFamilyData {
    n: usize,
    locals: Vec<BTreeMap<SampleId, ComplexMatrix>>,
    lifts: UnitaryLiftSystem,
}

impl TwistedFamilyData {
    pub fn new(
        n: usize,
        locals: Vec<BTreeMap<SampleId, ComplexMatrix>>,
        lifts: UnitaryLiftSystem,
        tol: &Tolerances,
    ) -> Result<Self> {
        let cover = lifts.cover().clone();
        if lifts.rank() != n {
            return Err(Error::ShapeMismatch(format!(
                "lifts of rank {} act on families of size {n}",
                lifts.rank()
            )));
        }
        if locals.len() != cover.n_patches() {
            return Err(Error::ShapeMismatch(format!(
                "{} local families for {} patches",
                locals.len(),
                cover.n_patches()
            )));
        }
        for (p, local) in locals.iter().enumerate() {
            let samples = cover.patch_samples(p);
            if local.len() != samples.len() {
                return Err(Error::Format(format!(
                    "local family on patch {p} must cover its star"
                )));
            }
            for x in samples {
                let m = local.get(x).ok_or_else(|| {
                    Error::Format(format!("local family on patch {p} misses a sample"))
                })?;
                check_matrix(m, n, n, &format!("A_{p} at {:?}", cover.simplex(*x)))?;
            }
        }
        for e in cover.complex().simplices(1) {
            let (p, q) = (e[0], e[1]);
            let g = lifts.lift(p, q);
            for x in cover.overlap_samples(e) {
                let (ap, aq) = (&locals[p][&x], &locals[q][&x]);
                let scale = ap
                    .iter()
                    .chain(aq.iter())
                    .fold(1.0f64, |m, z| m.max(z.norm()));
                let defect = frobenius(&(ap - &g * aq * g.adjoint()));
                if defect > tol.compat * scale {
                    return Err(Error::IncompatibleSection {
                        patches: (p, q),
                        sample: cover.simplex(x).to_vec(),
                        defect,
                    });
                }
            }
        }
        Ok(Self { n, locals, lifts })
    }

    /// Every patch sees the same family; compatibility then requires the
    /// lifts to commute with it.
    pub fn global(
        family: &FredholmFamily,
        lifts: UnitaryLiftSystem,
        tol: &Tolerances,
    ) -> Result<Self> {
        let (n0, n1) = family.shape();
        if n0 != n1 {
            return Err(Error::ShapeMismatch(
                "twisted families must be square".into(),
            ));
        }
        let cover = family.cover();
        let locals = (0..cover.n_patches())
            .map(|p| {
                cover
                    .patch_samples(p)
                    .iter()
                    .map(|&x| (x, family.matrix(x).clone()))
                    .collect()
            })
            .collect();
        Self::new(n0, locals, lifts, tol)
    }

    pub fn cover(&self) -> &Arc<StarCover> {
        self.lifts.cover()
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn locals(&self) -> &[BTreeMap<SampleId, ComplexMatrix>] {
        &self.locals
    }

    pub fn lifts(&self) -> &UnitaryLiftSystem {
        &self.lifts
    }
}

/// Result of truncating one operator.
#[derive(Clone, Debug)]
pub struct SingleApproximation {
    pub mu: f64,
    pub subspace: GradedSubspace,
    /// `hat(A)` compressed to the subspace.
    pub h: ComplexMatrix,
    /// Full spectrum of `hat(A)^2`, ascending.
    pub spectrum: Vec<f64>,
}

pub fn approximate_single(
    a: &ComplexMatrix,
    lambda_max: f64,
    tol: &Tolerances,
) -> Result<SingleApproximation> {
    if !is_finite(a) {
        return Err(Error::Format("operator has non-finite entries".into()));
    }
    let h = hat(a);
    let spectrum = h.square_spectrum(tol)?;
    let values = spectrum.values();
    let mu = select_gap(&[values.clone()], lambda_max, tol.gap)?;
    let subspace = spectrum.subspace_below(mu, tol.gap)?;
    let h = subspace.compress(h.matrix());
    Ok(SingleApproximation {
        mu,
        subspace,
        h,
        spectrum: values,
    })
}

/// A truncated family: the vectorial bundle together with the cutoff of
/// each patch and the ambient frames `B_p(x)` its fibers were cut out with.
#[derive(Clone, Debug)]
pub struct FamilyApproximation {
    pub bundle: VectorialBundle,
    pub cutoffs: Vec<f64>,
    pub frames: Vec<BTreeMap<SampleId, GradedSubspace>>,
}

impl FamilyApproximation {
    pub fn frame(&self, p: usize, x: SampleId) -> &GradedSubspace {
        &self.frames[p][&x]
    }
}

/// Cutoff for one patch: among gaps common to all its spectra, the widest
/// one below which the graded dimensions are the same at every sample;
/// failing that, the widest gap.
fn patch_cutoff(
    spectra: &[&GradedSpectrum],
    lambda_max: f64,
    tol: &Tolerances,
    patch: usize,
) -> Result<f64> {
    let values: Vec<Vec<f64>> = spectra.iter().map(|s| s.values()).collect();
    let gaps = spectral_gaps(&values, lambda_max, tol.gap);
    let constant: Vec<(f64, f64)> = gaps
        .iter()
        .copied()
        .filter(|&(lo, hi)| {
            let mu = 0.5 * (lo + hi);
            spectra
                .windows(2)
                .all(|w| w[0].dims_below(mu) == w[1].dims_below(mu))
        })
        .collect();
    widest(&constant)
        .or_else(|| widest(&gaps))
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .ok_or(Error::NoGap {
            lambda_max,
            gap_tol: tol.gap,
            patch: Some(patch),
        })
}

/// Rotates each degree block of `sub` towards `reference` by the unitary
/// polar factor, so that frames vary continuously across a patch.
fn align(sub: &mut GradedSubspace, reference: &GradedSubspace, tol: &Tolerances) {
    if sub.dim_even != reference.dim_even || sub.dim_odd() != reference.dim_odd() {
        return;
    }
    for (start, len) in [(0, sub.dim_even), (sub.dim_even, sub.dim_odd())] {
        if len == 0 {
            continue;
        }
        let block = sub.basis.columns(start, len).into_owned();
        let overlap = block.adjoint() * reference.basis.columns(start, len);
        if let Some(q) = polar_unitary(&overlap, tol) {
            sub.basis.columns_mut(start, len).copy_from(&(block * q));
        }
    }
}

struct LocalSpectra<'a> {
    hats: BTreeMap<SampleId, &'a OddMap>,
    spectra: BTreeMap<SampleId, &'a GradedSpectrum>,
}

type Lift<'a> = dyn Fn(usize, usize) -> Option<ComplexMatrix> + Sync + 'a;

fn assemble(
    cover: &Arc<StarCover>,
    locals: &[LocalSpectra<'_>],
    lift: &Lift<'_>,
    lambda_max: f64,
    tol: &Tolerances,
) -> Result<FamilyApproximation> {
    let patches: Vec<Result<(f64, BTreeMap<SampleId, GradedSubspace>, LocalGradedBundle)>> = (0
        ..cover.n_patches())
        .into_par_iter()
        .map(|p| {
            let local = &locals[p];
            let spectra: Vec<&GradedSpectrum> = local.spectra.values().copied().collect();
            let mu = patch_cutoff(&spectra, lambda_max, tol, p)?;
            let reference = cover.sample_of(&[p]).expect("vertex sample");
            let base = local.spectra[&reference].subspace_below(mu, tol.gap)?;
            let mut frames = BTreeMap::new();
            let mut fibers = BTreeMap::new();
            for (&x, spectrum) in &local.spectra {
                let mut sub = spectrum.subspace_below(mu, tol.gap)?;
                if x != reference {
                    align(&mut sub, &base, tol);
                }
                let h = sub.compress(local.hats[&x].matrix());
                fibers.insert(
                    x,
                    Fiber {
                        space: sub.graded_dims(),
                        h,
                    },
                );
                frames.insert(x, sub);
            }
            Ok((mu, frames, LocalGradedBundle { patch: p, fibers }))
        })
        .collect();
    let mut cutoffs = Vec::new();
    let mut frames = Vec::new();
    let mut bundles = Vec::new();
    for r in patches {
        let (mu, f, b) = r?;
        cutoffs.push(mu);
        frames.push(f);
        bundles.push(b);
    }
    let transitions: Vec<TransitionData> = overlap_pairs(cover)
        .into_par_iter()
        .map(|(a, b)| {
            let g = lift(a, b);
            let maps = cover
                .overlap_samples(&[a, b])
                .into_iter()
                .map(|x| {
                    let (fa, fb) = (&frames[a][&x].basis, &frames[b][&x].basis);
                    let m = match &g {
                        Some(g) => fa.adjoint() * g * fb,
                        None => fa.adjoint() * fb,
                    };
                    (x, m)
                })
                .collect();
            TransitionData {
                target: a,
                source: b,
                maps,
            }
        })
        .collect();
    let bundle = VectorialBundle::new(cover.clone(), bundles, transitions, None)?;
    Ok(FamilyApproximation {
        bundle,
        cutoffs,
        frames,
    })
}

fn spectra_of(hats: &[OddMap], tol: &Tolerances) -> Result<Vec<GradedSpectrum>> {
    let spectra: Vec<Result<GradedSpectrum>> =
        hats.par_iter().map(|h| h.square_spectrum(tol)).collect();
    spectra.into_iter().collect()
}

/// Per patch, the low-spectrum subbundle of `hat(A)^2` below a cutoff
/// chosen from the patch's samples, with `h = hat(A)` restricted to it;
/// transitions are inclusion followed by orthogonal projection.
pub fn approximate_family(
    f: &FredholmFamily,
    lambda_max: f64,
    tol: &Tolerances,
) -> Result<FamilyApproximation> {
    let cover = f.cover();
    let hats: Vec<OddMap> = cover.samples().map(|x| hat(f.matrix(x))).collect();
    let spectra = spectra_of(&hats, tol)?;
    let locals: Vec<LocalSpectra<'_>> = (0..cover.n_patches())
        .map(|p| LocalSpectra {
            hats: cover
                .patch_samples(p)
                .iter()
                .map(|&x| (x, &hats[x.0]))
                .collect(),
            spectra: cover
                .patch_samples(p)
                .iter()
                .map(|&x| (x, &spectra[x.0]))
                .collect(),
        })
        .collect();
    assemble(cover, &locals, &|_, _| None, lambda_max, tol)
}

/// As [`approximate_family`] with the local families of each patch, and
/// transitions `B_p^* diag(g_pq, g_pq) B_q`. The result carries the twist
/// cocycle of the lifts.
pub fn approximate_twisted_family(
    t: &TwistedFamilyData,
    lambda_max: f64,
    tol: &Tolerances,
) -> Result<FamilyApproximation> {
    let cover = t.cover();
    let twist = dd_cocycle(t.lifts(), tol)?;
    let keyed: Vec<Vec<(SampleId, OddMap)>> = t
        .locals
        .iter()
        .map(|local| local.iter().map(|(x, a)| (*x, hat(a))).collect())
        .collect();
    let flat: Vec<OddMap> = keyed.iter().flatten().map(|(_, h)| h.clone()).collect();
    let spectra = spectra_of(&flat, tol)?;
    let mut offset = 0;
    let mut locals = Vec::with_capacity(keyed.len());
    for patch in &keyed {
        let mut hats = BTreeMap::new();
        let mut specs = BTreeMap::new();
        for (i, (x, h)) in patch.iter().enumerate() {
            hats.insert(*x, h);
            specs.insert(*x, &spectra[offset + i]);
        }
        offset += patch.len();
        locals.push(LocalSpectra {
            hats,
            spectra: specs,
        });
    }
    let lift = |a: usize, b: usize| {
        let g = t.lifts.lift(a, b);
        Some(block_diagonal(&[&g, &g]))
    };
    let mut approx = assemble(cover, &locals, &lift, lambda_max, tol)?;
    approx.bundle.set_twist(Some(twist));
    Ok(approx)
}

/// Neighboring samples (a simplex and one of its facets) whose spectra of
/// `hat(A)^2` differ by more than `bound` in some sorted eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralJump {
    pub from: SampleId,
    pub to: SampleId,
    pub jump: f64,
}

pub fn spectral_jumps(
    f: &FredholmFamily,
    bound: f64,
    tol: &Tolerances,
) -> Result<Vec<SpectralJump>> {
    let cover = f.cover();
    let hats: Vec<OddMap> = cover.samples().map(|x| hat(f.matrix(x))).collect();
    let values: Vec<Vec<f64>> = spectra_of(&hats, tol)?.iter().map(|s| s.values()).collect();
    let mut out = Vec::new();
    for x in cover.samples() {
        let s = cover.simplex(x);
        if s.len() < 2 {
            continue;
        }
        for i in 0..s.len() {
            let mut facet = s.to_vec();
            facet.remove(i);
            let y = cover.sample_of(&facet).expect("facets are simplices");
            let jump = values[x.0]
                .iter()
                .zip(&values[y.0])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if jump > bound {
                out.push(SpectralJump {
                    from: y,
                    to: x,
                    jump,
                });
            }
        }
    }
    Ok(out)
}

/// Comparison of two truncations of one family at different `lambda_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffComparison {
    /// Largest defect of the lower-cutoff frame and `h` against the
    /// higher-cutoff data restricted to it.
    pub max_defect: f64,
    pub same_index: bool,
    pub pass: bool,
}

pub fn compare_cutoffs(
    f: &FredholmFamily,
    a: &FamilyApproximation,
    b: &FamilyApproximation,
    tol: &Tolerances,
) -> Result<CutoffComparison> {
    let cover = f.cover();
    let mut worst = 0.0f64;
    for p in 0..cover.n_patches() {
        let (small, large) = if a.cutoffs[p] <= b.cutoffs[p] {
            (a, b)
        } else {
            (b, a)
        };
        for &x in cover.patch_samples(p) {
            let s = &small.frames[p][&x].basis;
            let l = &large.frames[p][&x].basis;
            let into = l.adjoint() * s;
            worst = worst.max(frobenius(&(l * &into - s)));
            let h_small = small.bundle.fiber(p, x).h.clone();
            let h_large = &large.bundle.fiber(p, x).h;
            worst = worst.max(frobenius(&(into.adjoint() * h_large * &into - h_small)));
        }
    }
    for (p, q) in overlap_pairs(cover) {
        for x in cover.overlap_samples(&[p, q]) {
            let (sp, lp) = if a.cutoffs[p] <= b.cutoffs[p] {
                (a, b)
            } else {
                (b, a)
            };
            let (sq, lq) = if a.cutoffs[q] <= b.cutoffs[q] {
                (a, b)
            } else {
                (b, a)
            };
            // compare on the part below both small cutoffs
            let ip = lp.frames[p][&x].basis.adjoint() * &sp.frames[p][&x].basis;
            let iq = lq.frames[q][&x].basis.adjoint() * &sq.frames[q][&x].basis;
            let small_phi = sp.frames[p][&x].basis.adjoint() * &sq.frames[q][&x].basis;
            let large_phi = lp.frames[p][&x].basis.adjoint() * &lq.frames[q][&x].basis;
            let restricted = ip.adjoint() * large_phi * &iq;
            worst = worst.max(frobenius(&(restricted - small_phi)));
        }
    }
    let same_index =
        crate::vectorial::graded_index(&a.bundle)? == crate::vectorial::graded_index(&b.bundle)?;
    Ok(CutoffComparison {
        max_defect: worst,
        same_index,
        pass: same_index && worst < tol.doteq,
    })
}
