//! The relation `f ≐ g`: agreement on low-spectrum subspaces of `h^2`.

use std::collections::BTreeMap;

use super::Fiber;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_eig, ComplexMatrix};
use crate::simplicial::SampleId;
use crate::tolerance::Tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct PointAgreement {
    pub sample: SampleId,
    /// Largest admissible cutoff below which the maps agree; `f64::INFINITY`
    /// when they agree on the whole fiber.
    pub mu_agree: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoteqReport {
    pub points: Vec<PointAgreement>,
    pub pass: bool,
}

impl DoteqReport {
    pub fn min_mu_agree(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.mu_agree)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `mu_agree` for maps `f, g` out of a fiber whose odd map is `h`.
///
/// Eigenvalues of `h^2` closer than `2 gap_tol` are treated as one cluster,
/// since no admissible cutoff separates them. The maps are compared on the
/// span of the lowest clusters, one cluster at a time.
pub fn doteq_at(
    f: &ComplexMatrix,
    g: &ComplexMatrix,
    h: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<f64> {
    let n = h.nrows();
    if h.ncols() != n || f.ncols() != n || g.ncols() != n || f.nrows() != g.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "compared maps are {}x{} and {}x{} on a fiber of dimension {n}",
            f.nrows(),
            f.ncols(),
            g.nrows(),
            g.ncols()
        )));
    }
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    let square = h.adjoint() * h;
    let eig = hermitian_eig(&square, tol)?;
    let values: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let diff = f - g;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= 2.0 * tol.gap {
            end += 1;
        }
        let defect = frobenius(&(&diff * eig.vectors.columns(0, end)));
        if defect >= tol.doteq {
            return Ok((values[start] - tol.gap).max(0.0));
        }
        start = end;
    }
    Ok(f64::INFINITY)
}

/// Runs [`doteq_at`] at every sample where `f` is given; `g` and the source
/// fibers must be given at the same samples.
pub fn doteq_check(
    f: &BTreeMap<SampleId, ComplexMatrix>,
    g: &BTreeMap<SampleId, ComplexMatrix>,
    source: &BTreeMap<SampleId, Fiber>,
    tol: &Tolerances,
) -> Result<DoteqReport> {
    let mut points = Vec::with_capacity(f.len());
    for (x, fx) in f {
        let (Some(gx), Some(fiber)) = (g.get(x), source.get(x)) else {
            return Err(Error::ShapeMismatch(format!(
                "sample {} missing from one side",
                x.0
            )));
        };
        let mu_agree = doteq_at(fx, gx, &fiber.h, tol)?;
        points.push(PointAgreement {
            sample: *x,
            mu_agree,
            pass: mu_agree > 0.0,
        });
    }
    if g.len() != f.len() {
        return Err(Error::ShapeMismatch(
            "maps are given at different samples".into(),
        ));
    }
    let pass = points.iter().all(|p| p.pass);
    Ok(DoteqReport { points, pass })
}
