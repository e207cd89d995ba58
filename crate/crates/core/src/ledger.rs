//! Grothendieck-style bookkeeping of bundle classes through computable
//! invariants: the twist class and the graded index per component.
//!
//! Equality of classes is homotopy, which has no finite certificate here, so
//! [`equals`] answers `Unknown` unless the invariants differ, verified
//! isomorphisms pair the summands, or the base is a point without twist
//! (where the index is a complete invariant).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::cech::CechContext;
use crate::error::{Error, Result};
use crate::simplicial::ClassCoordinates;
use crate::tolerance::Tolerances;
use crate::vectorial::{
    graded_index, verify_isomorphism, verify_twisted, verify_vectorial, BundleMap, VectorialBundle,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KClassDescriptor {
    /// Dixmier-Douady class of the twist in `H^3`; all zero when untwisted.
    pub twist: ClassCoordinates,
    pub index: Vec<i64>,
    pub provenance: Vec<String>,
    /// Ids of bundles verified to be isomorphic to this one, itself included.
    pub witnesses: BTreeSet<String>,
    pub over_point: bool,
}

fn same_twist(a: &ClassCoordinates, b: &ClassCoordinates) -> bool {
    a.torsion_orders == b.torsion_orders
        && a.free == b.free
        && a.torsion
            .iter()
            .zip(&b.torsion)
            .zip(&a.torsion_orders)
            .all(|((x, y), d)| (x - y).mod_floor(d).is_zero())
}

impl KClassDescriptor {
    pub fn same_invariants(&self, other: &Self) -> bool {
        self.index == other.index
            && self.over_point == other.over_point
            && same_twist(&self.twist, &other.twist)
    }

    /// Both descriptors are known to describe isomorphic bundles.
    pub fn linked(&self, other: &Self) -> bool {
        self.same_invariants(other)
            && (self.provenance == other.provenance
                || !self.witnesses.is_disjoint(&other.witnesses))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "twist": twist_json(&self.twist),
            "index": self.index,
            "provenance": self.provenance,
            "witnesses": self.witnesses,
        })
    }
}

fn twist_json(t: &ClassCoordinates) -> Value {
    let s = |v: &[BigInt]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
    json!({ "free": s(&t.free), "torsion": s(&t.torsion), "orders": s(&t.torsion_orders) })
}

/// Verifies `vb` and extracts its descriptor under the id `id`.
pub fn class_of(vb: &VectorialBundle, id: &str, tol: &Tolerances) -> Result<KClassDescriptor> {
    let report = match vb.twist() {
        Some(c) => verify_twisted(vb, c, tol)?,
        None => verify_vectorial(vb, tol)?,
    };
    if !report.pass {
        let failures = report
            .failures()
            .map(|c| format!("{} on {:?}", c.kind.name(), c.patches))
            .collect();
        return Err(Error::VerificationFailed(failures));
    }
    let complex = vb.cover().complex();
    let ctx = CechContext::new(complex.clone());
    let twist = match vb.twist() {
        Some(c) => ctx.dd_class(c)?.coordinates,
        None => {
            let h3 = ctx.group(3);
            ClassCoordinates {
                free: vec![BigInt::zero(); h3.free_rank],
                torsion: vec![BigInt::zero(); h3.torsion.len()],
                torsion_orders: h3.torsion.clone(),
            }
        }
    };
    Ok(KClassDescriptor {
        twist,
        index: graded_index(vb)?,
        provenance: vec![id.to_string()],
        witnesses: BTreeSet::from([id.to_string()]),
        over_point: complex.n_vertices() == 1,
    })
}

/// Records a verified isomorphism `f : a -> b` with inverse `g` by merging
/// the witness sets. Returns whether the isomorphism verified.
pub fn witness_isomorphism(
    a: &mut KClassDescriptor,
    b: &mut KClassDescriptor,
    maps: (&BundleMap, &BundleMap),
    bundles: (&VectorialBundle, &VectorialBundle),
    tol: &Tolerances,
) -> Result<bool> {
    let report = verify_isomorphism(maps.0, maps.1, bundles.0, bundles.1, tol)?;
    if report.pass {
        let merged: BTreeSet<String> = a.witnesses.union(&b.witnesses).cloned().collect();
        a.witnesses = merged.clone();
        b.witnesses = merged;
    }
    Ok(report.pass)
}

/// `[P_1] + ... - [N_1] - ...` over one twist and one base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalDifference {
    pub twist: ClassCoordinates,
    pub components: usize,
    pub over_point: bool,
    pub positive: Vec<KClassDescriptor>,
    pub negative: Vec<KClassDescriptor>,
}

impl FormalDifference {
    pub fn zero(twist: ClassCoordinates, components: usize, over_point: bool) -> Self {
        Self {
            twist,
            components,
            over_point,
            positive: Vec::new(),
            negative: Vec::new(),
        }
    }

    pub fn class(d: KClassDescriptor) -> Self {
        Self {
            twist: d.twist.clone(),
            components: d.index.len(),
            over_point: d.over_point,
            positive: vec![d],
            negative: Vec::new(),
        }
    }

    /// Sum of the index vectors, positive minus negative.
    pub fn index(&self) -> Vec<i64> {
        let mut out = vec![0; self.components];
        for (side, sign) in [(&self.positive, 1), (&self.negative, -1)] {
            for d in side {
                for (o, v) in out.iter_mut().zip(&d.index) {
                    *o += sign * v;
                }
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    fn compatible(&self, other: &Self) -> bool {
        same_twist(&self.twist, &other.twist)
            && self.components == other.components
            && self.over_point == other.over_point
    }

    /// Cancels linked pairs across the two sides.
    fn reduce(mut self) -> Self {
        let mut negative = std::mem::take(&mut self.negative);
        self.positive
            .retain(|p| match negative.iter().position(|n| p.linked(n)) {
                Some(i) => {
                    negative.remove(i);
                    false
                }
                None => true,
            });
        self.negative = negative;
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "twist": twist_json(&self.twist),
            "index": self.index(),
            "positive": self.positive.iter().map(KClassDescriptor::to_json).collect::<Vec<_>>(),
            "negative": self.negative.iter().map(KClassDescriptor::to_json).collect::<Vec<_>>(),
        })
    }
}

pub fn add(a: &FormalDifference, b: &FormalDifference) -> Result<FormalDifference> {
    if !a.compatible(b) {
        return Err(Error::TwistMismatch);
    }
    let mut out = a.clone();
    out.positive.extend(b.positive.iter().cloned());
    out.negative.extend(b.negative.iter().cloned());
    out.positive.sort_by(|x, y| x.provenance.cmp(&y.provenance));
    out.negative.sort_by(|x, y| x.provenance.cmp(&y.provenance));
    Ok(out.reduce())
}

pub fn negate(a: &FormalDifference) -> FormalDifference {
    let mut out = a.clone();
    std::mem::swap(&mut out.positive, &mut out.negative);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equality {
    Equal,
    Distinct,
    Unknown,
}

/// Perfect matching of `left` onto `right` through linked pairs.
fn linked_matching(left: &[&KClassDescriptor], right: &[&KClassDescriptor]) -> bool {
    fn augment(
        i: usize,
        left: &[&KClassDescriptor],
        right: &[&KClassDescriptor],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..right.len() {
            if seen[j] || !left[i].linked(right[j]) {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, left, right, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    if left.len() != right.len() {
        return false;
    }
    let mut owner = vec![None; right.len()];
    (0..left.len()).all(|i| augment(i, left, right, &mut vec![false; right.len()], &mut owner))
}

/// `a = b` iff `P_a + N_b` and `P_b + N_a` describe isomorphic bundles.
pub fn equals(a: &FormalDifference, b: &FormalDifference) -> Equality {
    if !a.compatible(b) || a.index() != b.index() {
        return Equality::Distinct;
    }
    let untwisted = a.twist.is_zero();
    if a.over_point && untwisted {
        return Equality::Equal;
    }
    let left: Vec<&KClassDescriptor> = a.positive.iter().chain(&b.negative).collect();
    let right: Vec<&KClassDescriptor> = b.positive.iter().chain(&a.negative).collect();
    if linked_matching(&left, &right) {
        Equality::Equal
    } else {
        Equality::Unknown
    }
}
