//! JSON file formats and report number formatting.
//!
//! Matrices are row-major nested arrays of `[re, im]` pairs. Simplices and
//! sample points are keyed by comma-separated ascending vertex lists;
//! cochain entries left out are zero.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::cech::{U1Cochain, UnitaryLiftSystem};
use crate::error::{Error, Result};
use crate::fredholm::{FredholmFamily, TwistedFamilyData};
use crate::linalg::{c, ComplexMatrix, GradedSpace};
use crate::simplicial::{
    parse_simplex_key, simplex_key, IntegerCochain, SampleId, SimplicialComplex, StarCover,
};
use crate::tolerance::Tolerances;
use crate::vectorial::{Fiber, LocalGradedBundle, TransitionData, VectorialBundle};

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value> {
    v.get(name)
        .ok_or_else(|| bad(format!("missing field `{name}`")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(format!("`{what}` must be a nonnegative integer")))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| bad(format!("`{what}` must be an object")))
}

/// Rounds to 12 significant digits, so reports do not depend on the last
/// bits of floating point results.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// A report number: rounded, with infinities as the strings `"inf"`/`"-inf"`.
pub fn number(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else if x.is_nan() {
        json!("nan")
    } else {
        json!(round12(x))
    }
}

pub fn complex_to_json(k: &SimplicialComplex) -> Value {
    json!({ "vertices": k.n_vertices(), "maximal_simplices": k.maximal_simplices() })
}

pub fn complex_from_value(v: &Value) -> Result<SimplicialComplex> {
    let n = as_usize(field(v, "vertices")?, "vertices")?;
    let list = field(v, "maximal_simplices")?
        .as_array()
        .ok_or_else(|| bad("`maximal_simplices` must be an array"))?;
    let mut maximal = Vec::with_capacity(list.len());
    for s in list {
        let s = s
            .as_array()
            .ok_or_else(|| bad("each simplex must be an array of vertices"))?;
        maximal.push(
            s.iter()
                .map(|x| as_usize(x, "vertex"))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    SimplicialComplex::new(n, &maximal)
}

pub fn complex_from_json(text: &str) -> Result<SimplicialComplex> {
    complex_from_value(&serde_json::from_str(text)?)
}

pub fn matrix_to_value(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn matrix_from_value(v: &Value, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    let r = v
        .as_array()
        .ok_or_else(|| bad("matrix must be an array of rows"))?;
    if r.len() != rows {
        return Err(Error::ShapeMismatch(format!(
            "matrix has {} rows, expected {rows}",
            r.len()
        )));
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (i, row) in r.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| bad("matrix row must be an array"))?;
        if row.len() != cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix row has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (j, z) in row.iter().enumerate() {
            let pair = z
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| bad("entries must be [re, im]"))?;
            let re = pair[0]
                .as_f64()
                .ok_or_else(|| bad("entry is not a number"))?;
            let im = pair[1]
                .as_f64()
                .ok_or_else(|| bad("entry is not a number"))?;
            m[(i, j)] = c(re, im);
        }
    }
    Ok(m)
}

fn sample_from_key(cover: &StarCover, key: &str) -> Result<SampleId> {
    let s = parse_simplex_key(key)?;
    cover
        .sample_of(&s)
        .ok_or_else(|| bad(format!("`{key}` is not a simplex of the complex")))
}

fn keyed_matrices(
    cover: &StarCover,
    v: &Value,
    shape: impl Fn(SampleId) -> (usize, usize),
) -> Result<BTreeMap<SampleId, ComplexMatrix>> {
    let mut out = BTreeMap::new();
    for (key, m) in as_object(v, "matrices")? {
        let x = sample_from_key(cover, key)?;
        let (r, c) = shape(x);
        out.insert(x, matrix_from_value(m, r, c)?);
    }
    Ok(out)
}

fn keyed_to_value(cover: &StarCover, maps: &BTreeMap<SampleId, ComplexMatrix>) -> Value {
    Value::Object(
        maps.iter()
            .map(|(x, m)| (simplex_key(cover.simplex(*x)), matrix_to_value(m)))
            .collect(),
    )
}

pub fn integer_cochain_to_json(k: &SimplicialComplex, c: &IntegerCochain) -> Value {
    let values: Map<String, Value> = k
        .simplices(c.degree)
        .iter()
        .zip(&c.values)
        .filter(|(_, v)| !v.is_zero())
        .map(|(s, v)| (simplex_key(s), Value::String(v.to_string())))
        .collect();
    json!({ "degree": c.degree, "values": values })
}

pub fn integer_cochain_from_value(k: &SimplicialComplex, v: &Value) -> Result<IntegerCochain> {
    let degree = as_usize(field(v, "degree")?, "degree")?;
    let mut c = IntegerCochain::zero(k, degree);
    for (key, val) in as_object(field(v, "values")?, "values")? {
        let s = parse_simplex_key(key)?;
        let i = k
            .index_of(&s)
            .filter(|_| s.len() == degree + 1)
            .ok_or_else(|| bad(format!("`{key}` is not a {degree}-simplex")))?;
        c.values[i] = match val {
            Value::String(t) => {
                BigInt::from_str(t).map_err(|_| bad(format!("bad integer `{t}`")))?
            }
            Value::Number(n) => BigInt::from(
                n.as_i64()
                    .ok_or_else(|| bad("cochain values must be integers"))?,
            ),
            _ => return Err(bad("cochain values must be integers")),
        };
    }
    Ok(c)
}

pub fn u1_to_json(k: &SimplicialComplex, c: &U1Cochain) -> Value {
    let turns: Map<String, Value> = k
        .simplices(c.degree())
        .iter()
        .zip(c.turns())
        .filter(|(_, q)| !q.is_zero())
        .map(|(s, q)| (simplex_key(s), Value::String(q.to_string())))
        .collect();
    json!({ "degree": c.degree(), "turns": turns })
}

/// A rational cochain as `{"degree", "values": {key: "p/q"}}`, zeros omitted.
pub fn rational_cochain_to_json(
    k: &SimplicialComplex,
    degree: usize,
    values: &[BigRational],
) -> Value {
    let values: Map<String, Value> = k
        .simplices(degree)
        .iter()
        .zip(values)
        .filter(|(_, q)| !q.is_zero())
        .map(|(s, q)| (simplex_key(s), Value::String(q.to_string())))
        .collect();
    json!({ "degree": degree, "values": values })
}

pub fn parse_rational(t: &str) -> Result<BigRational> {
    let t = t.trim();
    if let Ok(q) = BigRational::from_str(t) {
        return Ok(q);
    }
    BigInt::from_str(t)
        .map(BigRational::from_integer)
        .map_err(|_| bad(format!("bad fraction `{t}`")))
}

pub fn u1_from_value(k: &SimplicialComplex, v: &Value) -> Result<U1Cochain> {
    let degree = as_usize(field(v, "degree")?, "degree")?;
    let mut turns = vec![BigRational::from_integer(BigInt::from(0)); k.count(degree)];
    for (key, val) in as_object(field(v, "turns")?, "turns")? {
        let s = parse_simplex_key(key)?;
        let i = k
            .index_of(&s)
            .filter(|_| s.len() == degree + 1)
            .ok_or_else(|| bad(format!("`{key}` is not a {degree}-simplex")))?;
        turns[i] = match val {
            Value::String(t) => parse_rational(t)?,
            Value::Number(n) => BigRational::from_integer(BigInt::from(
                n.as_i64()
                    .ok_or_else(|| bad("turns must be exact fractions like \"1/2\""))?,
            )),
            _ => return Err(bad("turns must be exact fractions like \"1/2\"")),
        };
    }
    Ok(U1Cochain::new(degree, turns))
}

fn shape_of(v: &Value) -> Result<(usize, usize)> {
    let s = field(v, "shape")?
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| bad("`shape` must be [n0, n1]"))?;
    Ok((as_usize(&s[0], "shape")?, as_usize(&s[1], "shape")?))
}

pub fn family_to_json(f: &FredholmFamily) -> Value {
    let cover = f.cover();
    let (n0, n1) = f.shape();
    json!({
        "complex": complex_to_json(cover.complex()),
        "shape": [n0, n1],
        "matrices": keyed_to_value(cover, f.matrices()),
    })
}

/// A family file holds either `matrices` (one global family) or `locals`
/// (one family per patch, for twisted data).
pub enum FamilyFile {
    Global(FredholmFamily),
    Local {
        cover: Arc<StarCover>,
        n: usize,
        locals: Vec<BTreeMap<SampleId, ComplexMatrix>>,
    },
}

pub fn family_from_value(v: &Value) -> Result<FamilyFile> {
    let cover = Arc::new(StarCover::new(complex_from_value(field(v, "complex")?)?));
    let (n0, n1) = shape_of(v)?;
    if let Some(locals) = v.get("locals") {
        if n0 != n1 {
            return Err(Error::ShapeMismatch(
                "twisted families must be square".into(),
            ));
        }
        let obj = as_object(locals, "locals")?;
        let mut out = vec![BTreeMap::new(); cover.n_patches()];
        for (key, m) in obj {
            let p: usize = key
                .parse()
                .map_err(|_| bad(format!("bad patch id `{key}`")))?;
            if p >= out.len() {
                return Err(bad(format!("patch {p} does not exist")));
            }
            out[p] = keyed_matrices(&cover, m, |_| (n1, n0))?;
        }
        return Ok(FamilyFile::Local {
            cover,
            n: n0,
            locals: out,
        });
    }
    let matrices = keyed_matrices(&cover, field(v, "matrices")?, |_| (n1, n0))?;
    Ok(FamilyFile::Global(FredholmFamily::new(
        cover, n0, n1, matrices,
    )?))
}

pub fn twisted_family_to_json(t: &TwistedFamilyData) -> Value {
    let cover = t.cover();
    let locals: Map<String, Value> = t
        .locals()
        .iter()
        .enumerate()
        .map(|(p, m)| (p.to_string(), keyed_to_value(cover, m)))
        .collect();
    json!({
        "complex": complex_to_json(cover.complex()),
        "shape": [t.size(), t.size()],
        "locals": locals,
    })
}

pub fn lifts_to_json(l: &UnitaryLiftSystem) -> Value {
    let unitaries: Map<String, Value> = l
        .unitaries()
        .iter()
        .map(|((a, b), u)| (format!("{a},{b}"), matrix_to_value(u)))
        .collect();
    json!({ "rank": l.rank(), "unitaries": unitaries })
}

pub fn lifts_from_value(
    cover: Arc<StarCover>,
    v: &Value,
    tol: &Tolerances,
) -> Result<UnitaryLiftSystem> {
    let rank = as_usize(field(v, "rank")?, "rank")?;
    let mut lifts = BTreeMap::new();
    for (key, m) in as_object(field(v, "unitaries")?, "unitaries")? {
        let parts: Vec<&str> = key.split(',').collect();
        let [a, b] = parts[..] else {
            return Err(bad(format!("lift key `{key}` must be `a,b`")));
        };
        let a: usize = a
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad lift key `{key}`")))?;
        let b: usize = b
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad lift key `{key}`")))?;
        lifts.insert((a, b), matrix_from_value(m, rank, rank)?);
    }
    UnitaryLiftSystem::new(cover, rank, lifts, tol)
}

pub fn bundle_to_json(vb: &VectorialBundle) -> Value {
    let cover = vb.cover();
    let patches: Vec<Value> = vb
        .locals()
        .iter()
        .map(|l| {
            let fibers: Map<String, Value> = l
                .fibers
                .iter()
                .map(|(x, f)| {
                    let v = json!({ "dims": [f.space.dim_even, f.space.dim_odd], "h": matrix_to_value(&f.h) });
                    (simplex_key(cover.simplex(*x)), v)
                })
                .collect();
            json!({ "patch": l.patch, "fibers": fibers })
        })
        .collect();
    let transitions: Vec<Value> = vb
        .transitions()
        .map(|t| json!({ "target": t.target, "source": t.source, "maps": keyed_to_value(cover, &t.maps) }))
        .collect();
    let twist = vb
        .twist()
        .map_or(Value::Null, |c| u1_to_json(cover.complex(), c));
    json!({
        "complex": complex_to_json(cover.complex()),
        "patches": patches,
        "transitions": transitions,
        "twist": twist,
    })
}

pub fn bundle_from_value(v: &Value) -> Result<VectorialBundle> {
    let cover = Arc::new(StarCover::new(complex_from_value(field(v, "complex")?)?));
    let list = field(v, "patches")?
        .as_array()
        .ok_or_else(|| bad("`patches` must be an array"))?;
    let mut locals = Vec::with_capacity(list.len());
    for p in list {
        let patch = as_usize(field(p, "patch")?, "patch")?;
        let mut fibers = BTreeMap::new();
        for (key, f) in as_object(field(p, "fibers")?, "fibers")? {
            let x = sample_from_key(&cover, key)?;
            let dims = field(f, "dims")?
                .as_array()
                .filter(|d| d.len() == 2)
                .ok_or_else(|| bad("`dims` must be [even, odd]"))?;
            let space = GradedSpace::new(as_usize(&dims[0], "dims")?, as_usize(&dims[1], "dims")?);
            let h = matrix_from_value(field(f, "h")?, space.dim(), space.dim())?;
            fibers.insert(x, Fiber { space, h });
        }
        locals.push(LocalGradedBundle { patch, fibers });
    }
    locals.sort_by_key(|l| l.patch);
    let dim = |a: usize, x: SampleId| -> Result<usize> {
        locals
            .get(a)
            .and_then(|l| l.fibers.get(&x))
            .map(Fiber::dim)
            .ok_or_else(|| {
                bad(format!(
                    "patch {a} has no fiber at {}",
                    simplex_key(cover.simplex(x))
                ))
            })
    };
    let tlist = field(v, "transitions")?
        .as_array()
        .ok_or_else(|| bad("`transitions` must be an array"))?;
    let mut transitions = Vec::with_capacity(tlist.len());
    for t in tlist {
        let target = as_usize(field(t, "target")?, "target")?;
        let source = as_usize(field(t, "source")?, "source")?;
        let mut maps = BTreeMap::new();
        for (key, m) in as_object(field(t, "maps")?, "maps")? {
            let x = sample_from_key(&cover, key)?;
            maps.insert(x, matrix_from_value(m, dim(target, x)?, dim(source, x)?)?);
        }
        transitions.push(TransitionData {
            target,
            source,
            maps,
        });
    }
    let twist = match v.get("twist") {
        None | Some(Value::Null) => None,
        Some(t) => Some(u1_from_value(cover.complex(), t)?),
    };
    VectorialBundle::new(cover, locals, transitions, twist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::turn;

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(number(f64::INFINITY), json!("inf"));
    }

    #[test]
    fn complex_round_trip() {
        let k = SimplicialComplex::simplex_boundary(3);
        let back = complex_from_json(&complex_to_json(&k).to_string()).unwrap();
        assert_eq!(back, k);
        assert!(complex_from_json("{\"vertices\": 2}").is_err());
        assert!(complex_from_json("{\"vertices\": 2, \"maximal_simplices\": [[0, 5]]}").is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let m = ComplexMatrix::from_row_slice(
            2,
            3,
            &[
                c(1.0, 0.5),
                c(0.0, -1.0),
                c(2.0, 0.0),
                c(0.1, 0.2),
                c(3.0, 4.0),
                c(-1.0, 0.0),
            ],
        );
        assert_eq!(matrix_from_value(&matrix_to_value(&m), 2, 3).unwrap(), m);
        assert!(matrix_from_value(&matrix_to_value(&m), 3, 2).is_err());
    }

    #[test]
    fn cochain_round_trips() {
        let k = SimplicialComplex::simplex_boundary(3);
        let c = U1Cochain::new(2, vec![turn(1, 2), turn(0, 1), turn(2, 3), turn(1, 7)]);
        assert_eq!(u1_from_value(&k, &u1_to_json(&k, &c)).unwrap(), c);
        let sparse = json!({ "degree": 2, "turns": { "0,1,3": "-1/2" } });
        let parsed = u1_from_value(&k, &sparse).unwrap();
        assert_eq!(parsed.turns()[1], turn(1, 2));
        let z = IntegerCochain::from_i64(1, &[1, -2, 3, 0, 5, 6]);
        assert_eq!(
            integer_cochain_from_value(&k, &integer_cochain_to_json(&k, &z)).unwrap(),
            z
        );
        assert!(u1_from_value(&k, &json!({ "degree": 2, "turns": { "0,1": "1/2" } })).is_err());
    }

    #[test]
    fn bundle_round_trip() {
        let cover = Arc::new(StarCover::new(SimplicialComplex::circle(4)));
        let vb = crate::vectorial::OrdinaryBundle::trivial(cover, GradedSpace::new(1, 1)).promote();
        let back = bundle_from_value(&bundle_to_json(&vb)).unwrap();
        assert_eq!(bundle_to_json(&back), bundle_to_json(&vb));
    }
}
