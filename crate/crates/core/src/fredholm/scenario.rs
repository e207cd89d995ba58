//! Built-in scenarios used by tests, the acceptance suite and the CLI.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cech::UnitaryLiftSystem;
use crate::error::{Error, Result};
use crate::io::complex_from_json;
use crate::linalg::{c, ComplexMatrix, GradedSpace};
use crate::simplicial::{SampleId, SimplicialComplex, StarCover};
use crate::tolerance::Tolerances;
use crate::vectorial::OrdinaryBundle;

use super::family::{FredholmFamily, TwistedFamilyData};

pub const SCENARIOS: [&str; 4] = ["point-operator", "flow-s1", "bott-s2", "pauli-torsion"];

const RP2XS1: &str = include_str!("../../data/rp2xs1.json");
const MOORE_2: &str = include_str!("../../data/suspended_moore_2.json");
const MOORE_3: &str = include_str!("../../data/suspended_moore_3.json");
const MOORE_4: &str = include_str!("../../data/suspended_moore_4.json");

/// Complexes shipped with the crate: `rp2xs1` (a triangulation of
/// RP^2 x S^1, `H^3 = Z/2`) and `suspended-moore-n` for n = 2, 3, 4 (the
/// suspension of the mod-n Moore space, `H^3 = Z/n`).
pub fn builtin_complex(name: &str) -> Result<SimplicialComplex> {
    let text = match name {
        "rp2xs1" => RP2XS1,
        "suspended-moore-2" => MOORE_2,
        "suspended-moore-3" => MOORE_3,
        "suspended-moore-4" => MOORE_4,
        _ => return Err(Error::UnknownScenario(name.to_string())),
    };
    complex_from_json(text)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioParams {
    /// Vertices of the circle in `flow-s1`.
    pub n: usize,
    pub seed: u64,
    /// Shape `(n0, n1)` of the operator in `point-operator`.
    pub shape: (usize, usize),
    /// Prescribed `(dim Ker A, dim Ker A*)` in `point-operator`.
    pub kernel_dims: (usize, usize),
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            n: 12,
            seed: 7,
            shape: (3, 3),
            kernel_dims: (1, 1),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ScenarioInput {
    Family(FredholmFamily),
    Twisted(TwistedFamilyData),
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub cover: Arc<StarCover>,
    pub input: ScenarioInput,
    pub lambda_max: f64,
    /// The line bundle the `bott-s2` family is the kernel bundle of.
    pub line_bundle: Option<OrdinaryBundle>,
    pub expected: serde_json::Value,
}

pub fn builtin_scenario(name: &str, params: &ScenarioParams, tol: &Tolerances) -> Result<Scenario> {
    match name {
        "point-operator" => point_operator(params),
        "flow-s1" => flow_s1(params),
        "bott-s2" => bott_s2(tol),
        "pauli-torsion" => pauli_torsion(tol),
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(n, n, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    m.qr().q()
}

/// `A = U diag(s) V*` with singular values in `[1, 2]` and the requested
/// kernel and cokernel dimensions.
pub fn random_operator(
    n0: usize,
    n1: usize,
    k0: usize,
    k1: usize,
    seed: u64,
) -> Result<ComplexMatrix> {
    if k0 > n0 || k1 > n1 || n0 - k0 != n1 - k1 {
        return Err(Error::Format(format!(
            "kernel dimensions ({k0}, {k1}) are impossible for shape ({n0}, {n1})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(n1, &mut rng);
    let v = random_unitary(n0, &mut rng);
    let mut s = ComplexMatrix::zeros(n1, n0);
    for i in 0..n0 - k0 {
        s[(i, i)] = c(rng.gen_range(1.0..2.0), 0.0);
    }
    Ok(u * s * v.adjoint())
}

fn point_operator(p: &ScenarioParams) -> Result<Scenario> {
    let (n0, n1) = p.shape;
    let (k0, k1) = p.kernel_dims;
    let a = random_operator(n0, n1, k0, k1, p.seed)?;
    let cover = Arc::new(StarCover::new(SimplicialComplex::build(&[vec![0]])));
    Ok(Scenario {
        name: "point-operator".into(),
        input: ScenarioInput::Family(FredholmFamily::constant(cover.clone(), &a)),
        cover,
        lambda_max: 0.5,
        line_bundle: None,
        expected: json!({
            "index": n0 as i64 - n1 as i64,
            "graded_dims": [k0, k1],
            "h_zero": true,
            "lambda_max_alt": 5.0,
        }),
    })
}

/// Angle of the sample point of a simplex of the `n`-gon.
fn circle_angle(s: &[usize], n: usize) -> f64 {
    let t = match s {
        [a] => *a as f64,
        [0, b] if *b == n - 1 && n > 2 => n as f64 - 0.5,
        [a, _] => *a as f64 + 0.5,
        _ => unreachable!("the circle has no simplices of dimension above one"),
    };
    TAU * t / n as f64
}

/// `A_t = [[1 - exp(i t)]]` over the `n`-gon, vanishing at vertex 0.
fn flow_s1(p: &ScenarioParams) -> Result<Scenario> {
    if p.n < 3 {
        return Err(Error::Format("flow-s1 needs at least 3 vertices".into()));
    }
    let cover = Arc::new(StarCover::new(SimplicialComplex::circle(p.n)));
    let matrices = cover
        .samples()
        .map(|x| {
            let t = circle_angle(cover.simplex(x), p.n);
            (
                x,
                ComplexMatrix::from_element(1, 1, c(1.0, 0.0) - Complex64::from_polar(1.0, t)),
            )
        })
        .collect();
    let family = FredholmFamily::new(cover.clone(), 1, 1, matrices)?;
    Ok(Scenario {
        name: "flow-s1".into(),
        cover,
        input: ScenarioInput::Family(family),
        lambda_max: 1.5,
        line_bundle: None,
        expected: json!({ "index": 0, "support": [[0]], "lambda_max_alt": 2.5 }),
    })
}

/// Vertices of a regular tetrahedron inscribed in the unit sphere.
pub fn tetrahedron_positions() -> [[f64; 3]; 4] {
    let s = 1.0 / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
}

/// Radially projected barycenter of the simplex of a sample.
pub fn sphere_point(cover: &StarCover, x: SampleId) -> [f64; 3] {
    let pos = tetrahedron_positions();
    let mut p = [0.0; 3];
    for &v in cover.simplex(x) {
        for k in 0..3 {
            p[k] += pos[v][k];
        }
    }
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    p.map(|v| v / norm)
}

/// Unit vector spanning the `+1` eigenspace of `x . sigma`.
pub fn bott_state(x: [f64; 3]) -> [Complex64; 2] {
    let a = [c(1.0 + x[2], 0.0), c(x[0], x[1])];
    let b = [c(x[0], -x[1]), c(1.0 - x[2], 0.0)];
    let norm = |v: &[Complex64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v = if norm(&a) >= norm(&b) { a } else { b };
    let n = norm(&v);
    [v[0] / n, v[1] / n]
}

/// The Bott (tautological) line bundle over the tetrahedron boundary: local
/// sections `s_a(x) = P_x e_a / |P_x e_a|` with `e_a` the state at vertex
/// `a`, transitions `g_ab = s_a^* s_b`.
pub fn bott_line_bundle(cover: Arc<StarCover>, tol: &Tolerances) -> Result<OrdinaryBundle> {
    let pos = tetrahedron_positions();
    let section = |a: usize, x: SampleId| -> [Complex64; 2] {
        let psi = bott_state(sphere_point(&cover, x));
        let e = bott_state(pos[a]);
        let overlap = psi[0].conj() * e[0] + psi[1].conj() * e[1];
        let phase = overlap / overlap.norm();
        [psi[0] * phase, psi[1] * phase]
    };
    let mut transitions = BTreeMap::new();
    for edge in cover.complex().simplices(1) {
        let (a, b) = (edge[0], edge[1]);
        let row = cover
            .overlap_samples(edge)
            .into_iter()
            .map(|x| {
                let (sa, sb) = (section(a, x), section(b, x));
                let g = sa[0].conj() * sb[0] + sa[1].conj() * sb[1];
                (x, ComplexMatrix::from_element(1, 1, g))
            })
            .collect();
        transitions.insert((a, b), row);
    }
    OrdinaryBundle::new(cover.clone(), GradedSpace::new(1, 0), transitions, tol)
}

/// Shape (2, 1) family `A_x = w_x^*` with `w_x` orthogonal to the Bott line,
/// so that `Ker A_x` is the Bott line and `A_x` is onto.
fn bott_s2(tol: &Tolerances) -> Result<Scenario> {
    let cover = Arc::new(StarCover::new(SimplicialComplex::simplex_boundary(3)));
    let matrices = cover
        .samples()
        .map(|x| {
            let psi = bott_state(sphere_point(&cover, x));
            let w = [-psi[1].conj(), psi[0].conj()];
            (
                x,
                ComplexMatrix::from_row_slice(1, 2, &[w[0].conj(), w[1].conj()]),
            )
        })
        .collect();
    let family = FredholmFamily::new(cover.clone(), 2, 1, matrices)?;
    let line = bott_line_bundle(cover.clone(), tol)?;
    Ok(Scenario {
        name: "bott-s2".into(),
        cover,
        input: ScenarioInput::Family(family),
        lambda_max: 0.5,
        line_bundle: Some(line),
        expected: json!({
            "index": 1,
            "lambda_max_alt": 2.0,
            "kernel_chern_number": BOTT_KERNEL_CHERN,
            "orientation": "outward normal of the inscribed tetrahedron",
        }),
    })
}

/// First Chern number of the kernel line of the `bott-s2` family, with the
/// triangles oriented by the outward normal.
pub const BOTT_KERNEL_CHERN: i64 = -1;

/// Edges of the six-vertex RP^2 carrying a nontrivial class in `H^1(RP^2; Z/2)`.
const RP2_CLASS: [(usize, usize); 5] = [(1, 2), (1, 4), (2, 3), (3, 5), (4, 5)];

fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Lifts `X^t Z^x` on RP^2 x S^1 (vertex `v` is the pair `(v / 3, v % 3)`),
/// where `t` is the generator of `H^1(S^1; Z/2)` and `x` that of
/// `H^1(RP^2; Z/2)`. Triple products are `(-1)^(x cup t)`.
pub fn pauli_lifts(cover: Arc<StarCover>, tol: &Tolerances) -> Result<UnitaryLiftSystem> {
    let mut lifts = BTreeMap::new();
    for e in cover.complex().simplices(1) {
        let (v, w) = (e[0], e[1]);
        let (a, b) = ((v / 3).min(w / 3), (v / 3).max(w / 3));
        let (s, t) = ((v % 3).min(w % 3), (v % 3).max(w % 3));
        let mut u = ComplexMatrix::identity(2, 2);
        if (s, t) == (0, 2) {
            u = pauli_x();
        }
        if RP2_CLASS.contains(&(a, b)) {
            u *= pauli_z();
        }
        lifts.insert((v, w), u);
    }
    UnitaryLiftSystem::new(cover, 2, lifts, tol)
}

/// Twisted family `A_p(x) = f(x) I` with `f` the fraction of the sample's
/// vertices lying over circle vertex 0, minus one half. Its zeros reach into
/// the triple overlaps where the twist is nontrivial.
fn pauli_torsion(tol: &Tolerances) -> Result<Scenario> {
    let cover = Arc::new(StarCover::new(builtin_complex("rp2xs1")?));
    let lifts = pauli_lifts(cover.clone(), tol)?;
    let value = |x: SampleId| {
        let s = cover.simplex(x);
        s.iter().filter(|&&v| v % 3 == 0).count() as f64 / s.len() as f64 - 0.5
    };
    let locals = (0..cover.n_patches())
        .map(|p| {
            cover
                .patch_samples(p)
                .iter()
                .map(|&x| (x, ComplexMatrix::identity(2, 2) * c(value(x), 0.0)))
                .collect()
        })
        .collect();
    let data = TwistedFamilyData::new(2, locals, lifts, tol)?;
    Ok(Scenario {
        name: "pauli-torsion".into(),
        cover,
        input: ScenarioInput::Twisted(data),
        lambda_max: 0.5,
        line_bundle: None,
        expected: json!({
            "index": 0,
            "h3": "Z/2",
            "dd_torsion": [1],
            "dd_orders": [2],
            "obstruction": { "1": "obstructed", "2": "solvable" },
        }),
    })
}
