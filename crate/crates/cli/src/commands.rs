use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use vectk::cech::{dd_cocycle, CechContext, Obstruction, U1Cochain, UnitaryLiftSystem};
use vectk::fredholm::{
    approximate_family, approximate_twisted_family, builtin_scenario, index_of_family,
    kernel_line_transitions, spectral_jumps, FamilyApproximation, ScenarioInput, ScenarioParams,
    TwistedFamilyData,
};
use vectk::io::{self, FamilyFile};
use vectk::simplicial::{simplex_key, ClassCoordinates, SimplicialComplex, StarCover};
use vectk::vectorial::{
    graded_index, support, verify_twisted, verify_vectorial, VectorialBundle, VerifyReport,
};
use vectk::{Error, Result, Tolerances};

use crate::{Command, Global};

/// A finished command: its JSON report, a plain-text summary and whether it
/// succeeded (exit 0) or reported a failed check (exit 1).
struct Outcome {
    report: Value,
    summary: String,
    ok: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoGap { .. } | Error::IncompatibleSection { .. } | Error::VerificationFailed(_) => 1,
        _ => 2,
    }
}

pub fn run(global: &Global, command: &Command) -> u8 {
    let result = global.tolerances().and_then(|tol| dispatch(command, &tol));
    match result {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out.report).expect("reports serialize") + "\n";
            if let Some(path) = &global.report {
                if let Err(e) = fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            if global.json {
                print!("{text}");
            } else {
                println!("{}", out.summary);
            }
            if out.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: &Command, tol: &Tolerances) -> Result<Outcome> {
    match command {
        Command::Cohomology { complex, degree } => cohomology(complex, *degree),
        Command::Dd { cocycle, complex } => dd(cocycle, complex),
        Command::Obstruction {
            cocycle,
            complex,
            rank,
            out,
        } => obstruction(cocycle, complex, *rank, out.as_deref()),
        Command::Approximate {
            family,
            lifts,
            cocycle,
            lambda_max,
            out,
            lipschitz,
        } => approximate(
            family,
            lifts.as_deref(),
            cocycle.as_deref(),
            *lambda_max,
            out,
            *lipschitz,
            tol,
        ),
        Command::Verify { bundle, cocycle } => verify(bundle, cocycle.as_deref(), tol),
        Command::Index { bundle } => index(bundle),
        Command::Scenario { name, out, n, seed } => scenario(name, out, *n, *seed, tol),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    fs::write(path, text)
        .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

fn read_complex(path: &Path) -> Result<SimplicialComplex> {
    io::complex_from_value(&read_json(path)?)
}

fn coordinates_json(c: &ClassCoordinates) -> Value {
    json!({
        "free": c.free.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "torsion": c.torsion.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "orders": c.torsion_orders.iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

fn cohomology(complex: &Path, degree: usize) -> Result<Outcome> {
    let k = read_complex(complex)?;
    let group = CechContext::new(k).group(degree);
    let name = group.describe();
    Ok(Outcome {
        report: json!({
            "degree": degree,
            "group": name,
            "free_rank": group.free_rank,
            "torsion": group.torsion.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
        summary: format!("H^{degree} = {name}"),
        ok: true,
    })
}

fn read_cocycle(cocycle: &Path, k: &SimplicialComplex) -> Result<U1Cochain> {
    io::u1_from_value(k, &read_json(cocycle)?)
}

fn dd(cocycle: &Path, complex: &Path) -> Result<Outcome> {
    let k = read_complex(complex)?;
    let c = read_cocycle(cocycle, &k)?;
    let ctx = CechContext::new(k);
    let class = ctx.dd_class(&c)?;
    let group = ctx.group(c.degree() + 1).describe();
    let order = class.coordinates.order();
    let order_text = order
        .as_ref()
        .map_or("infinite".to_string(), ToString::to_string);
    Ok(Outcome {
        report: json!({
            "degree": c.degree() + 1,
            "group": group,
            "coordinates": coordinates_json(&class.coordinates),
            "zero": class.is_zero(),
            "order": order.map(|o| o.to_string()),
        }),
        summary: format!(
            "class in H^{} = {group}: free {:?}, torsion {:?}, order {order_text}",
            c.degree() + 1,
            class
                .coordinates
                .free
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>(),
            class
                .coordinates
                .torsion
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>(),
        ),
        ok: true,
    })
}

fn obstruction(cocycle: &Path, complex: &Path, rank: u32, out: Option<&Path>) -> Result<Outcome> {
    let k = read_complex(complex)?;
    let c = read_cocycle(cocycle, &k)?;
    let ctx = CechContext::new(k.clone());
    match ctx.rank_obstruction(&c, rank)? {
        Obstruction::Solvable(w) => {
            let residual = w
                .residual
                .as_ref()
                .map(|r| io::rational_cochain_to_json(&k, c.degree(), r));
            let witness =
                json!({ "potential": io::u1_to_json(&k, &w.potential), "residual": residual });
            let mut report = json!({ "rank": rank, "verdict": "solvable" });
            match out {
                Some(path) => {
                    write_json(path, &witness)?;
                    report["witness"] = json!(path.display().to_string());
                }
                None => report["witness"] = witness,
            }
            Ok(Outcome {
                report,
                summary: format!("rank {rank}: solvable"),
                ok: true,
            })
        }
        Obstruction::Obstructed { order } => {
            let order = order.map(|o| o.to_string());
            let text = order.clone().unwrap_or_else(|| "infinite".into());
            Ok(Outcome {
                report: json!({ "rank": rank, "verdict": "obstructed", "order": order }),
                summary: format!("rank {rank}: obstructed (class of order {text})"),
                ok: false,
            })
        }
    }
}

fn verify_json(cover: &StarCover, r: &VerifyReport) -> Value {
    let conditions: Map<String, Value> = r
        .kinds()
        .into_iter()
        .map(|kind| {
            let v = json!({
                "checked": r.count(kind),
                "min_mu_agree": io::number(r.min_mu_agree(kind)),
                "max_defect": io::number(r.max_defect(kind)),
            });
            (kind.name().to_string(), v)
        })
        .collect();
    let failures: Vec<Value> = r
        .failures()
        .map(|c| {
            let samples: Vec<String> = c
                .failing
                .iter()
                .map(|x| simplex_key(cover.simplex(*x)))
                .collect();
            json!({ "kind": c.kind.name(), "patches": c.patches, "samples": samples })
        })
        .collect();
    json!({ "pass": r.pass, "conditions": conditions, "failures": failures })
}

fn verify_summary(r: &VerifyReport) -> String {
    let mut lines = vec![format!(
        "verification: {}",
        if r.pass { "pass" } else { "FAIL" }
    )];
    for kind in r.kinds() {
        let mu = r.min_mu_agree(kind);
        let mu = if mu.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.6e}", mu)
        };
        lines.push(format!(
            "  {:<13} checked {:>5}  min mu_agree {mu}  max defect {:.3e}",
            kind.name(),
            r.count(kind),
            r.max_defect(kind)
        ));
    }
    for c in r.failures() {
        lines.push(format!(
            "  failed: {} on patches {:?}",
            c.kind.name(),
            c.patches
        ));
    }
    lines.join("\n")
}

fn check_bundle(
    vb: &VectorialBundle,
    twist: Option<&U1Cochain>,
    tol: &Tolerances,
) -> Result<VerifyReport> {
    match twist.or(vb.twist()) {
        Some(c) => verify_twisted(vb, c, tol),
        None => verify_vectorial(vb, tol),
    }
}

fn kernel_chern(approx: &FamilyApproximation, tol: &Tolerances) -> Option<Value> {
    let vb = &approx.bundle;
    let lines = vb
        .locals()
        .iter()
        .all(|l| l.fibers.values().all(|f| f.dim() == 1));
    if !lines || vb.cover().complex().dim() != Some(2) {
        return None;
    }
    Some(
        match kernel_line_transitions(approx, tol).and_then(|t| vectk::cech::chern_number(&t)) {
            Ok(n) => json!(n),
            Err(e) => json!({ "error": e.to_string() }),
        },
    )
}

#[allow(clippy::too_many_arguments)]
fn approximate(
    family: &Path,
    lifts: Option<&Path>,
    cocycle: Option<&Path>,
    lambda_max: f64,
    out: &Path,
    lipschitz: Option<f64>,
    tol: &Tolerances,
) -> Result<Outcome> {
    let file = io::family_from_value(&read_json(family)?)?;
    let lifts = lifts.map(read_json).transpose()?;
    let mut report = json!({ "lambda_max": io::number(lambda_max) });
    let read_lifts = |cover: &Arc<StarCover>, v: &Value| -> Result<UnitaryLiftSystem> {
        io::lifts_from_value(cover.clone(), v, tol)
    };
    let (approx, cover) = match (file, lifts) {
        (FamilyFile::Global(f), None) => {
            report["family_index"] = json!(index_of_family(&f));
            if let Some(bound) = lipschitz {
                let jumps: Vec<Value> = spectral_jumps(&f, bound, tol)?
                    .iter()
                    .map(|j| {
                        json!({
                            "from": simplex_key(f.cover().simplex(j.from)),
                            "to": simplex_key(f.cover().simplex(j.to)),
                            "jump": io::number(j.jump),
                        })
                    })
                    .collect();
                report["spectral_jumps"] = json!(jumps);
            }
            (approximate_family(&f, lambda_max, tol)?, f.cover().clone())
        }
        (FamilyFile::Global(f), Some(l)) => {
            report["family_index"] = json!(index_of_family(&f));
            let data = TwistedFamilyData::global(&f, read_lifts(f.cover(), &l)?, tol)?;
            (
                approximate_twisted_family(&data, lambda_max, tol)?,
                f.cover().clone(),
            )
        }
        (FamilyFile::Local { cover, n, locals }, Some(l)) => {
            let data = TwistedFamilyData::new(n, locals, read_lifts(&cover, &l)?, tol)?;
            (approximate_twisted_family(&data, lambda_max, tol)?, cover)
        }
        (FamilyFile::Local { .. }, None) => {
            return Err(Error::Format(
                "a family given by local patches needs --lifts".into(),
            ));
        }
    };
    if let Some(path) = cocycle {
        let expected = read_cocycle(path, cover.complex())?;
        if approx.bundle.twist() != Some(&expected) {
            return Err(Error::TwistMismatch);
        }
    }
    if lipschitz.is_some() && report.get("spectral_jumps").is_none() {
        report["spectral_jumps"] = json!("not available for local families");
    }
    let vb = &approx.bundle;
    write_json(out, &io::bundle_to_json(vb))?;
    let check = check_bundle(vb, None, tol)?;
    let index = graded_index(vb)?;
    let support_size = support(vb, tol.gap, tol)?.len();
    report["bundle"] = json!(out.display().to_string());
    report["cutoffs"] = json!(approx
        .cutoffs
        .iter()
        .map(|&m| io::number(m))
        .collect::<Vec<_>>());
    report["index"] = json!(index);
    report["support_size"] = json!(support_size);
    report["twisted"] = json!(vb.twist().is_some());
    report["verification"] = verify_json(&cover, &check);
    let mut summary = vec![
        format!("wrote {}", out.display()),
        format!(
            "cutoffs per patch: {}",
            approx
                .cutoffs
                .iter()
                .map(|m| format!("{m:.6}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
        format!("index: {index:?}"),
        format!("support: {support_size} samples"),
    ];
    if let Some(c) = kernel_chern(&approx, tol) {
        summary.push(format!("kernel line c1: {c}"));
        report["kernel_chern_number"] = c;
    }
    summary.push(verify_summary(&check));
    Ok(Outcome {
        report,
        summary: summary.join("\n"),
        ok: check.pass,
    })
}

fn verify(bundle: &Path, cocycle: Option<&Path>, tol: &Tolerances) -> Result<Outcome> {
    let vb = io::bundle_from_value(&read_json(bundle)?)?;
    let twist = cocycle
        .map(|p| read_cocycle(p, vb.cover().complex()))
        .transpose()?;
    let check = check_bundle(&vb, twist.as_ref(), tol)?;
    let index = graded_index(&vb)?;
    Ok(Outcome {
        report: json!({
            "index": index,
            "twisted": twist.is_some() || vb.twist().is_some(),
            "verification": verify_json(vb.cover(), &check),
        }),
        summary: format!("index: {index:?}\n{}", verify_summary(&check)),
        ok: check.pass,
    })
}

fn index(bundle: &Path) -> Result<Outcome> {
    let vb = io::bundle_from_value(&read_json(bundle)?)?;
    let index = graded_index(&vb)?;
    let summary = index
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ");
    Ok(Outcome {
        report: json!({ "index": index }),
        summary,
        ok: true,
    })
}

fn scenario(
    name: &str,
    out: &Path,
    n: Option<usize>,
    seed: Option<u64>,
    tol: &Tolerances,
) -> Result<Outcome> {
    let mut params = ScenarioParams::default();
    if let Some(n) = n {
        params.n = n;
    }
    if let Some(seed) = seed {
        params.seed = seed;
    }
    let s = builtin_scenario(name, &params, tol)?;
    fs::create_dir_all(out)
        .map_err(|e| Error::Format(format!("cannot create {}: {e}", out.display())))?;
    let complex = s.cover.complex();
    let mut files = vec![("complex.json", io::complex_to_json(complex))];
    match &s.input {
        ScenarioInput::Family(f) => files.push(("family.json", io::family_to_json(f))),
        ScenarioInput::Twisted(t) => {
            files.push(("family.json", io::twisted_family_to_json(t)));
            files.push(("lifts.json", io::lifts_to_json(t.lifts())));
            files.push((
                "cocycle.json",
                io::u1_to_json(complex, &dd_cocycle(t.lifts(), tol)?),
            ));
        }
    }
    let mut expected = s.expected.clone();
    expected["scenario"] = json!(s.name);
    expected["lambda_max"] = io::number(s.lambda_max);
    files.push(("expected.json", expected));
    for (file, value) in &files {
        write_json(&out.join(file), value)?;
    }
    let names: Vec<&str> = files.iter().map(|(f, _)| *f).collect();
    Ok(Outcome {
        report: json!({ "scenario": s.name, "files": names }),
        summary: format!("wrote {} to {}", names.join(", "), out.display()),
        ok: true,
    })
}
