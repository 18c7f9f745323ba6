use std::path::Path;

use convex_energy::inequality::{self, ScanParams, VerifyOptions};
use convex_energy::rays::{self, RayCase, ToricRay};
use convex_energy::toric::{self, FixtureKind, ToricFixture};
use convex_energy::{AffinePiece, FunctionSpec, InequalityReport, MaxAffine, Polytope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::IgnoredAny;
use serde::{Deserialize, Serialize};

use crate::output::{num, report_fields, Sink, Table, REPORT_HEADER};
use crate::Outcome;

fn outcome(holds: bool) -> Outcome {
    if holds {
        Outcome::Holds
    } else {
        Outcome::Violated
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyInput {
    #[serde(default)]
    polytope: Option<Polytope>,
    function: FunctionSpec,
    /// Present in emitted documents; ignored on input.
    #[serde(default)]
    #[allow(dead_code)]
    report: Option<IgnoredAny>,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    polytope: &'a Polytope,
    function: &'a MaxAffine,
    report: &'a InequalityReport,
}

pub fn verify(input: &Path, tol: Option<f64>, sink: &Sink) -> Result<Outcome, String> {
    let doc: VerifyInput = read_json(input)?;
    let (function, domain) = doc.function.resolve().map_err(|e| format!("function: {e}"))?;
    let polytope = doc
        .polytope
        .or(domain)
        .ok_or("missing field `polytope` (required unless the function names an extremizer)")?;
    let report = inequality::verify(&polytope, &function, VerifyOptions { tol, ..VerifyOptions::default() })
        .map_err(|e| e.to_string())?;
    sink.emit(&Table {
        header: REPORT_HEADER.to_vec(),
        rows: vec![report_fields(&report)],
        json: VerifyOutput { polytope: &polytope, function: &function, report: &report },
    })?;
    Ok(outcome(report.within_bounds()))
}

#[derive(Serialize)]
struct ExtremalRow {
    kind: &'static str,
    n: usize,
    m: Option<u32>,
    ratio: f64,
    bound: f64,
    margin: f64,
}

pub fn extremal(n_max: usize, m_max: u32, sink: &Sink) -> Result<Outcome, String> {
    let mut rows = Vec::new();
    let mut holds = true;
    for n in 1..=n_max {
        let (p, phi) = inequality::extremizer_simplex(n).map_err(|e| e.to_string())?;
        let r = inequality::verify(&p, &phi, VerifyOptions::default()).map_err(|e| e.to_string())?;
        let ratio = r.ratio.value().ok_or("extremizer reported as constant")?;
        let margin = ratio - r.lower;
        holds &= margin.abs() <= r.tol.max(1e-9);
        rows.push(ExtremalRow { kind: "simplex", n, m: None, ratio, bound: r.lower, margin });
        let mut m = 2;
        while m <= m_max {
            let (p, phi) = inequality::extremizer_steep(n, m).map_err(|e| e.to_string())?;
            let r = inequality::verify(&p, &phi, VerifyOptions::default()).map_err(|e| e.to_string())?;
            let ratio = r.ratio.value().ok_or("extremizer reported as constant")?;
            holds &= r.within_bounds();
            rows.push(ExtremalRow { kind: "steep", n, m: Some(m), ratio, bound: r.upper, margin: r.upper - ratio });
            m *= 2;
        }
    }
    sink.emit(&Table {
        header: vec!["kind", "n", "m", "ratio", "bound", "margin"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.kind.to_string(),
                    r.n.to_string(),
                    r.m.map(|m| m.to_string()).unwrap_or_default(),
                    num(r.ratio),
                    num(r.bound),
                    num(r.margin),
                ]
            })
            .collect(),
        json: &rows,
    })?;
    Ok(outcome(holds))
}

#[derive(Serialize)]
struct ScanOutput<'a> {
    seed: u64,
    count: usize,
    dim: usize,
    discarded: usize,
    violations: usize,
    reports: &'a [InequalityReport],
}

pub fn scan(seed: u64, count: usize, dim: usize, tol: Option<f64>, sink: &Sink) -> Result<Outcome, String> {
    if dim == 0 {
        return Err("--dim must be positive".into());
    }
    let mut params = ScanParams::new(seed, count, dim);
    params.verify.tol = tol;
    let result = inequality::scan_random(params).map_err(|e| e.to_string())?;
    let violations = result.violations();
    let mut header = vec!["index"];
    header.extend(REPORT_HEADER);
    sink.emit(&Table {
        header,
        rows: result
            .reports
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = vec![i.to_string()];
                row.extend(report_fields(r));
                row
            })
            .collect(),
        json: ScanOutput { seed, count, dim, discarded: result.discarded, violations, reports: &result.reports },
    })?;
    Ok(outcome(violations == 0))
}

#[derive(Serialize)]
struct ToricRow {
    fixture: &'static str,
    check: String,
    value: f64,
    expected: f64,
    defect: f64,
    limit: f64,
    pass: bool,
}

impl ToricRow {
    fn new(fixture: &'static str, check: impl Into<String>, value: f64, expected: f64, defect: f64, limit: f64) -> Self {
        Self { fixture, check: check.into(), value, expected, defect, limit, pass: defect <= limit }
    }
}

fn fixtures(name: Option<&str>) -> Result<Vec<FixtureKind>, String> {
    match name {
        Some(n) => Ok(vec![n.parse::<FixtureKind>().map_err(|e| e.to_string())?]),
        None => Ok(FixtureKind::ALL.to_vec()),
    }
}

fn toric_rows(kind: FixtureKind, seed: u64) -> Result<Vec<ToricRow>, String> {
    let err = |e: convex_energy::Error| e.to_string();
    let name = kind.name();
    let fix = ToricFixture::new(kind).map_err(err)?;
    let mut rows = Vec::new();
    let v = toric::volume_check(&fix);
    rows.push(ToricRow::new(name, "volume", v.rhs, v.lhs, v.relerr, 1e-12));
    rows.push(ToricRow::new(name, "phi0 vs closed form", 0.0, 0.0, fix.phi0_grid_error(), 1e-2));
    let bg = fix.background();
    let j0 = toric::j_proxy(&fix, &bg).map_err(err)?;
    rows.push(ToricRow::new(name, "j_proxy(background) = psi0(0)", j0, 0.0, j0.abs(), 1e-2));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = fix.dim();
    let mut pots = vec![bg.clone()];
    for _ in 0..3 {
        let u = MaxAffine::new(
            (0..3)
                .map(|_| AffinePiece::new((0..n).map(|_| rng.gen_range(-0.3..0.3)).collect(), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .map_err(err)?;
        pots.push(toric::symplectic_potential(&fix, &fix.perturbed(&u).map_err(err)?).map_err(err)?);
    }
    for c in [-1.0, 0.5] {
        let moved = toric::symplectic_potential(&fix, &fix.psi0().map(|v| v + c).map_err(err)?).map_err(err)?;
        let d = toric::d1(&fix, &bg, &moved).map_err(err)?;
        rows.push(ToricRow::new(name, format!("d1(u, u{c:+})"), d, c.abs(), (d - c.abs()).abs(), 1e-10));
        let i = toric::energy_i(&fix, &moved).map_err(err)?;
        rows.push(ToricRow::new(name, format!("I(u{c:+})"), i, c, (i - c).abs(), 1e-10));
    }
    for a in 0..pots.len() {
        for b in a + 1..pots.len() {
            let d = toric::d1(&fix, &pots[a], &pots[b]).map_err(err)?;
            let roof = toric::d1_via_rooftop(&fix, &pots[a], &pots[b]).map_err(err)?;
            rows.push(ToricRow::new(name, format!("rooftop ({a},{b})"), roof, d, (d - roof).abs(), 1e-10));
        }
    }
    let (a, b, c) = (&pots[1], &pots[2], &pots[3]);
    let direct = toric::d1(&fix, a, c).map_err(err)?;
    let via = toric::d1(&fix, a, b).map_err(err)? + toric::d1(&fix, b, c).map_err(err)?;
    rows.push(ToricRow::new(name, "triangle (1,3) via 2", direct, via, (direct - via).max(0.0), 1e-10));
    Ok(rows)
}

pub fn toric(fixture: Option<&str>, seed: u64, sink: &Sink) -> Result<Outcome, String> {
    let mut rows = Vec::new();
    for kind in fixtures(fixture)? {
        rows.extend(toric_rows(kind, seed)?);
    }
    let holds = rows.iter().all(|r| r.pass);
    sink.emit(&Table {
        header: vec!["fixture", "check", "value", "expected", "defect", "limit", "pass"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.fixture.to_string(),
                    r.check.clone(),
                    num(r.value),
                    num(r.expected),
                    num(r.defect),
                    num(r.limit),
                    r.pass.to_string(),
                ]
            })
            .collect(),
        json: &rows,
    })?;
    Ok(outcome(holds))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RayInput {
    fixture: String,
    #[serde(default)]
    scale: Option<f64>,
    direction: FunctionSpec,
}

#[derive(Serialize)]
struct RayRow {
    label: String,
    fixture: &'static str,
    scale: f64,
    radial_j: f64,
    speed: f64,
    report: InequalityReport,
    j_diagnostics: Vec<(f64, f64)>,
    diagnostics_ok: bool,
    constant_speed: bool,
}

fn ray_row(case: &RayCase) -> Result<RayRow, String> {
    let err = |e: convex_energy::Error| format!("{}: {e}", case.label);
    let fix = ToricFixture::with_scale(case.kind, case.scale).map_err(err)?;
    let ray = ToricRay::new(&fix, case.direction.clone()).map_err(err)?;
    let j = rays::radial_j(&ray).map_err(err)?;
    let s = rays::speed(&ray).map_err(err)?;
    let report = rays::radial_check(&ray).map_err(err)?;
    Ok(RayRow {
        label: case.label.clone(),
        fixture: case.kind.name(),
        scale: case.scale,
        radial_j: j.value,
        speed: s.value,
        report,
        j_diagnostics: j.diagnostics,
        diagnostics_ok: j.within_bound,
        constant_speed: s.constant,
    })
}

pub fn ray(input: Option<&Path>, fixture: Option<&str>, m_max: u32, sink: &Sink) -> Result<Outcome, String> {
    let cases = match input {
        Some(path) => {
            let doc: RayInput = read_json(path)?;
            let kind: FixtureKind = doc.fixture.parse().map_err(|e: convex_energy::Error| e.to_string())?;
            let (direction, _) = doc.direction.resolve().map_err(|e| format!("direction: {e}"))?;
            vec![RayCase { label: path.display().to_string(), kind, scale: doc.scale.unwrap_or(1.0), direction }]
        }
        None => {
            let keep = fixtures(fixture)?;
            rays::standard_rays(m_max)
                .map_err(|e| e.to_string())?
                .into_iter()
                .filter(|c| keep.contains(&c.kind))
                .collect()
        }
    };
    let rows: Vec<RayRow> = cases.iter().map(ray_row).collect::<Result<_, _>>()?;
    let holds = rows.iter().all(|r| r.report.within_bounds() && r.diagnostics_ok && r.constant_speed);
    let mut header = vec!["label", "fixture", "scale", "radial_j", "speed"];
    header.extend(REPORT_HEADER);
    header.extend(["diagnostics_ok", "constant_speed"]);
    sink.emit(&Table {
        header,
        rows: rows
            .iter()
            .map(|r| {
                let mut row = vec![r.label.clone(), r.fixture.to_string(), num(r.scale), num(r.radial_j), num(r.speed)];
                row.extend(report_fields(&r.report));
                row.push(r.diagnostics_ok.to_string());
                row.push(r.constant_speed.to_string());
                row
            })
            .collect(),
        json: &rows,
    })?;
    Ok(outcome(holds))
}
