use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use qms_core::analysis::{self, Property, Verdict};
use qms_core::dynamics::Evolution;
use qms_core::io::{model_to_json, parse_density, parse_projection, parse_vector, serialize_subspace};
use qms_core::models::{standard_fixture, Fixture};
use qms_core::scan::{run_scan, ScanConfig, SUPPORT_TIME};
use qms_core::{dynamics, report, Density, Subspace, ToleranceOverrides};
use serde::Serialize;

use crate::input::{load_model, read, Code, Failure, Outcome};

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        None => {
            emit(&format!("{text}\n"));
            Ok(())
        }
        Some(p) if p == Path::new("-") => {
            emit(&format!("{text}\n"));
            Ok(())
        }
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", p.display()))),
    }
}

pub fn analyze(model: &str, json: Option<&Path>, seed: u64, cli: &ToleranceOverrides) -> Outcome {
    let (m, tol, name) = load_model(model, cli)?;
    let r = report::analyze(&m, &tol, Some(&name), seed);
    for e in &r.errors {
        log::warn!("{} [{}]: {}", e.stage, e.kind, e.message);
    }
    match json {
        Some(path) => {
            write_out(Some(path), &to_json(&r))?;
            if path != Path::new("-") {
                emit(&format!("{}\n", summary_line(&r)));
            }
        }
        None => emit(&human_report(&r)),
    }
    Ok(if r.consistent { Code::Ok } else { Code::Inconsistent })
}

fn verdict_str(v: &Option<Verdict>) -> &'static str {
    match v {
        Some(v) if v.value => "true",
        Some(_) => "false",
        None => "error",
    }
}

fn summary_line(r: &report::AnalysisReport) -> String {
    let v = &r.verdicts;
    format!(
        "irreducible={} primitive={} positivity_improving={} peripheral_trivial={} consistent={}",
        verdict_str(&v.irreducible),
        verdict_str(&v.primitive),
        verdict_str(&v.positivity_improving),
        verdict_str(&v.peripheral_trivial),
        r.consistent
    )
}

fn dim_str(d: Option<usize>) -> String {
    d.map_or_else(|| "error".to_string(), |d| d.to_string())
}

fn human_report(r: &report::AnalysisReport) -> String {
    let mut s = String::new();
    let name = r.model.name.as_deref().unwrap_or("model");
    let _ = writeln!(s, "{name}: n = {}, {} jumps", r.model.dim, r.model.jumps);
    let v = &r.verdicts;
    for (label, verdict) in [
        ("irreducible", &v.irreducible),
        ("primitive", &v.primitive),
        ("positivity improving", &v.positivity_improving),
        ("peripheral trivial", &v.peripheral_trivial),
    ] {
        let _ = writeln!(s, "  {label:<22}{}", verdict_str(verdict));
    }
    let d = &r.dimensions;
    let _ = writeln!(s, "  dim F(T)              {}", dim_str(d.fixed_points));
    let _ = writeln!(s, "  dim N(T)              {}", dim_str(d.decoherence_free));
    let _ = writeln!(s, "  dim M_r(T)            {}", dim_str(d.reversible));
    let _ = writeln!(s, "  dim ker L_*           {}", dim_str(d.invariant_kernel));
    if let Some(inv) = &r.invariant_density {
        let _ = writeln!(s, "  invariant density     min eigenvalue {:.3e}", inv.min_eigenvalue);
    }
    if let Some(gap) = r.spectrum.as_ref().and_then(|sp| sp.gap) {
        let _ = writeln!(s, "  spectral gap          {gap:.6e}");
    }
    let _ = writeln!(s, "  consistent            {}", r.consistent);
    for e in &r.errors {
        let _ = writeln!(s, "  error in {}: {}", e.stage, e.message);
    }
    s
}

pub fn check(
    model: &str,
    property: &str,
    projection: Option<&Path>,
    psi: Option<&Path>,
    json: bool,
    seed: u64,
    cli: &ToleranceOverrides,
) -> Outcome {
    let property: Property = property.parse()?;
    if psi.is_some() && property != Property::PositivityImproving {
        return Err(Failure::invalid("--psi applies only to positivity-improving"));
    }
    if projection.is_some() && property != Property::Subharmonic {
        return Err(Failure::invalid("--p applies only to subharmonic"));
    }
    let (m, tol, _) = load_model(model, cli)?;
    let verdict = match property {
        Property::Irreducible => analysis::check_irreducibility(&m, &tol)?,
        Property::Primitive => analysis::check_primitivity(&m, &tol)?,
        Property::PeripheralTrivial => analysis::check_peripheral_trivial(&m, &tol)?,
        Property::PositivityImproving => match psi {
            Some(path) => {
                let v = parse_vector(&read(path)?)?;
                let reach = analysis::support_reachable_space(&m, &v, &tol)?;
                SingleVector { dim: reach.dim(), full: reach.is_full() }.verdict()
            }
            None => analysis::check_positivity_improving(&m, &tol, seed)?,
        },
        Property::Subharmonic => {
            let path = projection.ok_or_else(|| Failure::invalid("subharmonic needs --p <projection.json>"))?;
            let p = parse_projection(&read(path)?, &tol)?;
            analysis::is_subharmonic(&m, &p, &tol)?
        }
    };
    if json {
        emit(&format!("{}\n", serde_json::to_string(&verdict).expect("verdict serializes")));
    } else {
        let residuals: Vec<String> = verdict.residuals.iter().map(|(k, v)| format!("{k}={v}")).collect();
        emit(&format!("{} {} {}\n", verdict.property, verdict.value, residuals.join(" ")));
    }
    Ok(if verdict.value { Code::Ok } else { Code::False })
}

/// Positivity improvement restricted to one vector: `S(ψ) = h`.
struct SingleVector {
    dim: usize,
    full: bool,
}

impl SingleVector {
    fn verdict(&self) -> Verdict {
        let mut residuals = std::collections::BTreeMap::new();
        residuals.insert("support_dimension".to_string(), self.dim as f64);
        Verdict {
            property: Property::PositivityImproving,
            value: self.full,
            criterion: "S(ψ) = h for the given ψ".to_string(),
            witness: None,
            residuals,
        }
    }
}

#[derive(Serialize)]
struct SteadyOutput {
    #[serde(serialize_with = "qms_core::io::serialize_density")]
    density: Density,
    method: analysis::ExtractionMethod,
    stationarity: f64,
    min_eigenvalue: f64,
    faithful: bool,
    kernel_dim: usize,
    tolerances: qms_core::Tolerances,
}

pub fn steady(model: &str, cli: &ToleranceOverrides) -> Outcome {
    let (m, tol, _) = load_model(model, cli)?;
    let inv = analysis::invariant_densities(&m, &tol)?;
    let out = SteadyOutput {
        min_eigenvalue: inv.density.min_eigenvalue(),
        faithful: inv.density.is_faithful(&tol),
        kernel_dim: inv.kernel.dim(),
        density: inv.density,
        method: inv.method,
        stationarity: inv.stationarity,
        tolerances: tol,
    };
    emit(&format!("{}\n", to_json(&out)));
    Ok(Code::Ok)
}

/// `t0:t1:steps` → `steps + 1` equally spaced times.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::invalid(format!("grid '{spec}' is not of the form t0:t1:steps"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [t0, t1, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let t0: f64 = t0.trim().parse().map_err(|_| bad())?;
    let t1: f64 = t1.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if !(t0.is_finite() && t1.is_finite()) || t0 < 0.0 || t1 < t0 || steps == 0 {
        return Err(Failure::invalid(format!(
            "grid '{spec}' needs 0 ≤ t0 ≤ t1 and at least one step"
        )));
    }
    Ok((0..=steps).map(|i| t0 + (t1 - t0) * i as f64 / steps as f64).collect())
}

pub fn evolve(model: &str, state: &Path, grid: &str, csv: Option<&Path>, cli: &ToleranceOverrides) -> Outcome {
    let (m, tol, _) = load_model(model, cli)?;
    let eta = parse_density(&read(state)?, &tol)?;
    if eta.dim() != m.dim() {
        return Err(Failure::invalid(format!(
            "state has dimension {} but the model has dimension {}",
            eta.dim(),
            m.dim()
        )));
    }
    let times = parse_grid(grid)?;
    let profile = dynamics::relaxation_profile(&m, &eta, &times, None, &tol)?;
    let evolution = Evolution::new(&m);
    let n = m.dim();
    let mut out = String::from("t,distance");
    for k in 0..n {
        let _ = write!(out, ",p{k}");
    }
    out.push('\n');
    for (t, d) in profile.times.iter().zip(&profile.distances) {
        let rho = evolution.state(&eta, *t, &tol)?;
        let _ = write!(out, "{t},{d:e}");
        for k in 0..n {
            let _ = write!(out, ",{:e}", rho.matrix()[(k, k)].re);
        }
        out.push('\n');
    }
    match csv {
        Some(path) => fs::write(path, &out)
            .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))?,
        None => emit(&out),
    }
    Ok(Code::Ok)
}

struct SubspaceJson<'a>(&'a Subspace);

impl Serialize for SubspaceJson<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_subspace(self.0, s)
    }
}

#[derive(Serialize)]
struct SupportOutput<'a> {
    t: f64,
    algebraic: SubspaceJson<'a>,
    oracle: SubspaceJson<'a>,
    agree: bool,
}

pub fn support(model: &str, psi: &Path, t: f64, cli: &ToleranceOverrides) -> Outcome {
    let (m, tol, _) = load_model(model, cli)?;
    let v = parse_vector(&read(psi)?)?;
    let algebraic = analysis::support_reachable_space(&m, &v, &tol)?;
    let oracle = dynamics::numerical_support_oracle(&m, &v, t, &tol)?;
    let agree = algebraic.dim() == oracle.dim();
    let out = SupportOutput {
        t,
        algebraic: SubspaceJson(&algebraic),
        oracle: SubspaceJson(&oracle),
        agree,
    };
    emit(&format!("{}\n", to_json(&out)));
    if agree {
        Ok(Code::Ok)
    } else if t <= SUPPORT_TIME {
        log::error!("support mismatch: algebraic {} vs oracle {}", algebraic.dim(), oracle.dim());
        Ok(Code::Inconsistent)
    } else {
        log::warn!(
            "oracle rank {} below algebraic {} at t = {t}; small eigenvalues fall under the cutoff at large t",
            oracle.dim(),
            algebraic.dim()
        );
        Ok(Code::Ok)
    }
}

#[derive(Serialize)]
struct ScanOutput<'a> {
    summary: &'a qms_core::scan::ScanSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    instances: Option<&'a [qms_core::scan::InstanceOutcome]>,
}

pub fn scan(n: usize, k: usize, count: usize, seed: u64, instances: bool, cli: &ToleranceOverrides) -> Outcome {
    if count == 0 || n == 0 || k == 0 {
        return Err(Failure::invalid("scan needs n ≥ 1, k ≥ 1 and count ≥ 1"));
    }
    let tol = qms_core::Tolerances::default().with_overrides(cli)?;
    tol.validate()?;
    let cfg = ScanConfig { n, k, count, seed };
    log::info!("scanning {count} models with n = {n}, k = {k}, seed = {seed}");
    let (summary, outcomes) = run_scan(&cfg, &tol);
    let out = ScanOutput { summary: &summary, instances: instances.then_some(outcomes.as_slice()) };
    emit(&format!("{}\n", to_json(&out)));
    if summary.all_consistent() {
        return Ok(Code::Ok);
    }
    for o in outcomes.iter().filter(|o| !o.ok()) {
        eprintln!(
            "instance {} (seed {}): {}",
            o.index,
            o.seed,
            o.error.as_deref().unwrap_or("verdicts or oracle disagree")
        );
    }
    Ok(Code::Inconsistent)
}

pub fn dump_fixture(name: &str) -> Outcome {
    let fixture: Fixture = name.parse()?;
    emit(&format!("{}\n", model_to_json(&standard_fixture(&fixture.to_string())?)));
    Ok(Code::Ok)
}
