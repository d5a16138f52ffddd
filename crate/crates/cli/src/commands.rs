//! Subcommands. Each validates its whole configuration first, computes, and
//! returns the files to write; nothing touches the disk before that.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use partomo::calculus::{dual_moment, trace_moment, DualMoment, Moment};
use partomo::dynamics::{check_evolution, evolution_rhs, stationary_residual, EvolutionCheck, EvolutionReport, StationaryReport};
use partomo::joint::{
    joint_evolution_rhs, joint_from_conditional, joint_moment_regular, joint_moment_singular, joint_stationary_residual,
    Conjugation, GaussianParamDist, JointTomogram,
};
use partomo::state::{state_from_preset, QuantumState, StateKind};
use partomo::tomography::io::{fmt_f64, read_csv, read_json, write_csv, TomogramEnvelope};
use partomo::tomography::{density_from_tomogram, partial_tomogram, reconstruct_wigner, Kind, Tomogram};
use partomo::wigner::PhaseSpaceField;
use partomo::GridSpec;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{grid, symmetric, DynamicsMode, Format, RawConfig};
use crate::Failure;

/// A file to be written under the output directory.
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
}

fn json_text(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn tomogram_csv(t: &Tomogram) -> String {
    let mut buf = Vec::new();
    write_csv(t, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn envelope_json(env: &TomogramEnvelope) -> String {
    json_text(env)
}

fn wide_x() -> GridSpec {
    symmetric(45.0, 0.1)
}

fn wide_param() -> GridSpec {
    symmetric(6.0, 0.1)
}

fn build_state(cfg: &RawConfig) -> Result<QuantumState, Failure> {
    let preset = cfg.state()?;
    let g = cfg.state_grid()?;
    state_from_preset(preset, &g).map_err(|e| Failure::Config(format!("state: {e}")))
}

fn normalization_lines(t: &Tomogram) -> String {
    let mut s = format!("column normalization ({} = parameter):\n", t.kind.parameter_name());
    for (eta, integral) in t.param_grid.points().into_iter().zip(t.column_integrals()) {
        s.push_str(&format!("  {eta:+.6}  {integral:.12}  dev {:.3e}\n", (integral - 1.0).abs()));
    }
    s
}

pub fn tomogram(cfg: &RawConfig, format: Format) -> Result<Outcome, Failure> {
    let kind = cfg.kind()?;
    let x_grid = grid("grids.x", cfg.grids.x, wide_x())?;
    let param_grid = grid("grids.param", cfg.grids.param, wide_param())?;
    let state = build_state(cfg)?;

    let t = partial_tomogram(&state, kind, &x_grid, &param_grid)?;
    let mut artifacts = Vec::new();
    if format.csv() {
        artifacts.push(Artifact { name: "tomogram.csv".into(), contents: tomogram_csv(&t) });
    }
    if format.json() {
        artifacts.push(Artifact { name: "tomogram.json".into(), contents: envelope_json(&TomogramEnvelope::from_tomogram(&t)) });
    }
    Ok(Outcome { artifacts, summary: normalization_lines(&t) })
}

fn load_tomogram(path: &Path, kind: Option<Kind>) -> Result<Tomogram, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::Config(format!("reconstruct.input {}: {e}", path.display())))?;
    let bad = |e: partomo::Error| Failure::Config(format!("reconstruct.input {}: {e}", path.display()));
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_json(BufReader::new(file)).and_then(TomogramEnvelope::into_tomogram).map_err(bad),
        Some("csv") => {
            let kind = kind.ok_or_else(|| Failure::Config("[representation]: `kind` is required to read a CSV tomogram".into()))?;
            read_csv(kind, BufReader::new(file)).map_err(bad)
        }
        _ => Err(Failure::Config(format!("reconstruct.input {}: expected a .csv or .json file", path.display()))),
    }
}

fn wigner_csv(w: &PhaseSpaceField) -> String {
    let mut s = String::from("q,p,value\n");
    for (i, q) in w.q_grid.points().into_iter().enumerate() {
        for (j, p) in w.p_grid.points().into_iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", fmt_f64(q), fmt_f64(p), fmt_f64(w.values[[i, j]])));
        }
    }
    s
}

pub fn reconstruct(cfg: &RawConfig, format: Format) -> Result<Outcome, Failure> {
    let opts = cfg.reconstruction_options()?;
    let kind = cfg.representation.as_ref().map(|r| r.kind);
    let oracle = match &cfg.state {
        Some(p) => Some(state_from_preset(p, &opts.q_grid).map_err(|e| Failure::Config(format!("state: {e}")))?),
        None => None,
    };
    let t = match &cfg.reconstruct.input {
        Some(path) => load_tomogram(path, kind)?,
        None => {
            let kind = cfg.kind()?;
            let x_grid = grid("grids.x", cfg.grids.x, wide_x())?;
            let param_grid = grid("grids.param", cfg.grids.param, wide_param())?;
            let s = oracle.as_ref().ok_or_else(|| Failure::Config("[state] or reconstruct.input is required".into()))?;
            partial_tomogram(s, kind, &x_grid, &param_grid)?
        }
    };

    let w = reconstruct_wigner(&t, &opts)?;
    let rho = density_from_tomogram(&t, &opts)?;
    let max_abs = w.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut report = json!({
        "kind": t.kind,
        "wigner_integral": w.integral(),
        "wigner_max_abs": max_abs,
        "trace": rho.trace(),
        "purity": rho.purity(),
    });
    if let Some(s) = &oracle {
        let err = (&rho.rho() - &s.rho()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        report["max_abs_rho_error"] = json!(err);
        if s.kind() == StateKind::Pure {
            report["fidelity"] = json!(rho.fidelity_with(s.psi().expect("pure state")));
        }
        report["oracle_purity"] = json!(s.purity());
    }
    let mut artifacts = Vec::new();
    if format.csv() {
        artifacts.push(Artifact { name: "wigner.csv".into(), contents: wigner_csv(&w) });
    }
    artifacts.push(Artifact { name: "reconstruction.json".into(), contents: json_text(&report) });
    Ok(Outcome { artifacts, summary: json_text(&report) })
}

#[derive(Serialize)]
struct MomentRow {
    moment: &'static str,
    dual: f64,
    oracle: f64,
    abs_diff: f64,
}

#[derive(Serialize)]
struct JointMomentRow {
    moment: &'static str,
    regular: f64,
    singular: f64,
    oracle: f64,
    route_diff: f64,
    max_oracle_diff: f64,
}

fn joint_rows(j: &JointTomogram, state: &QuantumState, names: &[Moment]) -> Result<Vec<JointMomentRow>, Failure> {
    names
        .iter()
        .filter(|m| matches!(m, Moment::Q | Moment::P))
        .map(|&m| {
            let regular = joint_moment_regular(j, m)?;
            let singular = joint_moment_singular(j, DualMoment { which: m, kind: j.kind() })?;
            let oracle = trace_moment(state, m);
            Ok(JointMomentRow {
                moment: m.label(),
                regular,
                singular,
                oracle,
                route_diff: (regular - singular).abs(),
                max_oracle_diff: (regular - oracle).abs().max((singular - oracle).abs()),
            })
        })
        .collect()
}

fn joint_for(cfg: &RawConfig, state: &QuantumState, d: &GaussianParamDist) -> Result<JointTomogram, Failure> {
    let x_grid = grid("grids.x", cfg.grids.x, wide_x())?;
    let param_grid = cfg.param_grid(symmetric(8.0, 0.05), Some(d), 0.05)?;
    d.check_grid(&param_grid).map_err(|e| Failure::Config(format!("grids.param: {e}")))?;
    let t = partial_tomogram(state, d.kind, &x_grid, &param_grid)?;
    Ok(joint_from_conditional(&t, d)?)
}

fn moment_csv(rows: &[MomentRow]) -> String {
    let mut s = String::from("moment,dual,oracle,abs_diff\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.moment, fmt_f64(r.dual), fmt_f64(r.oracle), fmt_f64(r.abs_diff)));
    }
    s
}

pub fn moments(cfg: &RawConfig, format: Format) -> Result<Outcome, Failure> {
    let names = cfg.moment_names()?;
    let kind = cfg.kind()?;
    let dist = cfg.distribution(kind)?;
    let x_grid = grid("grids.x", cfg.grids.x, symmetric(25.0, 0.05))?;
    let state = build_state(cfg)?;

    let src = partomo::tomography::StateColumns::new(&state, kind, x_grid);
    let rows: Vec<MomentRow> = names
        .iter()
        .map(|&m| {
            let dual = dual_moment(&src, m)?;
            let oracle = trace_moment(&state, m);
            Ok(MomentRow { moment: m.label(), dual, oracle, abs_diff: (dual - oracle).abs() })
        })
        .collect::<Result<_, Failure>>()?;
    let mut report = json!({ "kind": kind, "moments": rows });
    if let Some(d) = &dist {
        let j = joint_for(cfg, &state, d)?;
        report["distribution"] = json!(d);
        report["joint"] = json!(joint_rows(&j, &state, &names)?);
    }
    let mut artifacts = vec![Artifact { name: "moments.json".into(), contents: json_text(&report) }];
    if format.csv() {
        artifacts.push(Artifact { name: "moments.csv".into(), contents: moment_csv(&rows) });
    }
    Ok(Outcome { artifacts, summary: json_text(&report) })
}

#[derive(Serialize)]
struct StationaryEntry {
    #[serde(flatten)]
    report: StationaryReport,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct JointDynamics {
    distribution: GaussianParamDist,
    conjugation: Conjugation,
    /// Interior max-abs of `RHS_joint - P RHS_conditional` at `t = 0`.
    rhs_factorization_error: f64,
    stationary: Vec<StationaryEntry>,
}

pub fn dynamics(cfg: &RawConfig, format: Format) -> Result<Outcome, Failure> {
    let h = cfg.hamiltonian()?;
    let kind = cfg.kind()?;
    let dist = cfg.distribution(kind)?;
    cfg.check_dynamics()?;
    let dy = &cfg.dynamics;
    let x_fallback = if dist.is_some() { symmetric(40.0, 0.05) } else { symmetric(30.0, 0.05) };
    let x_grid = grid("grids.x", cfg.grids.x, x_fallback)?;
    let param_grid = cfg.param_grid(symmetric(1.5, 0.05), dist.as_ref(), 0.05)?;
    if let Some(d) = &dist {
        d.check_grid(&param_grid).map_err(|e| Failure::Config(format!("grids.param: {e}")))?;
    }
    let state_grid = cfg.state_grid()?;
    let run_evolution = dy.mode != DynamicsMode::Stationary;
    let run_stationary = dy.mode != DynamicsMode::Evolution;
    let state0 = if run_evolution || dy.stationary.is_empty() { Some(build_state(cfg)?) } else { None };
    let cases: Vec<(QuantumState, f64)> = if !run_stationary {
        Vec::new()
    } else if dy.stationary.is_empty() {
        let e = dy.energy.ok_or_else(|| Failure::Config("dynamics.energy: required for a stationary check of [state]".into()))?;
        if !e.is_finite() {
            return Err(Failure::Config("dynamics.energy: must be finite".into()));
        }
        vec![(state0.clone().expect("state built above"), e)]
    } else {
        dy.stationary
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if !c.energy.is_finite() {
                    return Err(Failure::Config(format!("dynamics.stationary[{k}].energy: must be finite")));
                }
                let s = state_from_preset(&c.state, &state_grid).map_err(|e| Failure::Config(format!("dynamics.stationary[{k}].state: {e}")))?;
                Ok((s, c.energy))
            })
            .collect::<Result<_, _>>()?
    };

    let mut report = json!({ "kind": kind, "hamiltonian": h });
    let mut evo_csv = None;
    if run_evolution {
        let check = EvolutionCheck { kind, x_grid, param_grid, dt_fd: dy.dt_fd, tolerance: dy.tolerance };
        let r: EvolutionReport = check_evolution(state0.as_ref().expect("state built above"), &h, &dy.times, &check)?;
        evo_csv = Some(r.to_csv());
        report["evolution"] = json!(r);
    }
    let mut stationary = Vec::new();
    for (s, e) in &cases {
        let t = partial_tomogram(s, kind, &x_grid, &param_grid)?;
        for route in dy.route.routes() {
            let r = stationary_residual(&t, &h, *e, route)?;
            let passed = r.passed(dy.stationary_tolerance);
            stationary.push(StationaryEntry { report: r, tolerance: dy.stationary_tolerance, passed });
        }
    }
    if run_stationary {
        report["stationary"] = json!(stationary);
    }
    if let Some(d) = &dist {
        let conjugation = Conjugation::Generic;
        let base = match &state0 {
            Some(s) => s.clone(),
            None => cases[0].0.clone(),
        };
        let t = partial_tomogram(&base, kind, &x_grid, &param_grid)?;
        let j = joint_from_conditional(&t, d)?;
        let joint = joint_evolution_rhs(&j, &h, conjugation)?;
        let cond = evolution_rhs(&t, &h)?;
        let rhs_factorization_error = partomo::dynamics::interior_max_diff(&joint, &j.weighted(&cond));
        let mut jst = Vec::new();
        for (s, e) in &cases {
            let t = partial_tomogram(s, kind, &x_grid, &param_grid)?;
            let r = joint_stationary_residual(&joint_from_conditional(&t, d)?, &h, *e, conjugation)?;
            let passed = r.passed(dy.stationary_tolerance);
            jst.push(StationaryEntry { report: r, tolerance: dy.stationary_tolerance, passed });
        }
        report["joint"] = json!(JointDynamics { distribution: *d, conjugation, rhs_factorization_error, stationary: jst });
    }
    let mut artifacts = vec![Artifact { name: "dynamics.json".into(), contents: json_text(&report) }];
    if format.csv() {
        if let Some(csv) = evo_csv {
            artifacts.push(Artifact { name: "evolution.csv".into(), contents: csv });
        }
        if run_stationary {
            artifacts.push(Artifact { name: "stationary.csv".into(), contents: stationary_csv(&stationary) });
        }
    }
    Ok(Outcome { artifacts, summary: summarize_dynamics(&report) })
}

fn stationary_csv(rows: &[StationaryEntry]) -> String {
    let mut s = String::from("route,energy,residual_real,residual_imag,tolerance,passed\n");
    for r in rows {
        let route = match r.report.route {
            partomo::dynamics::Route::Generic => "generic",
            partomo::dynamics::Route::Expanded => "expanded",
        };
        s.push_str(&format!(
            "{route},{},{},{},{},{}\n",
            fmt_f64(r.report.energy),
            fmt_f64(r.report.residual_real),
            fmt_f64(r.report.residual_imag),
            fmt_f64(r.tolerance),
            r.passed
        ));
    }
    s
}

fn summarize_dynamics(report: &Value) -> String {
    let mut s = String::new();
    if let Some(e) = report.get("evolution") {
        s.push_str(&format!("evolution: passed = {}, errors = {}\n", e["passed"], e["rhs_vs_fd_error"]));
    }
    if let Some(Value::Array(rows)) = report.get("stationary") {
        for r in rows {
            s.push_str(&format!(
                "stationary {} E = {}: real {} imag {} passed = {}\n",
                r["route"], r["energy"], r["residual_real"], r["residual_imag"], r["passed"]
            ));
        }
    }
    if let Some(j) = report.get("joint") {
        s.push_str(&format!("joint: rhs factorization error {}\n", j["rhs_factorization_error"]));
        if let Value::Array(rows) = &j["stationary"] {
            for r in rows {
                s.push_str(&format!("joint stationary E = {}: real {} imag {} passed = {}\n", r["energy"], r["residual_real"], r["residual_imag"], r["passed"]));
            }
        }
    }
    s
}

pub fn joint(cfg: &RawConfig, format: Format) -> Result<Outcome, Failure> {
    let kind = cfg.kind()?;
    let d = cfg.distribution(kind)?.ok_or_else(|| Failure::Config("[distribution]: section is required".into()))?;
    let names = cfg.moment_names()?;
    let state = build_state(cfg)?;
    let j = joint_for(cfg, &state, &d)?;
    let report = json!({
        "kind": kind,
        "distribution": d,
        "total": j.total(),
        "moments": joint_rows(&j, &state, &names)?,
    });
    let mut artifacts = Vec::new();
    if format.csv() {
        artifacts.push(Artifact { name: "joint.csv".into(), contents: tomogram_csv(&j.as_tomogram()) });
    }
    if format.json() {
        artifacts.push(Artifact { name: "joint.json".into(), contents: envelope_json(&j.to_envelope()) });
    }
    artifacts.push(Artifact { name: "joint_report.json".into(), contents: json_text(&report) });
    Ok(Outcome { artifacts, summary: json_text(&report) })
}
