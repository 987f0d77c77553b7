//! The four subcommands.

use std::time::Instant;

use junction_core::dn::GroupSelector;
use junction_core::pipeline::linear_grid;
use junction_core::scattering::SweepResult;
use junction_core::vertex::{beta_from_vector, low_temp_limit, Assignment, FermiWindow, VertexBc};
use junction_core::{Junction, JunctionSpec, Method, PipelineError, SinglePoleModel};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{AssignmentArg, Selection, SweepMethod};
use crate::config::Config;
use crate::report::{complex_matrix, num, real_matrix, vector, RunReport};
use crate::table::{sweep_csv, sweep_svg};
use crate::CliError;

/// Tolerance for recognizing the `(β, 1, 1)` pattern in a fitted direction.
pub const BETA_TOL: f64 = 1e-8;

fn prepare(spec: &JunctionSpec) -> Result<Junction, CliError> {
    Junction::prepare(spec).map_err(CliError::from)
}

fn report(
    command: &'static str,
    spec: &JunctionSpec,
    warnings: Vec<String>,
    result: Value,
) -> RunReport {
    RunReport {
        command,
        config: Config::from_spec(spec),
        warnings,
        result,
        timing_seconds: None,
    }
}

fn labels(j: &Junction, members: &[usize]) -> Value {
    Value::Array(
        members
            .iter()
            .map(|&i| json!(j.data().pairs[i].label()))
            .collect(),
    )
}

pub fn spectrum(spec: &JunctionSpec) -> Result<RunReport, CliError> {
    let j = prepare(spec)?;
    let (lo, hi) = j.band();
    let mut warnings = Vec::new();
    let thresholds: Vec<Value> = spec
        .wires
        .iter()
        .map(|w| json!({"wire": w.index, "open": num(w.threshold(1)), "closed": num(w.threshold(2))}))
        .collect();
    let mut groups = Vec::new();
    for g in j.in_band_groups() {
        let fit = j.fit_resonance(g.group, GroupSelector::Full);
        let (lambda0_f, validity) = match &fit {
            Ok(model) => {
                let r = j.validity_report(model);
                if !r.pass {
                    warnings.push(format!(
                        "λ0 = {}: single-pole dominance ratio {:.3} < 1",
                        g.lambda, r.dominance
                    ));
                }
                (
                    num(model.lambda0_f),
                    json!({
                        "rho0": num(r.rho0),
                        "multiplicity": r.multiplicity,
                        "delta_over_diameter": num(r.delta_over_diameter),
                        "regular_norm": num(r.regular_norm),
                        "dominance": num(r.dominance),
                        "pass": r.pass,
                    }),
                )
            }
            Err(e) => {
                warnings.push(format!("λ0 = {}: resonance fit failed: {e}", g.lambda));
                (Value::Null, Value::Null)
            }
        };
        groups.push(json!({
            "lambda": num(g.lambda),
            "multiplicity": g.members.len(),
            "labels": labels(&j, &g.members),
            "spacing": num(g.spacing),
            "lambda0_f": lambda0_f,
            "validity": validity,
        }));
    }
    if groups.is_empty() {
        warnings.push("no retained eigenvalue lies inside the open band".into());
    }
    let result = json!({
        "band": [num(lo), num(hi)],
        "thresholds": thresholds,
        "retained_eigenpairs": j.data().pairs.len(),
        "eigenvalues": groups,
    });
    Ok(report("spectrum", spec, warnings, result))
}

fn select_model(
    j: &Junction,
    select: &Selection,
) -> Result<(SinglePoleModel, Vec<usize>), CliError> {
    let groups = j.in_band_groups();
    if groups.is_empty() {
        return Err(CliError::Numerical(
            "no eigenvalue of the well lies inside the open band".into(),
        ));
    }
    let g = groups.get(select.group as usize - 1).ok_or_else(|| {
        CliError::Usage(format!(
            "--group {}: only {} in-band group(s)",
            select.group,
            groups.len()
        ))
    })?;
    let selector = match select.member {
        None => GroupSelector::Full,
        Some(m) if (m as usize) <= g.members.len() => GroupSelector::Member(m as usize - 1),
        Some(m) => {
            return Err(CliError::Usage(format!(
                "--member {m}: group has {} member(s)",
                g.members.len()
            )));
        }
    };
    let model = j.fit_resonance(g.group, selector)?;
    Ok((model, g.members.clone()))
}

fn beta_value(model: &SinglePoleModel, warnings: &mut Vec<String>) -> Value {
    if model.rank != 1 || model.e0().len() != 3 {
        return Value::Null;
    }
    match beta_from_vector(&model.e0(), BETA_TOL) {
        Ok(b) => num(b),
        Err(e) => {
            warnings.push(format!("e0 is not of the symmetric (β, 1, 1) form: {e}"));
            Value::Null
        }
    }
}

pub fn resonance(
    spec: &JunctionSpec,
    select: &Selection,
    shift_constant: Option<f64>,
) -> Result<RunReport, CliError> {
    let j = prepare(spec)?;
    let (model, members) = select_model(&j, select)?;
    let mut warnings = Vec::new();
    let r = j.validity_report(&model);
    if !r.pass {
        warnings.push(format!(
            "single-pole dominance ratio {:.3} < 1",
            r.dominance
        ));
    }
    let beta = beta_value(&model, &mut warnings);
    let result = json!({
        "lambda0": num(model.lambda0),
        "group_labels": labels(&j, &members),
        "selected_labels": labels(&j, &model.selected),
        "lambda0_f": num(model.lambda0_f),
        "residual": num(model.residual),
        "linearized": vector(&model.linearized),
        "bare_channel": num(model.bare_channel),
        "shift_constant": shift_constant.map(num),
        "lambda0_shifted": shift_constant.map(|c| num(junction_core::dn::linearized_with_constant(model.lambda0, c))),
        "rank": model.rank,
        "alpha_sq": num(model.alpha * model.alpha),
        "e0": vector(model.e0().as_slice()),
        "p0": real_matrix(&model.projector),
        "residue": real_matrix(&model.residue),
        "beta": beta,
        "validity": {
            "rho0": num(r.rho0),
            "multiplicity": r.multiplicity,
            "delta_over_diameter": num(r.delta_over_diameter),
            "regular_norm": num(r.regular_norm),
            "dominance": num(r.dominance),
            "pass": r.pass,
        },
    });
    Ok(report("resonance", spec, warnings, result))
}

pub struct SweepOutput {
    pub report: RunReport,
    pub csv: String,
    pub svg: Option<String>,
}

pub fn sweep(
    spec: &JunctionSpec,
    range: (f64, f64, u32),
    method: SweepMethod,
    select: &Selection,
    want_svg: bool,
) -> Result<SweepOutput, CliError> {
    let (min, max, steps) = range;
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(CliError::Usage(format!(
            "invalid range --min {min} --max {max}"
        )));
    }
    let j = prepare(spec)?;
    let (method, model) = match method {
        SweepMethod::Exact => (Method::Exact, None),
        SweepMethod::Pole => (Method::SinglePole, Some(select_model(&j, select)?.0)),
    };
    let grid = linear_grid(min, max, steps as usize);
    let rows = grid
        .par_iter()
        .map(|&l| j.sweep_point(l, method, model.as_ref()))
        .collect();
    let result = SweepResult { method, rows };

    let mut warnings = Vec::new();
    let flagged: Vec<Value> = result
        .rows
        .iter()
        .filter_map(|r| {
            r.result
                .as_ref()
                .err()
                .map(|f| json!({"lambda": num(r.lambda), "reason": f.name()}))
        })
        .collect();
    if !flagged.is_empty() {
        warnings.push(format!("{} flagged grid point(s)", flagged.len()));
    }
    let n = spec.wires.len();
    let summary = json!({
        "method": method.name(),
        "rows": result.rows.len(),
        "flagged": flagged,
        "max_unitarity_defect": num(result.max_unitarity_defect()),
        "lambda0_f": model.as_ref().map(|m| num(m.lambda0_f)),
    });
    Ok(SweepOutput {
        report: report("sweep", spec, warnings, summary),
        csv: sweep_csv(&result, n),
        svg: want_svg.then(|| sweep_svg(&result, n)),
    })
}

pub fn bc(
    spec: &JunctionSpec,
    select: &Selection,
    lambda_f: Option<f64>,
    halfwidth: f64,
    tol: f64,
    assignment: AssignmentArg,
) -> Result<RunReport, CliError> {
    let j = prepare(spec)?;
    let (model, _) = select_model(&j, select)?;
    let centre = lambda_f.unwrap_or(model.lambda0_f);
    let window = FermiWindow::new(centre, halfwidth).map_err(|e| CliError::Usage(e.to_string()))?;
    let assignment = match assignment {
        AssignmentArg::ResonanceLimit => Assignment::ResonanceLimit,
        AssignmentArg::WeightedContinuity => Assignment::WeightedContinuity,
    };
    let limit = low_temp_limit(&model, j.basis(), window, tol, assignment)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let s = j.s_approx(&model, centre)?;
    let vertex = VertexBc::from_smatrix(&s);
    let mut warnings = Vec::new();
    if !limit.valid {
        warnings.push(format!(
            "max |Θ + 1| = {:.6e} exceeds {tol:e}; keep the energy-dependent condition",
            limit.max_deviation
        ));
    }
    let beta = beta_value(&model, &mut warnings);
    let (lo, hi) = window.bounds();
    let projectors = if limit.valid {
        json!({"psi": real_matrix(&limit.bc.psi), "derivative": real_matrix(&limit.bc.derivative)})
    } else {
        Value::Null
    };
    let result = json!({
        "lambda0_f": num(model.lambda0_f),
        "lambda_f": num(centre),
        "momenta": vector(&s.momenta),
        "a": complex_matrix(&vertex.a),
        "b": complex_matrix(&vertex.b),
        "window": [num(lo), num(hi)],
        "tol": num(tol),
        "valid": limit.valid,
        "max_deviation": num(limit.max_deviation),
        "margin": num(tol - limit.max_deviation),
        "assignment": match assignment { Assignment::ResonanceLimit => "resonance-limit", Assignment::WeightedContinuity => "weighted-continuity" },
        "projectors": projectors,
        "e0": vector(model.e0().as_slice()),
        "p0": real_matrix(&model.projector),
        "beta": beta,
    });
    Ok(report("bc", spec, warnings, result))
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(
    threads: Option<u16>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn timed<T>(
    timing: bool,
    f: impl FnOnce() -> Result<T, CliError>,
) -> Result<(T, Option<f64>), CliError> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, timing.then(|| start.elapsed().as_secs_f64())))
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Invalid(v) => {
                CliError::Invalid(v.iter().map(|x| x.to_string()).collect())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}
