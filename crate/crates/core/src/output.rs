//! Result files: per-slot CSV series and JSON reports.
//!
//! Everything written here is a pure function of its inputs except the
//! `timing` block of `summary.json`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineResult, Scheme};
use crate::config::RunConfig;
use crate::error::{PlanError, Result};
use crate::expected_se::SeModel;
use crate::model::{elevation_angle, los_probability, DesignVars, EnvParams, Scenario};
use crate::optimizer::IterationTrace;
use crate::validation::{OverestimationPoint, SweepResult};

/// Formats `v` with at most 9 significant digits, in fixed notation for
/// moderate magnitudes and scientific notation otherwise.
pub fn fmt9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        return sci;
    }
    let fixed = format!("{:.*}", (8 - exp).max(0) as usize, v);
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        fixed
    }
}

fn join(fields: impl IntoIterator<Item = String>) -> String {
    fields.into_iter().collect::<Vec<_>>().join(",")
}

/// One row per waypoint (`N + 1` rows); row `m > 0` carries slot `m - 1`.
pub fn trajectory_csv(plan: &DesignVars, scenario: &Scenario, model: &SeModel) -> Result<String> {
    plan.check_dims(scenario.num_gns(), scenario.n_slots)?;
    let k_count = scenario.num_gns();
    let mut out = String::from("slot,x,y,z,delta_s,scheduled_gn");
    for prefix in ["elevation_deg", "p_los", "se_lb"] {
        for k in 0..k_count {
            write!(out, ",{prefix}_{k}").expect("string write");
        }
    }
    out.push('\n');
    for (m, q) in plan.trajectory.iter().enumerate() {
        let (delta, gn) = match m.checked_sub(1) {
            Some(n) => (fmt9(plan.slots[n]), plan.scheduled_gn(n).map_or(String::new(), |k| k.to_string())),
            None => (String::new(), String::new()),
        };
        let mut row = vec![m.to_string(), fmt9(q.x), fmt9(q.y), fmt9(q.z), delta, gn];
        let mut theta = Vec::with_capacity(k_count);
        let mut p = Vec::with_capacity(k_count);
        let mut se = Vec::with_capacity(k_count);
        for w in &scenario.gns {
            let t = elevation_angle(q, w)?;
            theta.push(fmt9(t));
            p.push(fmt9(los_probability(t, &model.env)));
            se.push(fmt9(model.breakdown(q, w)?.se_total));
        }
        row.extend(theta);
        row.extend(p);
        row.extend(se);
        out.push_str(&join(row));
        out.push('\n');
    }
    Ok(out)
}

/// Slot shares, one row per slot and one column per GN.
pub fn schedule_csv(plan: &DesignVars) -> String {
    let mut out = join(std::iter::once("slot".to_string()).chain((0..plan.num_gns()).map(|k| format!("gn_{k}"))));
    out.push('\n');
    for n in 0..plan.num_slots() {
        out.push_str(&join(std::iter::once(n.to_string()).chain(plan.schedule.iter().map(|row| fmt9(row[n])))));
        out.push('\n');
    }
    out
}

pub fn convergence_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("iteration,completion_time_s,objective,slack,eta\n");
    for r in &trace.records {
        out.push_str(&join([
            r.iteration.to_string(),
            fmt9(r.completion_time),
            fmt9(r.objective),
            fmt9(r.slack),
            fmt9(r.eta),
        ]));
        out.push('\n');
    }
    out
}

pub fn overestimation_csv(points: &[OverestimationPoint]) -> String {
    let mut out = String::from("scheme,gn,estimate,actual,stderr\n");
    for p in points {
        out.push_str(&join([
            p.scheme.to_string(),
            p.gn.to_string(),
            fmt9(p.estimate),
            fmt9(p.actual),
            fmt9(p.stderr),
        ]));
        out.push('\n');
    }
    out
}

pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::from("param,scheme,value,completion_time_s,feasible,error\n");
    for r in &sweep.records {
        out.push_str(&join([
            sweep.param.name().to_string(),
            r.scheme.to_string(),
            fmt9(r.value),
            r.completion_time.map_or(String::new(), fmt9),
            r.feasible.to_string(),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], " "),
        ]));
        out.push('\n');
    }
    out
}

/// A plan together with the scenario it was flown in, for `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub scheme: Scheme,
    pub scenario: crate::config::ScenarioConfig,
    pub plan: DesignVars,
}

/// Per-scheme line of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    /// Absent when the scheme ended in an error.
    pub completion_time: Option<f64>,
    pub feasible: bool,
    pub converged: bool,
    pub residual_infeasible: bool,
    pub feasible_under_mc: bool,
    pub margin_used: f64,
    pub re_optimization_count: usize,
    pub outer_iterations: usize,
    pub failure: Option<String>,
    pub estimated_rates: Vec<f64>,
    pub mc_mean: Vec<f64>,
    pub mc_stderr: Vec<f64>,
}

impl SchemeSummary {
    /// Record of a scheme that returned an error instead of a plan.
    pub fn failed(scheme: Scheme, error: &PlanError) -> Self {
        SchemeSummary {
            scheme,
            completion_time: None,
            feasible: false,
            converged: false,
            residual_infeasible: false,
            feasible_under_mc: false,
            margin_used: 0.0,
            re_optimization_count: 0,
            outer_iterations: 0,
            failure: Some(error.to_string()),
            estimated_rates: Vec::new(),
            mc_mean: Vec::new(),
            mc_stderr: Vec::new(),
        }
    }
}

impl From<&BaselineResult> for SchemeSummary {
    fn from(r: &BaselineResult) -> Self {
        SchemeSummary {
            scheme: r.scheme,
            completion_time: Some(r.completion_time),
            feasible: r.is_feasible(),
            converged: r.converged,
            residual_infeasible: r.residual_infeasible,
            feasible_under_mc: r.feasible_under_mc,
            margin_used: r.margin_used,
            re_optimization_count: r.re_optimization_count,
            outer_iterations: r.trace.records.len(),
            failure: r.failure.clone(),
            estimated_rates: r.estimated_rates.clone(),
            mc_mean: r.mc.mean.clone(),
            mc_stderr: r.mc.stderr.clone(),
        }
    }
}

/// The only nondeterministic part of the outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub timestamp_unix_s: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schemes: Vec<SchemeSummary>,
    pub seed: u64,
    pub config: RunConfig,
    pub timing: Timing,
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| PlanError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| PlanError::Solver(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| PlanError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| PlanError::Config(format!("{}: {e}", path.display())))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| PlanError::io(dir, e))
}

/// Writes `trajectory.csv`, `schedule.csv`, `convergence.csv`,
/// `mc_report.json` and `plan.json` for one scheme into `dir`.
///
/// `base` is the configured scenario; the files describe the scenario the
/// scheme actually flew. The `se_lb` columns use `lower_bound`.
pub fn write_results(dir: &Path, result: &BaselineResult, base: &Scenario, lower_bound: &SeModel) -> Result<()> {
    create_dir(dir)?;
    let scenario = result.scheme.scenario(base);
    write_file(&dir.join("trajectory.csv"), &trajectory_csv(&result.plan, &scenario, lower_bound)?)?;
    write_file(&dir.join("schedule.csv"), &schedule_csv(&result.plan))?;
    write_file(&dir.join("convergence.csv"), &convergence_csv(&result.trace))?;
    write_json(&dir.join("mc_report.json"), &result.mc)?;
    write_json(
        &dir.join("plan.json"),
        &PlanFile {
            scheme: result.scheme,
            scenario: (&scenario).into(),
            plan: result.plan.clone(),
        },
    )
}

/// `se_lb` model of the trajectory files.
pub fn lower_bound_model(cfg: &RunConfig, env: &EnvParams) -> Result<SeModel> {
    Ok(SeModel::lower_bound(&cfg.quadrature.build(env)?, env))
}
