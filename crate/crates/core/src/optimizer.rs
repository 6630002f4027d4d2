//! Penalty block-coordinate descent: alternate the scheduling LP and the
//! trajectory subproblem while the penalty weight grows geometrically.

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::expected_se::SeModel;
use crate::model::{schedule_from_assignment, DesignVars, Point, Scenario};
use crate::sca::{
    round_schedule, schedule_slack, solve_scheduling_lp, solve_trajectory_subproblem, BarrierSettings, ScaState,
    TrajectoryVariant,
};

/// Relative slack below which a plan counts as meeting every rate target.
pub const SLACK_TOL: f64 = 1e-6;

/// Penalty schedule and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltyConfig {
    pub eta0: f64,
    pub eta_max: f64,
    /// Growth factor of the penalty weight per outer iteration.
    pub growth: f64,
    /// Stop once the completion time moves less than this (s).
    pub conv_tol: f64,
    pub max_outer: usize,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            eta0: 1.0,
            eta_max: 1e5,
            growth: 1.5,
            conv_tol: 1e-3,
            max_outer: 100,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 > 0.0 && self.eta_max >= self.eta0 && self.growth > 1.0 && self.conv_tol > 0.0) {
            return Err(PlanError::Config(format!(
                "penalty requires eta0 > 0, eta_max >= eta0, growth > 1, conv_tol > 0 (got {self:?})"
            )));
        }
        if self.max_outer == 0 {
            return Err(PlanError::Config("penalty.max_outer must be at least 1".into()));
        }
        Ok(())
    }

    /// Penalty weight of outer iteration `r` (0-based): `min(eta0 growth^r, eta_max)`.
    pub fn eta(&self, r: usize) -> f64 {
        let e = self.eta0 * self.growth.powi(r.min(i32::MAX as usize) as i32);
        e.min(self.eta_max)
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Completion time after the iteration (s).
    pub completion_time: f64,
    /// `T + eta * rho_tilde`.
    pub objective: f64,
    /// Time-scaled slack (bps/Hz s).
    pub slack: f64,
    pub eta: f64,
    /// Per-GN time-averaged rate under the optimizer's SE model (bps/Hz).
    pub rates: Vec<f64>,
    /// Whether SP1 replaced the schedule this iteration.
    pub schedule_changed: bool,
    pub newton_steps: usize,
    pub kkt_residual: f64,
}

/// Per-iteration history of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

/// Result of a penalty BCD run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    /// Last accepted plan, with a binary schedule.
    pub plan: DesignVars,
    pub trace: IterationTrace,
    /// Stopping rule met before the iteration cap.
    pub converged: bool,
    /// Final time-scaled slack (bps/Hz s).
    pub final_slack: f64,
    /// The final plan still needs slack beyond `SLACK_TOL * T`.
    pub residual_infeasible: bool,
    /// Subproblem failure that ended the run early, if any.
    pub failure: Option<String>,
}

impl RunOutcome {
    pub fn completion_time(&self) -> f64 {
        self.plan.completion_time()
    }

    /// Converged with no residual slack and no failure.
    pub fn is_feasible(&self) -> bool {
        self.converged && !self.residual_infeasible && self.failure.is_none()
    }
}

/// Hover altitude of the initial plan.
const HOVER_ALTITUDE: f64 = 100.0;
/// Fraction of the speed limits used on initial travel legs.
const TRAVEL_SPEED_FRACTION: f64 = 0.9;

/// Nearest-neighbour visiting order of the GNs from `from`.
pub fn visit_order(gns: &[Point], from: &Point) -> Vec<usize> {
    let mut left: Vec<usize> = (0..gns.len()).collect();
    let mut order = Vec::with_capacity(gns.len());
    let mut at = Point::new(from.x, from.y, 0.0);
    while !left.is_empty() {
        let (pos, _) = left
            .iter()
            .enumerate()
            .map(|(i, &k)| (i, (gns[k] - at).norm()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        let k = left.remove(pos);
        at = gns[k];
        order.push(k);
    }
    order
}

fn nearest_gn(gns: &[Point], q: &Point) -> usize {
    (0..gns.len())
        .min_by(|&a, &b| (gns[a] - q).norm().total_cmp(&(gns[b] - q).norm()))
        .unwrap_or(0)
}

/// Hover-and-fly path through the GNs with all slots at `delta_max`:
/// returns the plan and, for each slot, whether it is a travel slot.
pub fn hover_and_fly(scenario: &Scenario, hover_altitude: f64, speed_fraction: f64) -> Result<Option<(DesignVars, Vec<bool>)>> {
    let n = scenario.n_slots;
    let k = scenario.num_gns();
    let order = visit_order(&scenario.gns, &scenario.q_start);
    let mut stops: Vec<Point> = vec![scenario.q_start];
    stops.extend(order.iter().map(|&g| Point::new(scenario.gns[g].x, scenario.gns[g].y, hover_altitude)));
    stops.push(scenario.q_end);
    let step = speed_fraction * scenario.delta_max;
    let legs: Vec<usize> = stops
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let m = (d.norm() / (scenario.v_max * step)).max(d.z.abs() / (scenario.v_z * step)).ceil();
            m as usize
        })
        .collect();
    let travel: usize = legs.iter().sum();
    if travel > n {
        return Ok(None);
    }
    let hover = n - travel;
    let per = hover / k;
    let extra = hover % k;
    let mut traj = vec![scenario.q_start];
    let mut assignment = Vec::with_capacity(n);
    let mut is_travel = Vec::with_capacity(n);
    for (j, w) in stops.windows(2).enumerate() {
        let m = legs[j];
        for i in 1..=m {
            let p = w[0] + (w[1] - w[0]) * (i as f64 / m as f64);
            assignment.push(Some(nearest_gn(&scenario.gns, &p)));
            is_travel.push(true);
            traj.push(p);
        }
        if j < k {
            let g = order[j];
            let count = per + usize::from(j < extra);
            for _ in 0..count {
                traj.push(w[1]);
                assignment.push(Some(g));
                is_travel.push(false);
            }
        }
    }
    // Snap the final waypoint exactly onto the endpoint.
    *traj.last_mut().expect("non-empty") = scenario.q_end;
    Ok(Some((
        DesignVars {
            schedule: schedule_from_assignment(k, &assignment),
            trajectory: traj,
            slots: vec![scenario.delta_max; n],
        },
        is_travel,
    )))
}

/// Straight constant-speed path from start to end, slots at `delta_max`,
/// each slot given to the nearest GN.
fn straight_line(scenario: &Scenario) -> DesignVars {
    let n = scenario.n_slots;
    let traj: Vec<Point> = (0..=n)
        .map(|m| scenario.q_start + (scenario.q_end - scenario.q_start) * (m as f64 / n as f64))
        .collect();
    let assignment: Vec<Option<usize>> = (0..n).map(|i| Some(nearest_gn(&scenario.gns, &traj[i + 1]))).collect();
    DesignVars {
        schedule: schedule_from_assignment(scenario.num_gns(), &assignment),
        trajectory: traj,
        slots: vec![scenario.delta_max; n],
    }
}

/// Hover-and-fly initial plan and the SCA state anchored at it.
pub fn initialize(scenario: &Scenario, model: &SeModel, eta: f64) -> Result<(DesignVars, ScaState)> {
    initialize_at(scenario, model, eta, HOVER_ALTITUDE)
}

/// [`initialize`] with the hover altitude given (clamped to the altitude window).
pub fn initialize_at(scenario: &Scenario, model: &SeModel, eta: f64, hover_altitude: f64) -> Result<(DesignVars, ScaState)> {
    scenario.validate()?;
    let d = scenario.q_end - scenario.q_start;
    let reach = scenario.n_slots as f64 * scenario.delta_max;
    if d.norm() > reach * scenario.v_max || d.z.abs() > reach * scenario.v_z {
        return Err(PlanError::Infeasible(format!(
            "q_end is {:.3} m from q_start but at most {:.3} m can be flown in {} slots of {} s",
            d.norm(),
            reach * scenario.v_max,
            scenario.n_slots,
            scenario.delta_max
        )));
    }
    let hover = hover_altitude.clamp(scenario.h_min, scenario.h_max);
    let plan = match hover_and_fly(scenario, hover, TRAVEL_SPEED_FRACTION)? {
        Some((plan, _)) => plan,
        None => straight_line(scenario),
    };
    let (state, _) = ScaState::at_plan(model, scenario, &plan.trajectory, &plan.slots, eta)?;
    Ok((plan, state))
}

/// Everything a penalty BCD run needs besides the scenario and SE model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSettings {
    pub penalty: PenaltyConfig,
    pub variant: TrajectoryVariant,
    pub barrier: BarrierSettings,
}

/// The full penalty BCD loop for the proposed scheme, from the hover-and-fly start.
pub fn run_from_initial_plan(scenario: &Scenario, model: &SeModel, config: &PenaltyConfig) -> Result<RunOutcome> {
    let (plan, _) = initialize(scenario, model, config.eta0)?;
    let settings = RunSettings {
        penalty: *config,
        ..RunSettings::default()
    };
    run_penalty_bcd(scenario, model, plan, &settings)
}

/// Penalty BCD from a given hard-feasible plan.
///
/// Each outer iteration solves the scheduling LP at the current trajectory
/// and adopts its rounded schedule only when that lowers the rate slack, then
/// re-anchors the surrogates and solves the trajectory subproblem.
pub fn run_penalty_bcd(scenario: &Scenario, model: &SeModel, mut plan: DesignVars, settings: &RunSettings) -> Result<RunOutcome> {
    let config = &settings.penalty;
    config.validate()?;
    scenario.validate()?;
    plan.check_dims(scenario.num_gns(), scenario.n_slots)?;
    let r_min = model.env.r_min;
    let mut trace = IterationTrace::default();
    let mut t_old = plan.completion_time();
    let mut converged = false;
    let mut failure = None;
    let mut final_slack = f64::NAN;

    for r in 0..config.max_outer {
        let eta = config.eta(r);
        let rates = model.per_slot_matrix(scenario, &plan.trajectory)?;
        let lp = solve_scheduling_lp(&rates, &plan.slots, r_min, eta)?;
        let candidate = round_schedule(&lp.schedule)?;
        let current_slack = schedule_slack(&plan.schedule, &rates, &plan.slots, r_min)?;
        let candidate_slack = schedule_slack(&candidate, &rates, &plan.slots, r_min)?;
        let changed = candidate_slack < current_slack - 1e-12 && candidate != plan.schedule;
        if changed {
            plan.schedule = candidate;
        }
        let passes = if changed && candidate_slack > lp.slack + 1e-6 { 2 } else { 1 };

        let mut steps = 0;
        let mut last = None;
        for _ in 0..passes {
            let step = ScaState::at_plan(model, scenario, &plan.trajectory, &plan.slots, eta).and_then(|(state, coeffs)| {
                solve_trajectory_subproblem(scenario, model, &plan.schedule, &state, &coeffs, &settings.variant, &settings.barrier)
            });
            match step {
                Ok(sol) => {
                    steps += sol.newton_steps;
                    plan = sol.vars.clone();
                    last = Some(sol);
                }
                Err(e) => {
                    failure = Some(format!("outer iteration {r}: {e}"));
                    break;
                }
            }
        }
        let Some(sol) = last else { break };
        let t = plan.completion_time();
        final_slack = sol.slack;
        trace.records.push(IterationRecord {
            iteration: r,
            completion_time: t,
            objective: sol.objective,
            slack: sol.slack,
            eta,
            rates: model.achieved_rates(scenario, &plan)?,
            schedule_changed: changed,
            newton_steps: steps,
            kkt_residual: sol.kkt_residual,
        });
        if failure.is_some() {
            break;
        }
        if (t - t_old).abs() < config.conv_tol && sol.slack < SLACK_TOL * t {
            converged = true;
            break;
        }
        t_old = t;
    }
    let t = plan.completion_time();
    let residual_infeasible = !(final_slack < SLACK_TOL * t);
    Ok(RunOutcome {
        plan,
        trace,
        converged,
        final_slack,
        residual_infeasible,
        failure,
    })
}
