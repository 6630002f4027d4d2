//! The proposed scheme and the four comparison schemes: average-channel
//! design with a margin search, a common slot length, a fixed altitude and a
//! frozen hover-and-fly trajectory.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::expected_se::SeModel;
use crate::model::{DesignVars, EnvParams, Scenario};
use crate::optimizer::{
    hover_and_fly, initialize, initialize_at, run_penalty_bcd, IterationTrace, PenaltyConfig, RunOutcome, RunSettings,
};
use crate::sca::{SlotMode, TrajectoryVariant};
use crate::stats::GridSizes;
use crate::validation::{monte_carlo_validate, McConfig, McReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Proposed,
    /// Average-channel design with a rate margin.
    Ac,
    FixedSlot,
    FixedAlt,
    FixedTraj,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Proposed,
        Scheme::Ac,
        Scheme::FixedSlot,
        Scheme::FixedAlt,
        Scheme::FixedTraj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Ac => "ac",
            Scheme::FixedSlot => "fixed-slot",
            Scheme::FixedAlt => "fixed-alt",
            Scheme::FixedTraj => "fixed-traj",
        }
    }

    /// The scenario the scheme actually flies: the altitude-restricted
    /// schemes start and end at `h_min`.
    pub fn scenario(self, base: &Scenario) -> Scenario {
        match self {
            Scheme::FixedAlt | Scheme::FixedTraj => base.with_endpoints_at_h_min(),
            _ => base.clone(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| PlanError::Config(format!("unknown scheme '{s}' (use proposed, ac, fixed-slot, fixed-alt or fixed-traj)")))
    }
}

/// Margin grid of the average-channel scheme (bps/Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarginConfig {
    pub step: f64,
    pub cap: f64,
}

impl Default for MarginConfig {
    fn default() -> Self {
        MarginConfig { step: 1e-4, cap: 1.0 }
    }
}

impl MarginConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.cap >= self.step && self.cap.is_finite()) {
            return Err(PlanError::Config(format!(
                "margin requires 0 < step <= cap (step = {}, cap = {})",
                self.step, self.cap
            )));
        }
        Ok(())
    }
}

/// Settings shared by every scheme.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    pub penalty: PenaltyConfig,
    pub grid: GridSizes,
    pub mc: McConfig,
    pub margin: MarginConfig,
}

/// Outcome of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub scheme: Scheme,
    pub plan: DesignVars,
    /// Sum of the slot lengths (s).
    pub completion_time: f64,
    /// Rate margin added to the target (bps/Hz); zero except for the AC scheme.
    pub margin_used: f64,
    /// Optimizer runs spent on the margin search; one for other schemes.
    pub re_optimization_count: usize,
    pub feasible_under_mc: bool,
    /// Per-GN rates under the SE model the scheme optimized (bps/Hz).
    pub estimated_rates: Vec<f64>,
    pub converged: bool,
    pub residual_infeasible: bool,
    pub failure: Option<String>,
    pub trace: IterationTrace,
    pub mc: McReport,
}

impl BaselineResult {
    /// Converged, slack-free, failure-free and certified by Monte Carlo.
    pub fn is_feasible(&self) -> bool {
        self.converged && !self.residual_infeasible && self.failure.is_none() && self.feasible_under_mc
    }
}

fn lower_bound_model(env: &EnvParams, config: &SchemeConfig) -> Result<SeModel> {
    Ok(SeModel::lower_bound(&config.grid.build(env)?, env))
}

fn settings(config: &SchemeConfig, variant: TrajectoryVariant) -> RunSettings {
    RunSettings {
        penalty: config.penalty,
        variant,
        ..RunSettings::default()
    }
}

fn finish(
    scheme: Scheme,
    scenario: &Scenario,
    model: &SeModel,
    outcome: RunOutcome,
    mc: McReport,
    margin_used: f64,
    runs: usize,
) -> Result<BaselineResult> {
    Ok(BaselineResult {
        scheme,
        completion_time: outcome.completion_time(),
        margin_used,
        re_optimization_count: runs,
        feasible_under_mc: mc.all_feasible(),
        estimated_rates: model.achieved_rates(scenario, &outcome.plan)?,
        converged: outcome.converged,
        residual_infeasible: outcome.residual_infeasible,
        failure: outcome.failure,
        trace: outcome.trace,
        plan: outcome.plan,
        mc,
    })
}

fn certify(scheme: Scheme, scenario: &Scenario, env: &EnvParams, model: &SeModel, outcome: RunOutcome, config: &SchemeConfig) -> Result<BaselineResult> {
    let mc = monte_carlo_validate(&outcome.plan, scenario, env, model, &config.mc)?;
    finish(scheme, scenario, model, outcome, mc, 0.0, 1)
}

/// Penalty BCD on the quadrature lower bound.
pub fn run_proposed(scenario: &Scenario, env: &EnvParams, config: &SchemeConfig) -> Result<BaselineResult> {
    let model = lower_bound_model(env, config)?;
    let (plan, _) = initialize(scenario, &model, config.penalty.eta0)?;
    let outcome = run_penalty_bcd(scenario, &model, plan, &settings(config, TrajectoryVariant::default()))?;
    certify(Scheme::Proposed, scenario, env, &model, outcome, config)
}

/// Average-channel design at `R_min + margin`, certified against `R_min`.
fn ac_attempt(scenario: &Scenario, env: &EnvParams, config: &SchemeConfig, margin: f64) -> Result<(RunOutcome, McReport)> {
    let target = EnvParams {
        r_min: env.r_min + margin,
        ..*env
    };
    let model = SeModel::average_channel(&target);
    let (plan, _) = initialize(scenario, &model, config.penalty.eta0)?;
    let outcome = run_penalty_bcd(scenario, &model, plan, &settings(config, TrajectoryVariant::default()))?;
    let mc = monte_carlo_validate(&outcome.plan, scenario, env, &SeModel::average_channel(env), &config.mc)?;
    Ok((outcome, mc))
}

fn ac_accepts(outcome: &RunOutcome, mc: &McReport) -> bool {
    outcome.failure.is_none() && mc.all_feasible()
}

/// The AC scheme at one fixed margin, with no search.
pub fn run_ac_with_margin(scenario: &Scenario, env: &EnvParams, config: &SchemeConfig, margin: f64) -> Result<BaselineResult> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(PlanError::domain(format!("margin must be finite and non-negative, got {margin}")));
    }
    let (outcome, mc) = ac_attempt(scenario, env, config, margin)?;
    finish(Scheme::Ac, scenario, &SeModel::average_channel(env), outcome, mc, margin, 1)
}

/// AC scheme with the smallest margin on the `step` grid whose design passes
/// Monte Carlo validation. The grid is searched by doubling from one step,
/// then bisecting between the last failing and first passing multiples.
pub fn run_ac_based(scenario: &Scenario, env: &EnvParams, config: &SchemeConfig) -> Result<BaselineResult> {
    let margin = config.margin;
    margin.validate()?;
    let max_units = (margin.cap / margin.step + 1e-9).floor() as u64;
    let mut runs = 1;
    let (outcome, mc) = ac_attempt(scenario, env, config, 0.0)?;
    if ac_accepts(&outcome, &mc) {
        return finish(Scheme::Ac, scenario, &SeModel::average_channel(env), outcome, mc, 0.0, runs);
    }
    let mut lo = 0u64;
    let mut units = 1u64;
    let mut pass = loop {
        let u = units.min(max_units);
        let attempt = ac_attempt(scenario, env, config, u as f64 * margin.step)?;
        runs += 1;
        if ac_accepts(&attempt.0, &attempt.1) {
            break (u, attempt);
        }
        if u == max_units {
            let worst = attempt
                .1
                .mean
                .iter()
                .zip(&attempt.1.stderr)
                .enumerate()
                .filter(|(_, (m, e))| **m < env.r_min - crate::validation::VERDICT_Z * **e)
                .map(|(k, (m, _))| format!("GN {k}: {m:.6}"))
                .collect::<Vec<_>>()
                .join(", ");
            let why = attempt.0.failure.clone().unwrap_or_else(|| format!("Monte Carlo rates below {}: {worst}", env.r_min));
            return Err(PlanError::Infeasible(format!(
                "AC margin reached the cap of {} bps/Hz after {runs} runs without a validated design ({why})",
                margin.cap
            )));
        }
        lo = u;
        units = u.saturating_mul(2);
    };
    while pass.0 - lo > 1 {
        let mid = lo + (pass.0 - lo) / 2;
        let attempt = ac_attempt(scenario, env, config, mid as f64 * margin.step)?;
        runs += 1;
        if ac_accepts(&attempt.0, &attempt.1) {
            pass = (mid, attempt);
        } else {
            lo = mid;
        }
    }
    let (u, (outcome, mc)) = pass;
    finish(Scheme::Ac, scenario, &SeModel::average_channel(env), outcome, mc, u as f64 * margin.step, runs)
}

/// One slot length shared by every slot.
pub fn run_fixed_slot(scenario: &Scenario, env: &EnvParams, config: &SchemeConfig) -> Result<BaselineResult> {
    let model = lower_bound_model(env, config)?;
    let (plan, _) = initialize(scenario, &model, config.penalty.eta0)?;
    let variant = TrajectoryVariant {
        slots: SlotMode::Common,
        ..TrajectoryVariant::default()
    };
    let outcome = run_penalty_bcd(scenario, &model, plan, &settings(config, variant))?;
    certify(Scheme::FixedSlot, scenario, env, &model, outcome, config)
}

/// Every waypoint at `h_min`, including the endpoints.
pub fn run_fixed_altitude(scenario: &Scenario, env: &EnvParams, config: &SchemeConfig) -> Result<BaselineResult> {
    let scenario = Scheme::FixedAlt.scenario(scenario);
    let model = lower_bound_model(env, config)?;
    let (plan, _) = initialize_at(&scenario, &model, config.penalty.eta0, scenario.h_min)?;
    let variant = TrajectoryVariant {
        fixed_altitude: Some(scenario.h_min),
        ..TrajectoryVariant::default()
    };
    let outcome = run_penalty_bcd(&scenario, &model, plan, &settings(config, variant))?;
    certify(Scheme::FixedAlt, &scenario, env, &model, outcome, config)
}

/// Hover-and-fly path at `h_min` with legs flown at full speed; only the
/// schedule and the hover-slot lengths are optimized.
pub fn run_fixed_trajectory(scenario: &Scenario, env: &EnvParams, config: &SchemeConfig) -> Result<BaselineResult> {
    let scenario = Scheme::FixedTraj.scenario(scenario);
    scenario.validate()?;
    let model = lower_bound_model(env, config)?;
    let Some((mut plan, is_travel)) = hover_and_fly(&scenario, scenario.h_min, 1.0)? else {
        return Err(PlanError::Infeasible(format!(
            "the hover-and-fly path needs more than {} slots of {} s",
            scenario.n_slots, scenario.delta_max
        )));
    };
    let pinned: Vec<Option<f64>> = is_travel
        .iter()
        .enumerate()
        .map(|(n, &travel)| {
            travel.then(|| {
                let d = plan.trajectory[n + 1] - plan.trajectory[n];
                (d.norm() / scenario.v_max)
                    .max(d.z.abs() / scenario.v_z)
                    .clamp(scenario.delta_min, scenario.delta_max)
            })
        })
        .collect();
    for (slot, pin) in plan.slots.iter_mut().zip(&pinned) {
        if let Some(d) = pin {
            *slot = *d;
        }
    }
    let variant = TrajectoryVariant {
        frozen_trajectory: true,
        slots: SlotMode::Pinned(pinned),
        ..TrajectoryVariant::default()
    };
    let outcome = run_penalty_bcd(&scenario, &model, plan, &settings(config, variant))?;
    certify(Scheme::FixedTraj, &scenario, env, &model, outcome, config)
}

pub fn run_scheme(scheme: Scheme, scenario: &Scenario, env: &EnvParams, config: &SchemeConfig) -> Result<BaselineResult> {
    match scheme {
        Scheme::Proposed => run_proposed(scenario, env, config),
        Scheme::Ac => run_ac_based(scenario, env, config),
        Scheme::FixedSlot => run_fixed_slot(scenario, env, config),
        Scheme::FixedAlt => run_fixed_altitude(scenario, env, config),
        Scheme::FixedTraj => run_fixed_trajectory(scenario, env, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_design, Point, VALIDATION_TOL};

    fn quick() -> SchemeConfig {
        SchemeConfig {
            grid: GridSizes::uniform(8),
            mc: McConfig {
                n_realizations: 500,
                seed: 2,
            },
            penalty: PenaltyConfig {
                max_outer: 30,
                ..PenaltyConfig::default()
            },
            ..SchemeConfig::default()
        }
    }

    fn hover_over_gn() -> Scenario {
        let q = Point::new(50.0, 50.0, 100.0);
        Scenario {
            gns: vec![Point::new(50.0, 50.0, 0.0)],
            q_start: q,
            q_end: q,
            n_slots: 6,
            ..Scenario::desk()
        }
    }

    #[test]
    fn names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("fixed".parse::<Scheme>().is_err());
    }

    #[test]
    fn zero_target_needs_no_margin() {
        let env = EnvParams {
            r_min: 0.0,
            ..EnvParams::reference()
        };
        let sc = hover_over_gn();
        let r = run_ac_based(&sc, &env, &quick()).unwrap();
        assert_eq!(r.margin_used, 0.0);
        assert_eq!(r.re_optimization_count, 1);
        assert!(r.feasible_under_mc);
    }

    #[test]
    fn fixed_slot_with_zero_target_shrinks_to_delta_min() {
        let env = EnvParams {
            r_min: 0.0,
            ..EnvParams::reference()
        };
        let sc = hover_over_gn();
        let r = run_fixed_slot(&sc, &env, &quick()).unwrap();
        assert!(r.plan.slots.iter().all(|d| *d == r.plan.slots[0]));
        let floor = sc.n_slots as f64 * sc.delta_min;
        assert!((r.completion_time - floor).abs() < 1e-3, "T = {}", r.completion_time);
    }

    #[test]
    fn fixed_altitude_and_trajectory_contracts() {
        let env = EnvParams {
            r_min: 1.0,
            ..EnvParams::reference()
        };
        let sc = Scenario {
            gns: vec![Point::new(100.0, 100.0, 0.0), Point::new(300.0, 100.0, 0.0)],
            q_start: Point::new(0.0, 100.0, 100.0),
            q_end: Point::new(400.0, 100.0, 100.0),
            n_slots: 24,
            delta_max: 4.0,
            ..Scenario::desk()
        };
        let alt = run_fixed_altitude(&sc, &env, &quick()).unwrap();
        let eff = Scheme::FixedAlt.scenario(&sc);
        assert!(alt.plan.trajectory.iter().all(|q| q.z == sc.h_min));
        assert!(validate_design(&eff, &alt.plan, VALIDATION_TOL).unwrap().is_empty());

        let traj = run_fixed_trajectory(&sc, &env, &quick()).unwrap();
        let (frozen, is_travel) = hover_and_fly(&eff, sc.h_min, 1.0).unwrap().unwrap();
        assert_eq!(traj.plan.trajectory, frozen.trajectory);
        for n in 0..sc.n_slots {
            if is_travel[n] {
                let seg = (traj.plan.trajectory[n + 1] - traj.plan.trajectory[n]).norm();
                assert!((seg - sc.v_max * traj.plan.slots[n]).abs() < 1e-9);
            }
        }
        assert!(validate_design(&eff, &traj.plan, VALIDATION_TOL).unwrap().is_empty());
    }

    #[test]
    fn margin_config_is_checked() {
        assert!(MarginConfig { step: 0.0, cap: 1.0 }.validate().is_err());
        assert!(MarginConfig { step: 0.1, cap: 0.01 }.validate().is_err());
    }
}
