//! Monte Carlo certification of plans under the true stochastic channel,
//! the estimated-versus-actual rate comparison, and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{run_scheme, BaselineResult, Scheme, SchemeConfig};
use crate::error::{PlanError, Result};
use crate::expected_se::SeModel;
use crate::model::{
    db_to_linear, elevation_from, instantaneous_se, los_probability, sample_channel_at, validate_design, DesignVars,
    EnvParams, Scenario, VALIDATION_TOL,
};
use crate::montecarlo::run_chunked;

/// One-sided 95% normal quantile of the feasibility verdict.
pub const VERDICT_Z: f64 = 1.96;
/// Relative tolerance of the sweep trend checks.
pub const TREND_TOL: f64 = 0.02;

/// Monte Carlo sample size and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub n_realizations: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_realizations: 30_000,
            seed: 1,
        }
    }
}

/// Per-GN Monte Carlo rates of a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    /// Mean time-averaged rate per GN (bps/Hz).
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Rate per GN under the SE model the plan was optimized with.
    pub estimated: Vec<f64>,
    /// `mean >= r_min - 1.96 stderr` per GN.
    pub feasible: Vec<bool>,
    pub r_min: f64,
    pub n_realizations: usize,
    pub seed: u64,
}

impl McReport {
    pub fn all_feasible(&self) -> bool {
        self.feasible.iter().all(|f| *f)
    }
}

/// Draws independent channels for every scheduled slot in each realization
/// and reports the time-averaged rate of every GN.
pub fn monte_carlo_validate(
    plan: &DesignVars,
    scenario: &Scenario,
    env: &EnvParams,
    model: &SeModel,
    mc: &McConfig,
) -> Result<McReport> {
    let report = validate_design(scenario, plan, VALIDATION_TOL)?;
    if !report.is_empty() {
        return Err(PlanError::domain(format!("plan violates hard constraints: {report:?}")));
    }
    if mc.n_realizations < 2 {
        return Err(PlanError::domain("validation needs at least 2 realizations"));
    }
    let k_count = scenario.num_gns();
    let total = plan.completion_time();
    // (gn, weight s delta / T, distance, LoS probability) per scheduled pair.
    let mut links = Vec::new();
    for (k, row) in plan.schedule.iter().enumerate() {
        for (n, &share) in row.iter().enumerate() {
            if share > 0.0 {
                let rel = plan.trajectory[n + 1] - scenario.gns[k];
                let d = rel.norm();
                if !(d > 0.0) {
                    return Err(PlanError::domain(format!("slot {n} ends on top of GN {k}")));
                }
                let p = los_probability(elevation_from(rel.z, d), env);
                links.push((k, share * plan.slots[n] / total, d, p));
            }
        }
    }
    let stats = run_chunked(mc.n_realizations, k_count, mc.seed, |rng, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(k, weight, d, p) in &links {
            let c = sample_channel_at(d, p, env, rng);
            out[k] += weight * instantaneous_se(c.gain, env);
        }
    });
    let estimated = model.achieved_rates(scenario, plan)?;
    let mean: Vec<f64> = stats.iter().map(|s| s.mean).collect();
    let stderr: Vec<f64> = stats.iter().map(|s| s.stderr()).collect();
    let feasible = mean
        .iter()
        .zip(&stderr)
        .map(|(m, e)| *m >= env.r_min - VERDICT_Z * e)
        .collect();
    Ok(McReport {
        mean,
        stderr,
        estimated,
        feasible,
        r_min: env.r_min,
        n_realizations: mc.n_realizations,
        seed: mc.seed,
    })
}

/// Estimated and simulated rate of one GN under one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverestimationPoint {
    pub scheme: Scheme,
    pub gn: usize,
    /// Rate under the scheme's own SE model (bps/Hz).
    pub estimate: f64,
    /// Monte Carlo rate (bps/Hz).
    pub actual: f64,
    pub stderr: f64,
}

impl OverestimationPoint {
    /// Strictly above the diagonal.
    pub fn overestimates(&self) -> bool {
        self.estimate > self.actual
    }

    /// At or below the diagonal within `z` standard errors.
    pub fn conservative(&self, z: f64) -> bool {
        self.estimate <= self.actual + z * self.stderr
    }
}

/// Estimated-versus-actual points for every scheme result and GN.
pub fn overestimation_report(
    results: &[BaselineResult],
    scenario: &Scenario,
    env: &EnvParams,
    mc: &McConfig,
) -> Result<Vec<OverestimationPoint>> {
    let mut out = Vec::new();
    for r in results {
        let actual = if r.mc.n_realizations == mc.n_realizations && r.mc.seed == mc.seed {
            r.mc.clone()
        } else {
            monte_carlo_validate(&r.plan, &r.scheme.scenario(scenario), env, &SeModel::average_channel(env), mc)?
        };
        for (gn, est) in r.estimated_rates.iter().enumerate() {
            out.push(OverestimationPoint {
                scheme: r.scheme,
                gn,
                estimate: *est,
                actual: actual.mean[gn],
                stderr: actual.stderr[gn],
            });
        }
    }
    Ok(out)
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Maximum speed (m/s); the vertical limit follows as half of it.
    VMax,
    /// Rician K-factor (dB).
    KRician,
    /// Rate target (bps/Hz).
    RMin,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::VMax => "v_max",
            SweepParam::KRician => "k_rician",
            SweepParam::RMin => "r_min",
        }
    }

    /// Completion time is expected to fall as the parameter grows, except
    /// for the rate target.
    pub fn expects_decrease(self) -> bool {
        !matches!(self, SweepParam::RMin)
    }

    fn apply(self, value: f64, scenario: &mut Scenario, env: &mut EnvParams) {
        match self {
            SweepParam::VMax => {
                scenario.v_max = value;
                scenario.v_z = value / 2.0;
            }
            SweepParam::KRician => env.k_rician = db_to_linear(value),
            SweepParam::RMin => env.r_min = value,
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v_max" => Ok(SweepParam::VMax),
            "k_rician" => Ok(SweepParam::KRician),
            "r_min" => Ok(SweepParam::RMin),
            _ => Err(PlanError::Config(format!("unknown sweep parameter '{s}' (use v_max, k_rician or r_min)"))),
        }
    }
}

/// One (scheme, value) run of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub value: f64,
    pub completion_time: Option<f64>,
    pub feasible: bool,
    pub error: Option<String>,
}

/// Trend check of one scheme over the swept values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdict {
    pub scheme: Scheme,
    /// Whether consecutive feasible completion times move in the expected
    /// direction within [`TREND_TOL`].
    pub monotone: bool,
    /// Every swept value gave a feasible plan.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub records: Vec<SweepRecord>,
    pub trends: Vec<TrendVerdict>,
}

/// Whether `times` (in sweep order) follow the expected trend within `tol`.
pub fn trend_holds(times: &[f64], decreasing: bool, tol: f64) -> bool {
    times.windows(2).all(|w| {
        if decreasing {
            w[1] <= w[0] * (1.0 + tol)
        } else {
            w[1] >= w[0] * (1.0 - tol)
        }
    })
}

/// Runs every scheme at every value; failed runs are recorded, not fatal.
pub fn run_sweep(
    scenario: &Scenario,
    env: &EnvParams,
    param: SweepParam,
    values: &[f64],
    schemes: &[Scheme],
    config: &SchemeConfig,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(PlanError::Config("sweep needs at least one value".into()));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(PlanError::Config("sweep values must be strictly increasing".into()));
    }
    let jobs: Vec<(Scheme, f64)> = schemes.iter().flat_map(|s| values.iter().map(move |v| (*s, *v))).collect();
    let records: Vec<SweepRecord> = jobs
        .par_iter()
        .map(|&(scheme, value)| {
            let (mut sc, mut en) = (scenario.clone(), *env);
            param.apply(value, &mut sc, &mut en);
            match run_scheme(scheme, &sc, &en, config) {
                Ok(r) => SweepRecord {
                    scheme,
                    value,
                    completion_time: Some(r.completion_time),
                    feasible: r.is_feasible(),
                    error: None,
                },
                Err(e) => SweepRecord {
                    scheme,
                    value,
                    completion_time: None,
                    feasible: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let trends = schemes
        .iter()
        .map(|&scheme| {
            let times: Vec<f64> = records
                .iter()
                .filter(|r| r.scheme == scheme && r.feasible)
                .filter_map(|r| r.completion_time)
                .collect();
            TrendVerdict {
                scheme,
                monotone: trend_holds(&times, param.expects_decrease(), TREND_TOL),
                complete: times.len() == values.len(),
            }
        })
        .collect();
    Ok(SweepResult {
        param,
        values: values.to_vec(),
        records,
        trends,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{schedule_from_assignment, Point};
    use crate::stats::build_grids;

    fn hover_plan(scenario: &Scenario, assignment: &[Option<usize>]) -> DesignVars {
        DesignVars {
            schedule: schedule_from_assignment(scenario.num_gns(), assignment),
            trajectory: vec![scenario.q_start; scenario.n_slots + 1],
            slots: vec![scenario.delta_max; scenario.n_slots],
        }
    }

    fn hover_scenario() -> Scenario {
        let q = Point::new(0.0, 0.0, 100.0);
        Scenario {
            gns: vec![Point::new(0.0, 0.0, 0.0), Point::new(100.0, 0.0, 0.0)],
            q_start: q,
            q_end: q,
            n_slots: 4,
            ..Scenario::desk()
        }
    }

    #[test]
    fn empty_schedule_gives_zero_rates() {
        let env = EnvParams::reference();
        let sc = hover_scenario();
        let plan = hover_plan(&sc, &[None; 4]);
        let r = monte_carlo_validate(&plan, &sc, &env, &SeModel::average_channel(&env), &McConfig { n_realizations: 100, seed: 3 }).unwrap();
        assert_eq!(r.mean, vec![0.0, 0.0]);
        assert_eq!(r.stderr, vec![0.0, 0.0]);
        assert!(!r.all_feasible());
    }

    #[test]
    fn deterministic_channel_matches_closed_form() {
        // Huge K and a vanishing sigmoid offset make the channel pure LoS
        // with unit fading power.
        let env = EnvParams {
            k_rician: 1e14,
            a1: 1e-300,
            ..EnvParams::reference()
        };
        let sc = hover_scenario();
        let plan = hover_plan(&sc, &[Some(0), Some(0), Some(1), None]);
        let r = monte_carlo_validate(&plan, &sc, &env, &SeModel::average_channel(&env), &McConfig { n_realizations: 500, seed: 9 }).unwrap();
        let se = |d: f64| (1.0 + env.snr_los_ref() / d.powf(env.alpha_los)).log2();
        let expect = [0.5 * se(100.0), 0.25 * se(100.0 * 2f64.sqrt())];
        for k in 0..2 {
            assert!((r.mean[k] - expect[k]).abs() < 1e-6 * expect[k], "{} vs {}", r.mean[k], expect[k]);
            assert!(r.stderr[k] < 1e-6);
        }
    }

    #[test]
    fn mean_rate_matches_per_slot_oracle() {
        let env = EnvParams::reference();
        let sc = hover_scenario();
        let plan = hover_plan(&sc, &[Some(0), Some(1), Some(1), Some(0)]);
        let mc = McConfig { n_realizations: 40_000, seed: 5 };
        let r = monte_carlo_validate(&plan, &sc, &env, &SeModel::average_channel(&env), &mc).unwrap();
        for (k, w) in sc.gns.iter().enumerate() {
            let o = crate::expected_se::se_expected_oracle(&sc.q_start, w, &env, 40_000, 77).unwrap();
            // Each GN holds half the time.
            let expect = 0.5 * o.mean;
            let tol = 4.0 * (r.stderr[k].powi(2) + (0.5 * o.stderr).powi(2)).sqrt();
            assert!((r.mean[k] - expect).abs() <= tol, "gn {k}: {} vs {expect} (tol {tol})", r.mean[k]);
        }
    }

    #[test]
    fn report_is_deterministic_and_well_formed_with_two_draws() {
        let env = EnvParams::reference();
        let sc = hover_scenario();
        let plan = hover_plan(&sc, &[Some(0), Some(1), Some(1), Some(0)]);
        let model = SeModel::lower_bound(&build_grids(8, 8, 8, &env).unwrap(), &env);
        let mc = McConfig { n_realizations: 2, seed: 11 };
        let a = monte_carlo_validate(&plan, &sc, &env, &model, &mc).unwrap();
        let b = monte_carlo_validate(&plan, &sc, &env, &model, &mc).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean.len(), 2);
        assert!(a.stderr.iter().all(|s| s.is_finite() && *s >= 0.0));
    }

    #[test]
    fn invalid_plan_is_rejected() {
        let env = EnvParams::reference();
        let sc = hover_scenario();
        let mut plan = hover_plan(&sc, &[Some(0); 4]);
        plan.trajectory[2].x += 1000.0;
        assert!(monte_carlo_validate(&plan, &sc, &env, &SeModel::average_channel(&env), &McConfig::default()).is_err());
    }

    #[test]
    fn trend_rule() {
        assert!(trend_holds(&[10.0, 10.1, 9.0], true, 0.02));
        assert!(!trend_holds(&[10.0, 10.3], true, 0.02));
        assert!(trend_holds(&[10.0, 9.9, 12.0], false, 0.02));
        assert!(trend_holds(&[], true, 0.02));
    }

    #[test]
    fn sweep_params_parse() {
        assert_eq!("k_rician".parse::<SweepParam>().unwrap(), SweepParam::KRician);
        assert!("speed".parse::<SweepParam>().is_err());
    }
}
