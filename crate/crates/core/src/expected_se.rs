//! Per-slot spectral-efficiency estimators: the quadrature lower bound, the
//! average-channel approximation, and a Monte Carlo oracle for the true
//! expectation, plus time-averaged rate assembly.

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::model::{
    elevation_from, instantaneous_se, los_probability, sample_channel_at, DesignVars, EnvParams, Point, Scenario,
};
use crate::montecarlo::run_chunked;
use crate::stats::QuadratureGrid;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Conditional and total SE of one UAV-GN link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeBreakdown {
    pub p_los: f64,
    pub se_los: f64,
    pub se_nlos: f64,
    pub se_total: f64,
}

/// Which SE estimator a [`SeModel`] implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeKind {
    /// Left-endpoint quadrature lower bound on the expected SE.
    LowerBound,
    /// SE evaluated at the mean channel gain.
    AverageChannel,
}

/// A finite-sum SE estimator: equal-weight points of normalised SNR for the
/// LoS and NLoS conditional terms.
///
/// For the lower bound the LoS points are `P_S beta_L gamma^L_u / sigma^2` and
/// the NLoS points the outer product `P_S beta_N gamma^N_i gamma^nu_j / sigma^2`.
/// The average-channel model is the same sum with a single unit-fading point.
#[derive(Debug, Clone, PartialEq)]
pub struct SeModel {
    pub env: EnvParams,
    pub kind: SeKind,
    pub(crate) los_snr: Vec<f64>,
    pub(crate) nlos_snr: Vec<f64>,
}

impl SeModel {
    pub fn lower_bound(grid: &QuadratureGrid, env: &EnvParams) -> Self {
        let los_ref = env.snr_los_ref();
        let nlos_ref = env.snr_nlos_ref();
        let los_snr = grid.gamma_los.iter().map(|g| los_ref * g).collect();
        let mut nlos_snr = Vec::with_capacity(grid.u_n() * grid.u_nu());
        for gn in &grid.gamma_nlos {
            for gs in &grid.gamma_shadow {
                nlos_snr.push(nlos_ref * gn * gs);
            }
        }
        SeModel {
            env: *env,
            kind: SeKind::LowerBound,
            los_snr,
            nlos_snr,
        }
    }

    pub fn average_channel(env: &EnvParams) -> Self {
        SeModel {
            env: *env,
            kind: SeKind::AverageChannel,
            los_snr: vec![env.snr_los_ref()],
            nlos_snr: vec![env.snr_nlos_ref()],
        }
    }

    pub fn los_points(&self) -> &[f64] {
        &self.los_snr
    }

    pub fn nlos_points(&self) -> &[f64] {
        &self.nlos_snr
    }

    /// LoS conditional SE at squared distance `y`.
    pub fn se_los_sq(&self, y: f64) -> f64 {
        mean_log_term(&self.los_snr, y.powf(0.5 * self.env.alpha_los))
    }

    /// NLoS conditional SE at squared distance `y`.
    pub fn se_nlos_sq(&self, y: f64) -> f64 {
        mean_log_term(&self.nlos_snr, y.powf(0.5 * self.env.alpha_nlos))
    }

    pub fn breakdown(&self, q: &Point, w: &Point) -> Result<SeBreakdown> {
        let rel = q - w;
        let d = rel.norm();
        if !(d > 0.0) || !d.is_finite() {
            return Err(PlanError::domain(format!("UAV and GN positions coincide (distance {d})")));
        }
        let p_los = los_probability(elevation_from(rel.z, d), &self.env);
        let y = d * d;
        let se_los = self.se_los_sq(y);
        let se_nlos = self.se_nlos_sq(y);
        Ok(SeBreakdown {
            p_los,
            se_los,
            se_nlos,
            se_total: p_los * se_los + (1.0 - p_los) * se_nlos,
        })
    }

    /// K x N matrix of per-slot SE for every GN, evaluated at the end-of-slot
    /// positions `trajectory[n + 1]`.
    pub fn per_slot_matrix(&self, scenario: &Scenario, trajectory: &[Point]) -> Result<Vec<Vec<f64>>> {
        if trajectory.len() != scenario.n_slots + 1 {
            return Err(PlanError::dims(format!(
                "trajectory has {} waypoints, expected {}",
                trajectory.len(),
                scenario.n_slots + 1
            )));
        }
        scenario
            .gns
            .iter()
            .map(|w| {
                trajectory[1..]
                    .iter()
                    .map(|q| self.breakdown(q, w).map(|b| b.se_total))
                    .collect()
            })
            .collect()
    }

    /// Time-averaged rate of every GN under this model for a plan.
    pub fn achieved_rates(&self, scenario: &Scenario, vars: &DesignVars) -> Result<Vec<f64>> {
        let m = self.per_slot_matrix(scenario, &vars.trajectory)?;
        achieved_rate(vars, &m)
    }
}

/// `mean_i log2(1 + snr_i / path)`
fn mean_log_term(points: &[f64], path: f64) -> f64 {
    let inv = 1.0 / path;
    let s: f64 = points.iter().map(|g| (g * inv).ln_1p()).sum();
    s * LOG2_E / points.len() as f64
}

/// Quadrature lower bound on the expected SE between `q` and `w`.
pub fn se_lower_bound(q: &Point, w: &Point, grid: &QuadratureGrid, env: &EnvParams) -> Result<SeBreakdown> {
    SeModel::lower_bound(grid, env).breakdown(q, w)
}

/// SE at the mean channel gain (fading and shadowing powers replaced by 1).
pub fn se_avg_channel(q: &Point, w: &Point, env: &EnvParams) -> Result<SeBreakdown> {
    SeModel::average_channel(env).breakdown(q, w)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_draws: usize,
}

/// Monte Carlo estimate of E[log2(1 + SNR)] for the true stochastic channel.
pub fn se_expected_oracle(q: &Point, w: &Point, env: &EnvParams, n_draws: usize, seed: u64) -> Result<OracleEstimate> {
    let d = (q - w).norm();
    if !(d > 0.0) {
        return Err(PlanError::domain("UAV and GN positions coincide"));
    }
    se_oracle_at(d, los_probability(elevation_from(q.z - w.z, d), env), env, n_draws, seed)
}

/// Oracle at a given distance and LoS probability.
pub fn se_oracle_at(dist: f64, p_los: f64, env: &EnvParams, n_draws: usize, seed: u64) -> Result<OracleEstimate> {
    if n_draws < 2 {
        return Err(PlanError::domain(format!("oracle needs at least 2 draws, got {n_draws}")));
    }
    let stats = run_chunked(n_draws, 1, seed, |rng, out| {
        let c = sample_channel_at(dist, p_los, env, rng);
        out[0] = instantaneous_se(c.gain, env);
    });
    Ok(OracleEstimate {
        mean: stats[0].mean,
        stderr: stats[0].stderr(),
        n_draws,
    })
}

/// Time-averaged SE `R_k = (1/T) sum_n s_k[n] delta[n] se[k][n]`.
pub fn achieved_rate(vars: &DesignVars, per_slot_se: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = vars.slots.len();
    if per_slot_se.len() != vars.schedule.len() || per_slot_se.iter().any(|r| r.len() != n) {
        return Err(PlanError::dims("per-slot SE matrix does not match the schedule"));
    }
    if vars.schedule.iter().any(|r| r.len() != n) {
        return Err(PlanError::dims("schedule rows do not match the slot count"));
    }
    let total: f64 = vars.completion_time();
    if !(total > 0.0) {
        return Err(PlanError::domain("total mission time must be positive"));
    }
    Ok(vars
        .schedule
        .iter()
        .zip(per_slot_se)
        .map(|(s, se)| {
            s.iter()
                .zip(se)
                .zip(&vars.slots)
                .map(|((s, r), d)| s * d * r)
                .sum::<f64>()
                / total
        })
        .collect())
}
