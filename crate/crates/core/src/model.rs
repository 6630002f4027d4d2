//! Scenario and environment data, air-to-ground geometry, the probabilistic
//! LoS channel, channel sampling and plan validation.
//!
//! Conventions used throughout the crate:
//! - positions are metres, powers watts, gains linear power ratios;
//! - angles are degrees (the LoS sigmoid constants are parameterised in degrees);
//! - slots are 0-based: slot `n` lasts `slots[n]` seconds and the UAV
//!   communicates from `trajectory[n + 1]`, the end-of-slot position.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};

/// A 3D position in metres.
pub type Point = Vector3<f64>;

/// Channel environment, all values in linear units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvParams {
    /// LoS sigmoid constant A1.
    pub a1: f64,
    /// LoS sigmoid constant A2 (per degree).
    pub a2: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Reference gain at 1 m, LoS.
    pub beta_los: f64,
    /// Reference gain at 1 m, NLoS.
    pub beta_nlos: f64,
    /// GN transmit power (W).
    pub p_tx: f64,
    /// Noise power (W).
    pub noise: f64,
    /// Rician K-factor (linear). `f64::INFINITY` gives a deterministic LoS channel.
    pub k_rician: f64,
    /// Shadowing standard deviation (dB).
    pub sigma_db: f64,
    /// Minimum required spectral efficiency (bps/Hz).
    pub r_min: f64,
}

/// Converts a dB power ratio to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl EnvParams {
    /// The reference environment: 30 dBm transmit power, -70 dBm noise,
    /// -30/-40 dB reference gains, path-loss exponents 2/2.7, K = 15 dB,
    /// 10 dB shadowing, A1 = 12.08, A2 = 0.114 and 2.4 bps/Hz minimum SE.
    pub fn reference() -> Self {
        EnvParams {
            a1: 12.08,
            a2: 0.114,
            alpha_los: 2.0,
            alpha_nlos: 2.7,
            beta_los: db_to_linear(-30.0),
            beta_nlos: db_to_linear(-40.0),
            p_tx: dbm_to_watts(30.0),
            noise: dbm_to_watts(-70.0),
            k_rician: db_to_linear(15.0),
            sigma_db: 10.0,
            r_min: 2.4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a1", self.a1),
            ("a2", self.a2),
            ("beta_los", self.beta_los),
            ("beta_nlos", self.beta_nlos),
            ("p_tx", self.p_tx),
            ("noise", self.noise),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PlanError::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("alpha_los", self.alpha_los), ("alpha_nlos", self.alpha_nlos)] {
            if !(2.0..=6.0).contains(&v) {
                return Err(PlanError::Config(format!("{name} must lie in [2, 6], got {v}")));
            }
        }
        if !(self.alpha_los < self.alpha_nlos) {
            return Err(PlanError::Config(format!(
                "alpha_los ({}) must be smaller than alpha_nlos ({})",
                self.alpha_los, self.alpha_nlos
            )));
        }
        if !(self.beta_los > self.beta_nlos) {
            return Err(PlanError::Config(format!(
                "beta_los ({}) must be larger than beta_nlos ({})",
                self.beta_los, self.beta_nlos
            )));
        }
        if !(self.k_rician >= 0.0) {
            return Err(PlanError::Config(format!("k_rician must be non-negative, got {}", self.k_rician)));
        }
        if !(self.sigma_db >= 0.0 && self.sigma_db.is_finite()) {
            return Err(PlanError::Config(format!("sigma_db must be non-negative, got {}", self.sigma_db)));
        }
        if !(self.r_min >= 0.0 && self.r_min.is_finite()) {
            return Err(PlanError::Config(format!("r_min must be non-negative, got {}", self.r_min)));
        }
        Ok(())
    }

    /// Shadowing bias correction in dB, `ln(10)/20 * sigma_db^2`.
    pub fn shadow_bias_db(&self) -> f64 {
        shadow_bias_db(self.sigma_db)
    }

    /// `P_S * beta_L / sigma^2`, the LoS SNR at 1 m for unit fading power.
    pub fn snr_los_ref(&self) -> f64 {
        self.p_tx * self.beta_los / self.noise
    }

    pub fn snr_nlos_ref(&self) -> f64 {
        self.p_tx * self.beta_nlos / self.noise
    }

    /// Symmetry point of the LoS sigmoid, `a1 + ln(a1)/a2` (degrees).
    pub fn sigmoid_symmetry_point(&self) -> f64 {
        self.a1 + self.a1.ln() / self.a2
    }
}

pub(crate) fn shadow_bias_db(sigma_db: f64) -> f64 {
    std::f64::consts::LN_10 / 20.0 * sigma_db * sigma_db
}

/// Mission geometry and kinematic limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Ground node positions (z = 0).
    pub gns: Vec<Point>,
    pub q_start: Point,
    pub q_end: Point,
    pub h_min: f64,
    pub h_max: f64,
    /// Maximum 3D speed (m/s).
    pub v_max: f64,
    /// Maximum vertical speed (m/s).
    pub v_z: f64,
    pub n_slots: usize,
    pub delta_max: f64,
    pub delta_min: f64,
}

impl Scenario {
    /// Four GNs on the corners of a 300 m square, flying across it from west
    /// to east at 100 m, with the reference kinematic limits, 160 slots and
    /// slots of at most 1 s.
    pub fn desk() -> Self {
        Scenario {
            gns: vec![
                Point::new(100.0, 100.0, 0.0),
                Point::new(100.0, 400.0, 0.0),
                Point::new(400.0, 400.0, 0.0),
                Point::new(400.0, 100.0, 0.0),
            ],
            q_start: Point::new(0.0, 250.0, 100.0),
            q_end: Point::new(500.0, 250.0, 100.0),
            h_min: 10.0,
            h_max: 200.0,
            v_max: 20.0,
            v_z: 10.0,
            n_slots: 160,
            delta_max: 1.0,
            delta_min: 1e-5,
        }
    }

    /// The desk layout coarsened to 40 slots of at most 4 s.
    pub fn ci() -> Self {
        Scenario {
            n_slots: 40,
            delta_max: 4.0,
            ..Scenario::desk()
        }
    }

    pub fn num_gns(&self) -> usize {
        self.gns.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.gns.is_empty() {
            return Err(PlanError::Config("scenario.gns must contain at least one ground node".into()));
        }
        if self.n_slots == 0 {
            return Err(PlanError::Config("scenario.n_slots must be at least 1".into()));
        }
        for (k, w) in self.gns.iter().enumerate() {
            if w.z != 0.0 || !w.iter().all(|c| c.is_finite()) {
                return Err(PlanError::Config(format!(
                    "scenario.gns[{k}] must be a finite ground position with z = 0"
                )));
            }
        }
        if !(self.v_z > 0.0 && self.v_max >= self.v_z && self.v_max.is_finite()) {
            return Err(PlanError::Config(format!(
                "scenario requires v_max >= v_z > 0 (v_max = {}, v_z = {})",
                self.v_max, self.v_z
            )));
        }
        if !(self.delta_min > 0.0 && self.delta_min < self.delta_max && self.delta_max.is_finite()) {
            return Err(PlanError::Config(format!(
                "scenario requires 0 < delta_min < delta_max (delta_min = {}, delta_max = {})",
                self.delta_min, self.delta_max
            )));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_max && self.h_max.is_finite()) {
            return Err(PlanError::Config(format!(
                "scenario requires 0 < h_min <= h_max (h_min = {}, h_max = {})",
                self.h_min, self.h_max
            )));
        }
        for (name, q) in [("q_start", &self.q_start), ("q_end", &self.q_end)] {
            if !(q.z >= self.h_min && q.z <= self.h_max) || !q.iter().all(|c| c.is_finite()) {
                return Err(PlanError::Config(format!(
                    "scenario.{name} altitude {} outside [h_min, h_max] = [{}, {}]",
                    q.z, self.h_min, self.h_max
                )));
            }
        }
        Ok(())
    }

    /// Copy of the scenario with the endpoints moved to altitude `h_min`.
    pub fn with_endpoints_at_h_min(&self) -> Self {
        let mut s = self.clone();
        s.q_start.z = s.h_min;
        s.q_end.z = s.h_min;
        s
    }
}

/// A candidate plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignVars {
    /// K rows by N columns; `schedule[k][n]` is the share of slot `n` given to GN `k`.
    pub schedule: Vec<Vec<f64>>,
    /// N + 1 waypoints, `trajectory[0] = q_start`, `trajectory[N] = q_end`.
    pub trajectory: Vec<Point>,
    /// N slot durations (s).
    pub slots: Vec<f64>,
}

impl DesignVars {
    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn num_gns(&self) -> usize {
        self.schedule.len()
    }

    pub fn completion_time(&self) -> f64 {
        self.slots.iter().sum()
    }

    /// Communication position for slot `n`.
    pub fn position(&self, n: usize) -> &Point {
        &self.trajectory[n + 1]
    }

    /// The GN holding slot `n` in a binary schedule, if any.
    pub fn scheduled_gn(&self, n: usize) -> Option<usize> {
        (0..self.schedule.len()).find(|&k| self.schedule[k][n] >= 0.5)
    }

    /// Per-slot assignment vector of a binary schedule.
    pub fn assignment(&self) -> Vec<Option<usize>> {
        (0..self.num_slots()).map(|n| self.scheduled_gn(n)).collect()
    }

    pub fn check_dims(&self, num_gns: usize, num_slots: usize) -> Result<()> {
        if self.slots.len() != num_slots {
            return Err(PlanError::dims(format!("expected {num_slots} slots, got {}", self.slots.len())));
        }
        if self.trajectory.len() != num_slots + 1 {
            return Err(PlanError::dims(format!(
                "expected {} waypoints, got {}",
                num_slots + 1,
                self.trajectory.len()
            )));
        }
        if self.schedule.len() != num_gns || self.schedule.iter().any(|row| row.len() != num_slots) {
            return Err(PlanError::dims(format!("schedule must be {num_gns} x {num_slots}")));
        }
        Ok(())
    }
}

/// Builds a binary K x N schedule matrix from a per-slot assignment.
pub fn schedule_from_assignment(num_gns: usize, assignment: &[Option<usize>]) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; assignment.len()]; num_gns];
    for (n, a) in assignment.iter().enumerate() {
        if let Some(k) = a {
            s[*k][n] = 1.0;
        }
    }
    s
}

/// One channel realisation between the UAV and a GN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    pub is_los: bool,
    /// |g^L|^2
    pub g_los_power: f64,
    /// |g^N|^2
    pub g_nlos_power: f64,
    /// Shadowing gain (linear, unit mean).
    pub shadow: f64,
    /// Resulting channel power gain.
    pub gain: f64,
}

fn distance(q: &Point, w: &Point) -> Result<f64> {
    let d = (q - w).norm();
    if !(d > 0.0) || !d.is_finite() {
        return Err(PlanError::domain(format!("UAV and GN positions coincide or are not finite (distance {d})")));
    }
    Ok(d)
}

/// Elevation angle of `q` seen from `w`, degrees.
pub fn elevation_angle(q: &Point, w: &Point) -> Result<f64> {
    let d = distance(q, w)?;
    if q.z < 0.0 {
        return Err(PlanError::domain(format!("UAV altitude {} is negative", q.z)));
    }
    Ok(elevation_from(q.z - w.z, d))
}

pub(crate) fn elevation_from(height: f64, dist: f64) -> f64 {
    (height / dist).clamp(-1.0, 1.0).asin() * 180.0 / PI
}

/// LoS probability for an elevation angle in degrees.
pub fn los_probability(theta: f64, env: &EnvParams) -> f64 {
    1.0 / (1.0 + env.a1 * (-env.a2 * (theta - env.a1)).exp())
}

/// log2(1 + p_tx * gain / noise)
pub fn instantaneous_se(gain: f64, env: &EnvParams) -> f64 {
    (env.p_tx * gain / env.noise).ln_1p() / std::f64::consts::LN_2
}

/// Amplitudes of the specular and scattered Rician components.
pub(crate) fn rician_amplitudes(k: f64) -> (f64, f64) {
    if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    }
}

/// Draws |g^L|^2 for a Rician channel with factor `k`.
pub fn draw_los_power<R: Rng + ?Sized>(k: f64, rng: &mut R) -> f64 {
    let (spec, scat) = rician_amplitudes(k);
    let phi = rng.random::<f64>() * 2.0 * PI;
    let (re_n, im_n): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
    // CN(0, 1): each quadrature has variance 1/2
    let re = spec * phi.cos() + scat * re_n * std::f64::consts::FRAC_1_SQRT_2;
    let im = spec * phi.sin() + scat * im_n * std::f64::consts::FRAC_1_SQRT_2;
    re * re + im * im
}

/// Draws the unit-mean bias-corrected log-normal shadowing gain.
pub fn draw_shadow<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    let x: f64 = StandardNormal.sample(rng);
    10f64.powf((sigma_db * x - shadow_bias_db(sigma_db)) / 10.0)
}

/// Samples a channel at a known distance and LoS probability.
pub fn sample_channel_at<R: Rng + ?Sized>(dist: f64, p_los: f64, env: &EnvParams, rng: &mut R) -> ChannelDraw {
    let is_los = rng.random::<f64>() < p_los;
    let g_los_power = draw_los_power(env.k_rician, rng);
    let g_nlos_power: f64 = Exp1.sample(rng);
    let shadow = draw_shadow(env.sigma_db, rng);
    let gain = if is_los {
        g_los_power * env.beta_los / dist.powf(env.alpha_los)
    } else {
        shadow * g_nlos_power * env.beta_nlos / dist.powf(env.alpha_nlos)
    };
    ChannelDraw {
        is_los,
        g_los_power,
        g_nlos_power,
        shadow,
        gain,
    }
}

/// Samples the UAV-GN channel for UAV position `q` and GN position `w`.
pub fn sample_channel<R: Rng + ?Sized>(q: &Point, w: &Point, env: &EnvParams, rng: &mut R) -> Result<ChannelDraw> {
    let d = distance(q, w)?;
    let theta = elevation_from(q.z - w.z, d);
    Ok(sample_channel_at(d, los_probability(theta, env), env, rng))
}

/// Constraint families checked by [`validate_design`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    StartPoint,
    EndPoint,
    Altitude,
    Speed,
    VerticalSpeed,
    SlotLength,
    ScheduleRange,
    SlotShare,
}

/// Worst violation magnitude per constraint family. Empty when the plan is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub worst: BTreeMap<ConstraintKind, f64>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.worst.is_empty()
    }

    pub fn get(&self, kind: ConstraintKind) -> Option<f64> {
        self.worst.get(&kind).copied()
    }

    fn record(&mut self, kind: ConstraintKind, excess: f64, scale: f64, tol: f64) {
        if excess > tol * scale.max(1.0) {
            let e = self.worst.entry(kind).or_insert(0.0);
            *e = e.max(excess);
        }
    }
}

/// Default relative tolerance of [`validate_design`].
pub const VALIDATION_TOL: f64 = 1e-9;

/// Checks the hard plan constraints (endpoints, altitude window, speed limits,
/// slot bounds, schedule range and at most one GN per slot).
///
/// A violation is reported when its excess is larger than `tol` times the
/// magnitude of the quantity it bounds (at least 1).
pub fn validate_design(scenario: &Scenario, vars: &DesignVars, tol: f64) -> Result<ViolationReport> {
    vars.check_dims(scenario.num_gns(), scenario.n_slots)?;
    let mut r = ViolationReport::default();
    let q = &vars.trajectory;
    let n_slots = scenario.n_slots;

    r.record(ConstraintKind::StartPoint, (q[0] - scenario.q_start).norm(), scenario.q_start.norm(), tol);
    r.record(ConstraintKind::EndPoint, (q[n_slots] - scenario.q_end).norm(), scenario.q_end.norm(), tol);
    for p in q {
        r.record(ConstraintKind::Altitude, scenario.h_min - p.z, scenario.h_min, tol);
        r.record(ConstraintKind::Altitude, p.z - scenario.h_max, scenario.h_max, tol);
    }
    for n in 0..n_slots {
        let d = vars.slots[n];
        let step = q[n + 1] - q[n];
        let reach = scenario.v_max * d;
        r.record(ConstraintKind::Speed, step.norm() - reach, reach, tol);
        let vreach = scenario.v_z * d;
        r.record(ConstraintKind::VerticalSpeed, step.z.abs() - vreach, vreach, tol);
        r.record(ConstraintKind::SlotLength, scenario.delta_min - d, scenario.delta_min, tol);
        r.record(ConstraintKind::SlotLength, d - scenario.delta_max, scenario.delta_max, tol);
        let mut share = 0.0;
        for row in &vars.schedule {
            let s = row[n];
            r.record(ConstraintKind::ScheduleRange, -s, 1.0, tol);
            r.record(ConstraintKind::ScheduleRange, s - 1.0, 1.0, tol);
            share += s;
        }
        r.record(ConstraintKind::SlotShare, share - 1.0, 1.0, tol);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn elevation_examples() {
        let w = Point::zeros();
        assert_abs_diff_eq!(elevation_angle(&Point::new(0.0, 0.0, 100.0), &w).unwrap(), 90.0, epsilon = 1e-12);
        assert_abs_diff_eq!(elevation_angle(&Point::new(100.0, 0.0, 100.0), &w).unwrap(), 45.0, epsilon = 1e-12);
        let q = Point::new(100.0 * 3f64.sqrt(), 0.0, 100.0);
        assert_abs_diff_eq!(elevation_angle(&q, &w).unwrap(), 30.0, epsilon = 1e-12);
        assert!(matches!(elevation_angle(&w, &w), Err(PlanError::Domain(_))));
    }

    #[test]
    fn los_probability_examples() {
        let env = EnvParams::reference();
        assert_abs_diff_eq!(los_probability(12.08, &env), 1.0 / 13.08, epsilon = 1e-15);
        // 1/(1 + 12.08 exp(-0.114 * 32.92)) and 1/(1 + 12.08 exp(-0.114 * 77.92))
        assert_abs_diff_eq!(los_probability(45.0, &env), 0.779_254_77, epsilon = 1e-8);
        assert_abs_diff_eq!(los_probability(90.0, &env), 0.998_326_78, epsilon = 1e-8);
    }

    #[test]
    fn los_probability_strictly_increasing() {
        for (a1, a2) in [(12.08, 0.114), (4.88, 0.43), (9.61, 0.16), (27.23, 0.08)] {
            let env = EnvParams { a1, a2, ..EnvParams::reference() };
            let mut prev = los_probability(0.0, &env);
            for i in 1..=9000 {
                let p = los_probability(i as f64 * 0.01, &env);
                // strict until the sigmoid saturates in double precision
                assert!(p > prev || (p == prev && p > 1.0 - 1e-12), "not increasing at {}", i as f64 * 0.01);
                prev = p;
            }
        }
    }

    #[test]
    fn elevation_rotation_invariant_and_monotone_in_altitude() {
        let w = Point::new(30.0, -20.0, 0.0);
        let q = Point::new(130.0, 40.0, 75.0);
        let base = elevation_angle(&q, &w).unwrap();
        for i in 0..36 {
            let a = i as f64 * 10f64.to_radians();
            let rel = q - w;
            let rot = Point::new(rel.x * a.cos() - rel.y * a.sin(), rel.x * a.sin() + rel.y * a.cos(), rel.z);
            assert_abs_diff_eq!(elevation_angle(&(w + rot), &w).unwrap(), base, epsilon = 1e-10);
        }
        let mut prev = -1.0;
        for h in 1..300 {
            let th = elevation_angle(&Point::new(80.0, 0.0, h as f64), &Point::zeros()).unwrap();
            assert!(th > prev);
            prev = th;
        }
    }

    #[test]
    fn instantaneous_se_examples() {
        let env = EnvParams::reference();
        assert_eq!(instantaneous_se(0.0, &env), 0.0);
        assert_abs_diff_eq!(instantaneous_se(env.noise / env.p_tx, &env), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(instantaneous_se(1e-7, &env), 1001f64.log2(), epsilon = 1e-9);
        assert_abs_diff_eq!(instantaneous_se(1e-7, &env), 9.9672, epsilon = 1e-4);
    }

    #[test]
    fn infinite_k_gives_unit_los_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_abs_diff_eq!(draw_los_power(f64::INFINITY, &mut rng), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn channel_gain_matches_mixture() {
        let env = EnvParams::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = Point::new(50.0, 20.0, 80.0);
        let w = Point::new(0.0, 0.0, 0.0);
        let d = (q - w).norm();
        for _ in 0..1000 {
            let c = sample_channel(&q, &w, &env, &mut rng).unwrap();
            let expect = if c.is_los {
                c.g_los_power * env.beta_los / d.powf(env.alpha_los)
            } else {
                c.shadow * c.g_nlos_power * env.beta_nlos / d.powf(env.alpha_nlos)
            };
            assert_eq!(c.gain, expect);
            assert!(c.g_los_power >= 0.0 && c.g_nlos_power >= 0.0 && c.shadow >= 0.0);
        }
        assert!(sample_channel(&w, &w, &env, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_seed_reproducible() {
        let env = EnvParams::reference();
        let q = Point::new(10.0, 0.0, 50.0);
        let w = Point::zeros();
        let a: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..50).map(|_| sample_channel(&q, &w, &env, &mut rng).unwrap()).collect()
        };
        let b: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..50).map(|_| sample_channel(&q, &w, &env, &mut rng).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    fn stationary_plan(s: &Scenario) -> DesignVars {
        DesignVars {
            schedule: vec![vec![0.0; s.n_slots]; s.num_gns()],
            trajectory: vec![s.q_start; s.n_slots + 1],
            slots: vec![s.delta_max; s.n_slots],
        }
    }

    fn hover_scenario() -> Scenario {
        let mut s = Scenario::desk();
        s.q_end = s.q_start;
        s.n_slots = 6;
        s
    }

    #[test]
    fn stationary_plan_is_valid() {
        let s = hover_scenario();
        let plan = stationary_plan(&s);
        assert!(validate_design(&s, &plan, VALIDATION_TOL).unwrap().is_empty());
    }

    #[test]
    fn mobility_violation_is_reported() {
        let s = hover_scenario();
        let mut plan = stationary_plan(&s);
        let step = s.v_max * plan.slots[0] * 1.1;
        plan.trajectory[1] = s.q_start + Point::new(step, 0.0, 0.0);
        // slot 2 has to come back; give it room so only slot 1 is flagged
        plan.slots[1] = s.delta_max;
        plan.trajectory[2] = s.q_start + Point::new(step * 0.5, 0.0, 0.0);
        plan.trajectory[3] = s.q_start;
        let r = validate_design(&s, &plan, VALIDATION_TOL).unwrap();
        let v = r.get(ConstraintKind::Speed).unwrap();
        assert_abs_diff_eq!(v, 0.1 * s.v_max * plan.slots[0], epsilon = 1e-9);
    }

    #[test]
    fn slot_share_violation_is_reported() {
        let s = hover_scenario();
        let mut plan = stationary_plan(&s);
        plan.schedule[0][3] = 0.6;
        plan.schedule[1][3] = 0.6;
        let r = validate_design(&s, &plan, VALIDATION_TOL).unwrap();
        assert_abs_diff_eq!(r.get(ConstraintKind::SlotShare).unwrap(), 0.2, epsilon = 1e-12);
        assert_eq!(r.worst.len(), 1);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = hover_scenario();
        let mut plan = stationary_plan(&s);
        plan.slots.pop();
        assert!(matches!(validate_design(&s, &plan, VALIDATION_TOL), Err(PlanError::DimensionMismatch(_))));
    }

    #[test]
    fn reference_environment_is_valid() {
        let env = EnvParams::reference();
        env.validate().unwrap();
        assert_abs_diff_eq!(env.p_tx, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(env.noise, 1e-10, epsilon = 1e-24);
        assert_abs_diff_eq!(env.k_rician, 31.622_776_601_683_793, epsilon = 1e-12);
        let bad = EnvParams { alpha_los: 3.0, ..env };
        assert!(bad.validate().is_err());
        Scenario::desk().validate().unwrap();
    }
}
