//! Convexified subproblems: the scheduling LP (SP1) and the trajectory and
//! slot-length program (SP2-1), with the closed-form surrogates they rely on.

mod barrier;
mod scheduling;
mod trajectory;

pub use barrier::BarrierSettings;
pub use scheduling::{round_schedule, schedule_slack, solve_scheduling_lp, RelaxedSchedule};
pub use trajectory::{solve_trajectory_subproblem, SlotMode, SubproblemSolution, TrajectoryVariant};

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::expected_se::SeModel;
use crate::model::{elevation_from, EnvParams, Point, Scenario};

/// Upper clamp for elevation anchors. The sine linearization has zero slope
/// at 90 degrees, which would leave no strictly feasible angle below it.
pub const THETA_ANCHOR_MAX: f64 = 89.9;

const DEG: f64 = std::f64::consts::PI / 180.0;

/// `1/P^L(theta)`, i.e. `1 + a1 exp(-a2 (theta - a1))`.
pub fn x_los(theta: f64, env: &EnvParams) -> f64 {
    1.0 + env.a1 * (-env.a2 * (theta - env.a1)).exp()
}

/// `1/(1 - P^L(theta))`, written as a sigmoid mirrored about the symmetry point.
pub fn x_nlos(theta: f64, env: &EnvParams) -> f64 {
    1.0 + env.a1 * (-env.a2 * (2.0 * env.sigmoid_symmetry_point() - theta - env.a1)).exp()
}

/// NLoS probability written as a rising sigmoid mirrored about `x_s`.
pub fn symmetric_nlos_sigmoid(theta: f64, env: &EnvParams) -> f64 {
    1.0 / x_nlos(theta, env)
}

/// First-order expansion of `sin(theta)` (degrees) around `anchor`; never
/// below the sine itself on [0, 90].
pub fn sine_linearization(theta: f64, anchor: f64) -> f64 {
    let a = anchor * DEG;
    a.sin() + DEG * a.cos() * (theta - anchor)
}

/// Optimal multiplier of the angle quadratic transform, `sqrt(h) / d`.
pub fn update_lambda(q: &Point, w: &Point) -> Result<f64> {
    let d = (q - w).norm();
    if !(d > 0.0) {
        return Err(PlanError::domain("lambda update at zero UAV-GN distance"));
    }
    Ok((q.z - w.z).max(0.0).sqrt() / d)
}

/// Optimal multiplier of the rate quadratic transform, `delta sqrt(r)`.
pub fn update_mu(delta: f64, r_lb: f64) -> f64 {
    delta * r_lb.max(0.0).sqrt()
}

/// `2 lambda sqrt(h) - lambda^2 d`, a lower bound on `h / d`.
pub fn angle_transform(q: &Point, w: &Point, lambda: f64) -> f64 {
    let h = (q.z - w.z).max(0.0);
    2.0 * lambda * h.sqrt() - lambda * lambda * (q - w).norm()
}

/// `2 mu sqrt(t) - mu^2 / delta`, a lower bound on `delta t`.
pub fn rate_transform(mu: f64, t: f64, delta: f64) -> f64 {
    2.0 * mu * t.max(0.0).sqrt() - mu * mu / delta
}

/// Aggregated first-order coefficients of one UAV-GN link at an anchor.
///
/// The per-point weights are averaged over the quadrature points, so each
/// field is already the finite-sum weight used by the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkCoefficients {
    pub gn: Point,
    pub theta_prev: f64,
    pub x_los_prev: f64,
    pub x_nlos_prev: f64,
    pub y_prev: f64,
    /// Mean over LoS points of `(1/X^2) log2(1 + G/y^(a/2))`.
    pub psi_los: f64,
    pub psi_nlos: f64,
    /// Combined distance slope of both conditional terms.
    pub chi: f64,
    pub chi_los: f64,
    pub chi_nlos: f64,
    pub r_hat_prev: f64,
}

impl LinkCoefficients {
    pub fn at_anchor(model: &SeModel, q: &Point, w: &Point, theta_prev: f64) -> Result<Self> {
        let env = &model.env;
        let y = (q - w).norm_squared();
        if !(y > 0.0) {
            return Err(PlanError::domain("SCA anchor at zero UAV-GN distance"));
        }
        if !(0.0..=90.0).contains(&theta_prev) {
            return Err(PlanError::domain(format!("elevation anchor {theta_prev} outside [0, 90]")));
        }
        let xl = x_los(theta_prev, env);
        let xn = x_nlos(theta_prev, env);
        let (se_l, slope_l) = log_sum_and_slope(model.los_points(), y, env.alpha_los);
        let (se_n, slope_n) = log_sum_and_slope(model.nlos_points(), y, env.alpha_nlos);
        let chi_los = slope_l / xl;
        let chi_nlos = slope_n / xn;
        Ok(LinkCoefficients {
            gn: *w,
            theta_prev,
            x_los_prev: xl,
            x_nlos_prev: xn,
            y_prev: y,
            psi_los: se_l / (xl * xl),
            psi_nlos: se_n / (xn * xn),
            chi: chi_los + chi_nlos,
            chi_los,
            chi_nlos,
            r_hat_prev: se_l / xl + se_n / xn,
        })
    }

    /// Linearized bound at elevation `theta` and squared distance `y`.
    pub fn r_hat_lb_at(&self, theta: f64, y: f64, env: &EnvParams) -> f64 {
        self.r_hat_prev
            - self.psi_los * (x_los(theta, env) - self.x_los_prev)
            - self.psi_nlos * (x_nlos(theta, env) - self.x_nlos_prev)
            - self.chi * (y - self.y_prev)
    }

    pub fn r_hat_lb(&self, q: &Point, theta: f64, env: &EnvParams) -> f64 {
        self.r_hat_lb_at(theta, (q - self.gn).norm_squared(), env)
    }
}

/// Mean of `log2(1 + G/y^(a/2))` and of its negative y-derivative
/// `a G log2(e) / (2 y (y^(a/2) + G))` over the points `G`.
fn log_sum_and_slope(points: &[f64], y: f64, alpha: f64) -> (f64, f64) {
    let p = y.powf(0.5 * alpha);
    let mut s = 0.0;
    let mut c = 0.0;
    for &g in points {
        s += (g / p).ln_1p();
        c += g / (p + g);
    }
    let m = points.len() as f64;
    (
        s * std::f64::consts::LOG2_E / m,
        c * alpha * std::f64::consts::LOG2_E / (2.0 * y * m),
    )
}

/// `r_hat(q, theta) = se_L(y)/X^L(theta) + se_N(y)/X^N(theta)`: the finite-sum
/// bound with the true LoS probability replaced by its value at `theta`.
pub fn r_hat(model: &SeModel, q: &Point, w: &Point, theta: f64) -> Result<f64> {
    let y = (q - w).norm_squared();
    if !(y > 0.0) {
        return Err(PlanError::domain("r_hat at zero UAV-GN distance"));
    }
    Ok(model.se_los_sq(y) / x_los(theta, &model.env) + model.se_nlos_sq(y) / x_nlos(theta, &model.env))
}

/// Coefficients of every (GN, slot) pair, row-major K x N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaCoefficients {
    pub num_gns: usize,
    pub num_slots: usize,
    pub links: Vec<LinkCoefficients>,
}

impl ScaCoefficients {
    pub fn get(&self, k: usize, n: usize) -> &LinkCoefficients {
        &self.links[k * self.num_slots + n]
    }
}

/// Builds the coefficients at the anchor trajectory (slot `n` uses
/// `trajectory[n + 1]`) and elevation anchors `theta_prev[k][n]`.
pub fn compute_sca_coefficients(
    model: &SeModel,
    scenario: &Scenario,
    trajectory: &[Point],
    theta_prev: &[Vec<f64>],
) -> Result<ScaCoefficients> {
    let n_slots = scenario.n_slots;
    if trajectory.len() != n_slots + 1 {
        return Err(PlanError::dims("anchor trajectory length must be N + 1"));
    }
    if theta_prev.len() != scenario.num_gns() || theta_prev.iter().any(|r| r.len() != n_slots) {
        return Err(PlanError::dims("elevation anchors must be K x N"));
    }
    let mut links = Vec::with_capacity(scenario.num_gns() * n_slots);
    for (k, w) in scenario.gns.iter().enumerate() {
        for n in 0..n_slots {
            links.push(LinkCoefficients::at_anchor(model, &trajectory[n + 1], w, theta_prev[k][n])?);
        }
    }
    Ok(ScaCoefficients {
        num_gns: scenario.num_gns(),
        num_slots: n_slots,
        links,
    })
}

/// Linearized rate bound for GN `k` in slot `n` at position `q`.
pub fn r_hat_lb(q: &Point, theta: f64, coeffs: &ScaCoefficients, k: usize, n: usize, env: &EnvParams) -> f64 {
    coeffs.get(k, n).r_hat_lb(q, theta, env)
}

/// True elevation angles of every (GN, slot) pair clamped to the anchor range.
pub fn anchor_angles(scenario: &Scenario, trajectory: &[Point]) -> Vec<Vec<f64>> {
    scenario
        .gns
        .iter()
        .map(|w| {
            trajectory[1..]
                .iter()
                .map(|q| {
                    let r = q - w;
                    elevation_from(r.z, r.norm()).clamp(0.0, THETA_ANCHOR_MAX)
                })
                .collect()
        })
        .collect()
}

/// Anchors and auxiliary multipliers carried between SCA iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaState {
    pub q_prev: Vec<Point>,
    pub delta_prev: Vec<f64>,
    pub theta_lb_prev: Vec<Vec<f64>>,
    pub lambda: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    pub eta: f64,
    pub x_sym: f64,
}

impl ScaState {
    /// Anchors at a plan: elevation anchors at the true angles, and both
    /// multipliers at their closed-form optima.
    pub fn at_plan(
        model: &SeModel,
        scenario: &Scenario,
        trajectory: &[Point],
        slots: &[f64],
        eta: f64,
    ) -> Result<(Self, ScaCoefficients)> {
        let theta = anchor_angles(scenario, trajectory);
        let coeffs = compute_sca_coefficients(model, scenario, trajectory, &theta)?;
        let mut lambda = Vec::with_capacity(scenario.num_gns());
        let mut mu = Vec::with_capacity(scenario.num_gns());
        for (k, w) in scenario.gns.iter().enumerate() {
            lambda.push(
                (0..scenario.n_slots)
                    .map(|n| update_lambda(&trajectory[n + 1], w))
                    .collect::<Result<Vec<_>>>()?,
            );
            mu.push(
                (0..scenario.n_slots)
                    .map(|n| update_mu(slots[n], coeffs.get(k, n).r_hat_prev))
                    .collect(),
            );
        }
        Ok((
            ScaState {
                q_prev: trajectory.to_vec(),
                delta_prev: slots.to_vec(),
                theta_lb_prev: theta,
                lambda,
                mu,
                eta,
                x_sym: model.env.sigmoid_symmetry_point(),
            },
            coeffs,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::los_probability;
    use crate::stats::build_grids;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lb_model() -> SeModel {
        let env = EnvParams::reference();
        SeModel::lower_bound(&build_grids(20, 10, 10, &env).unwrap(), &env)
    }

    #[test]
    fn lambda_examples() {
        let o = Point::zeros();
        assert_abs_diff_eq!(update_lambda(&Point::new(0.0, 0.0, 100.0), &o).unwrap(), 0.1, epsilon = 1e-15);
        assert_eq!(update_lambda(&Point::new(5.0, 0.0, 0.0), &o).unwrap(), 0.0);
        assert_abs_diff_eq!(
            update_lambda(&Point::new(100.0, 0.0, 100.0), &o).unwrap(),
            0.070_710_678_118_654_75,
            epsilon = 1e-15
        );
        assert!(update_lambda(&o, &o).is_err());
    }

    #[test]
    fn mu_examples() {
        assert_eq!(update_mu(0.7, 0.0), 0.0);
        assert_eq!(update_mu(0.5, 4.0), 1.0);
        for (d, r) in [(0.5, 4.0), (0.013, 9.7), (2.0, 0.25)] {
            let mu = update_mu(d, r);
            assert_abs_diff_eq!(rate_transform(mu, r, d), d * r, epsilon = 1e-14);
        }
    }

    #[test]
    fn symmetric_sigmoid_matches_nlos_probability() {
        let env = EnvParams::reference();
        let xs = env.sigmoid_symmetry_point();
        assert_abs_diff_eq!(xs, 33.935_712_21, epsilon = 1e-8);
        assert_abs_diff_eq!(symmetric_nlos_sigmoid(xs, &env), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(los_probability(xs, &env), 0.5, epsilon = 1e-15);
        let worst = (0..=10_000)
            .map(|i| {
                let th = 90.0 * i as f64 / 10_000.0;
                ((1.0 - los_probability(th, &env)) - symmetric_nlos_sigmoid(th, &env)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn sine_linearization_over_estimates() {
        for i in 0..=90 {
            for j in 0..=90 {
                let (th, a) = (i as f64, j as f64);
                assert!(sine_linearization(th, a) >= (th * DEG).sin() - 1e-12);
            }
        }
    }

    #[test]
    fn coefficients_are_tight_at_anchor() {
        let model = lb_model();
        let w = Point::new(30.0, -20.0, 0.0);
        let q = Point::new(80.0, 10.0, 60.0);
        let th = 40.0;
        let c = LinkCoefficients::at_anchor(&model, &q, &w, th).unwrap();
        assert!(c.psi_los >= 0.0 && c.psi_nlos >= 0.0 && c.chi >= 0.0);
        assert!(c.x_los_prev > 1.0 && c.x_nlos_prev > 1.0);
        assert_abs_diff_eq!(c.r_hat_lb(&q, th, &model.env), c.r_hat_prev, epsilon = 1e-12);
        assert_abs_diff_eq!(c.r_hat_prev, r_hat(&model, &q, &w, th).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn distance_slope_matches_finite_differences() {
        let model = lb_model();
        let w = Point::zeros();
        let q = Point::new(70.0, 0.0, 50.0);
        let th = 30.0;
        let c = LinkCoefficients::at_anchor(&model, &q, &w, th).unwrap();
        let y0 = q.norm_squared();
        let f = |y: f64| model.se_los_sq(y) / x_los(th, &model.env) + model.se_nlos_sq(y) / x_nlos(th, &model.env);
        let h = 1e-3 * y0;
        let fd = (f(y0 + h) - f(y0 - h)) / (2.0 * h);
        assert!(((-c.chi) - fd).abs() <= 1e-6 * fd.abs(), "{} vs {fd}", -c.chi);
    }

    #[test]
    fn zero_gain_points_have_zero_weight() {
        let env = EnvParams::reference();
        let model = SeModel::lower_bound(&build_grids(1, 1, 1, &env).unwrap(), &env);
        let c = LinkCoefficients::at_anchor(&model, &Point::new(0.0, 0.0, 50.0), &Point::zeros(), 60.0).unwrap();
        assert_eq!((c.psi_los, c.psi_nlos, c.chi), (0.0, 0.0, 0.0));
    }

    #[test]
    fn linearized_bound_is_global_and_concave() {
        let model = lb_model();
        let env = model.env;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = Point::new(0.0, 0.0, 0.0);
        for _ in 0..200 {
            let q0 = Point::new(rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0), rng.random_range(10.0..200.0));
            let th0 = rng.random_range(0.0..90.0);
            let c = LinkCoefficients::at_anchor(&model, &q0, &w, th0).unwrap();
            let sample = |rng: &mut ChaCha8Rng| {
                (
                    Point::new(rng.random_range(-300.0..300.0), rng.random_range(-300.0..300.0), rng.random_range(10.0..200.0)),
                    rng.random_range(0.0..90.0),
                )
            };
            for _ in 0..5 {
                let (q, th) = sample(&mut rng);
                assert!(c.r_hat_lb(&q, th, &env) <= r_hat(&model, &q, &w, th).unwrap() + 1e-9);
                let (q2, th2) = sample(&mut rng);
                let mid = c.r_hat_lb(&((q + q2) * 0.5), 0.5 * (th + th2), &env);
                assert!(mid >= 0.5 * (c.r_hat_lb(&q, th, &env) + c.r_hat_lb(&q2, th2, &env)) - 1e-9);
            }
        }
    }
}
