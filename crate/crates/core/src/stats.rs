//! Distribution machinery for the three channel randomness sources and the
//! CDF-domain quadrature grids built from them.
//!
//! - LoS fading power |g^L|^2: `2(K+1)|g^L|^2` is noncentral chi-square with
//!   2 degrees of freedom and noncentrality `2K`.
//! - NLoS fading power |g^N|^2: unit-mean exponential.
//! - Shadowing: bias-corrected log-normal with unit mean.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{PlanError, Result};
use crate::model::{shadow_bias_db, EnvParams};

fn check_unit_open(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(PlanError::domain(format!("probability {p} outside (0, 1)")))
    }
}

fn check_unit_half_open(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(PlanError::domain(format!("probability {p} outside [0, 1)")))
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of the standard normal CDF.
///
/// Rational approximation (Acklam) followed by one Halley step against the
/// erfc-based CDF.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    check_unit_open(p)?;
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement
    let e = std_normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// Quantile of the unit-mean exponential law, `-ln(1 - p)`.
pub fn exp_unit_quantile(p: f64) -> Result<f64> {
    check_unit_half_open(p)?;
    Ok(-(-p).ln_1p())
}

/// Quantile of the unit-mean log-normal shadowing gain with deviation `sigma_db`.
pub fn lognormal_shadow_quantile(p: f64, sigma_db: f64) -> Result<f64> {
    check_unit_half_open(p)?;
    if !(sigma_db >= 0.0) {
        return Err(PlanError::domain(format!("sigma_db {sigma_db} must be non-negative")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let z = std_normal_quantile(p)?;
    Ok(10f64.powf((sigma_db * z - shadow_bias_db(sigma_db)) / 10.0))
}

const MIXTURE_TERM_FLOOR: f64 = 1e-17;

/// CDF of the Rician fading power |g^L|^2 with K-factor `k`.
///
/// Equals `1 - Q1(sqrt(2k), sqrt(2(k+1)x))`, evaluated as a Poisson mixture of
/// regularised lower incomplete gamma functions centred at the Poisson mode.
pub fn rician_power_cdf(x: f64, k: f64) -> Result<f64> {
    if !(x >= 0.0) || !(k >= 0.0) {
        return Err(PlanError::domain(format!("rician_power_cdf needs x >= 0 and k >= 0 (x = {x}, k = {k})")));
    }
    if k.is_infinite() {
        return Ok(if x < 1.0 { 0.0 } else { 1.0 });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let s = (k + 1.0) * x;
    if k == 0.0 {
        return Ok(-(-s).exp_m1());
    }

    let mode = k.floor();
    let ln_k = k.ln();
    let ln_s = s.ln();
    let poisson = |j: f64| (-k + j * ln_k - ln_gamma(j + 1.0)).exp();
    // gamma density term s^a e^{-s} / Gamma(a + 1)
    let gterm = |a: f64| (a * ln_s - s - ln_gamma(a + 1.0)).exp();

    let p_mode = gamma_lr(mode + 1.0, s);
    let mut total = poisson(mode) * p_mode;

    // upward: P(a + 1, s) = P(a, s) - s^a e^{-s} / Gamma(a + 1)
    let mut j = mode;
    let mut p = p_mode;
    loop {
        p = (p - gterm(j + 1.0)).max(0.0);
        j += 1.0;
        let w = poisson(j);
        total += w * p;
        if (j > k && w < MIXTURE_TERM_FLOOR) || p == 0.0 {
            break;
        }
    }

    // downward: P(a - 1, s) = P(a, s) + s^(a-1) e^{-s} / Gamma(a)
    let mut j = mode;
    let mut p = p_mode;
    while j > 0.0 {
        p = (p + gterm(j)).min(1.0);
        j -= 1.0;
        let w = poisson(j);
        total += w * p;
        if w < MIXTURE_TERM_FLOOR {
            break;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Inverse of [`rician_power_cdf`] by bracketing and bisection.
pub fn rician_power_quantile(p: f64, k: f64) -> Result<f64> {
    check_unit_half_open(p)?;
    if !(k >= 0.0) {
        return Err(PlanError::domain(format!("k-factor {k} must be non-negative")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if k.is_infinite() {
        return Ok(1.0);
    }
    if k == 0.0 {
        return exp_unit_quantile(p);
    }
    let mut hi = k + 1.0 + 40.0 * (2.0 * k + 1.0).sqrt() / (2.0 * (k + 1.0));
    let mut widenings = 0;
    while rician_power_cdf(hi, k)? < p {
        hi *= 2.0;
        widenings += 1;
        if widenings > 60 {
            return Err(PlanError::domain(format!("could not bracket quantile p = {p} for k = {k}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = rician_power_cdf(mid, k)?;
        if (c - p).abs() <= 1e-13 {
            return Ok(mid);
        }
        if c < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Left-endpoint quantile grids for the three randomness sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub gamma_los: Vec<f64>,
    pub gamma_nlos: Vec<f64>,
    pub gamma_shadow: Vec<f64>,
}

impl QuadratureGrid {
    pub fn u_l(&self) -> usize {
        self.gamma_los.len()
    }

    pub fn u_n(&self) -> usize {
        self.gamma_nlos.len()
    }

    pub fn u_nu(&self) -> usize {
        self.gamma_shadow.len()
    }
}

fn left_endpoints(count: usize, quantile: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    (0..count).map(|u| quantile(u as f64 / count as f64)).collect()
}

/// Grid sizes `(U_L, U_N, U_nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSizes {
    pub u_l: usize,
    pub u_n: usize,
    pub u_nu: usize,
}

impl Default for GridSizes {
    fn default() -> Self {
        GridSizes { u_l: 40, u_n: 40, u_nu: 40 }
    }
}

impl GridSizes {
    pub fn uniform(u: usize) -> Self {
        GridSizes { u_l: u, u_n: u, u_nu: u }
    }

    pub fn build(&self, env: &EnvParams) -> Result<QuadratureGrid> {
        build_grids(self.u_l, self.u_n, self.u_nu, env)
    }
}

/// Partitions each CDF range into equal-probability cells and maps every
/// cell's left endpoint back through the inverse CDF.
pub fn build_grids(u_l: usize, u_n: usize, u_nu: usize, env: &EnvParams) -> Result<QuadratureGrid> {
    if u_l == 0 || u_n == 0 || u_nu == 0 {
        return Err(PlanError::domain(format!(
            "grid sizes must be at least 1 (u_l = {u_l}, u_n = {u_n}, u_nu = {u_nu})"
        )));
    }
    Ok(QuadratureGrid {
        gamma_los: left_endpoints(u_l, |p| rician_power_quantile(p, env.k_rician))?,
        gamma_nlos: left_endpoints(u_n, exp_unit_quantile)?,
        gamma_shadow: left_endpoints(u_nu, |p| lognormal_shadow_quantile(p, env.sigma_db))?,
    })
}
