//! JSON run configuration. Environment powers and gains are given in dB and
//! converted to linear units once, when the environment is built.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{MarginConfig, Scheme, SchemeConfig};
use crate::error::{PlanError, Result};
use crate::model::{db_to_linear, dbm_to_watts, EnvParams, Point, Scenario};
use crate::optimizer::PenaltyConfig;
use crate::stats::GridSizes;
use crate::validation::McConfig;

/// Mission geometry with positions as `[x, y, z]` in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub gns: Vec<[f64; 3]>,
    pub q_start: [f64; 3],
    pub q_end: [f64; 3],
    pub h_min: f64,
    pub h_max: f64,
    pub v_max: f64,
    pub v_z: f64,
    pub n_slots: usize,
    pub delta_max: f64,
    pub delta_min: f64,
}

fn arr(p: &Point) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn pt(a: &[f64; 3]) -> Point {
    Point::new(a[0], a[1], a[2])
}

impl From<&Scenario> for ScenarioConfig {
    fn from(s: &Scenario) -> Self {
        ScenarioConfig {
            gns: s.gns.iter().map(arr).collect(),
            q_start: arr(&s.q_start),
            q_end: arr(&s.q_end),
            h_min: s.h_min,
            h_max: s.h_max,
            v_max: s.v_max,
            v_z: s.v_z,
            n_slots: s.n_slots,
            delta_max: s.delta_max,
            delta_min: s.delta_min,
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        (&Scenario::desk()).into()
    }
}

impl ScenarioConfig {
    pub fn build(&self) -> Scenario {
        Scenario {
            gns: self.gns.iter().map(pt).collect(),
            q_start: pt(&self.q_start),
            q_end: pt(&self.q_end),
            h_min: self.h_min,
            h_max: self.h_max,
            v_max: self.v_max,
            v_z: self.v_z,
            n_slots: self.n_slots,
            delta_max: self.delta_max,
            delta_min: self.delta_min,
        }
    }
}

/// Channel environment in the units of the reference parameter table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub a1: f64,
    pub a2: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub beta_los_db: f64,
    pub beta_nlos_db: f64,
    pub p_tx_dbm: f64,
    pub noise_dbm: f64,
    pub k_rician_db: f64,
    pub sigma_db: f64,
    pub r_min: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            a1: 12.08,
            a2: 0.114,
            alpha_los: 2.0,
            alpha_nlos: 2.7,
            beta_los_db: -30.0,
            beta_nlos_db: -40.0,
            p_tx_dbm: 30.0,
            noise_dbm: -70.0,
            k_rician_db: 15.0,
            sigma_db: 10.0,
            r_min: 2.4,
        }
    }
}

impl EnvConfig {
    pub fn build(&self) -> EnvParams {
        EnvParams {
            a1: self.a1,
            a2: self.a2,
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            beta_los: db_to_linear(self.beta_los_db),
            beta_nlos: db_to_linear(self.beta_nlos_db),
            p_tx: dbm_to_watts(self.p_tx_dbm),
            noise: dbm_to_watts(self.noise_dbm),
            k_rician: db_to_linear(self.k_rician_db),
            sigma_db: self.sigma_db,
            r_min: self.r_min,
        }
    }
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub environment: EnvConfig,
    pub quadrature: GridSizes,
    pub penalty: PenaltyConfig,
    pub validation: McConfig,
    pub margin: MarginConfig,
    pub scheme: Scheme,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: ScenarioConfig::default(),
            environment: EnvConfig::default(),
            quadrature: GridSizes::default(),
            penalty: PenaltyConfig::default(),
            validation: McConfig::default(),
            margin: MarginConfig::default(),
            scheme: Scheme::Proposed,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Named overrides applied on top of a loaded configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// 40 slots of at most 4 s, 20-point grids, 5000 realizations.
    Ci,
}

impl std::str::FromStr for Profile {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Profile::Ci),
            _ => Err(PlanError::Config(format!("unknown profile '{s}' (use ci)"))),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| PlanError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario().validate()?;
        self.env().validate()?;
        if self.quadrature.u_l == 0 || self.quadrature.u_n == 0 || self.quadrature.u_nu == 0 {
            return Err(PlanError::Config(format!(
                "quadrature sizes must be at least 1 (got {:?})",
                self.quadrature
            )));
        }
        self.penalty.validate()?;
        self.margin.validate()?;
        if self.validation.n_realizations < 2 {
            return Err(PlanError::Config("validation.n_realizations must be at least 2".into()));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario.build()
    }

    pub fn env(&self) -> EnvParams {
        self.environment.build()
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        SchemeConfig {
            penalty: self.penalty,
            grid: self.quadrature,
            mc: self.validation,
            margin: self.margin,
        }
    }

    pub fn apply_profile(&mut self, profile: Profile) {
        match profile {
            Profile::Ci => {
                let ci = Scenario::ci();
                self.scenario.n_slots = ci.n_slots;
                self.scenario.delta_max = ci.delta_max;
                self.quadrature = GridSizes::uniform(20);
                self.validation.n_realizations = 5000;
            }
        }
    }
}

/// Reads, parses and checks a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| PlanError::io(path, e))?;
    RunConfig::from_json(&text).map_err(|e| match e {
        PlanError::Config(msg) => PlanError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_reference_values() {
        let cfg = RunConfig::from_json("{}").unwrap();
        let env = cfg.env();
        assert_eq!(env.p_tx, 1.0);
        assert!((env.noise - 1e-10).abs() < 1e-25);
        assert!((env.k_rician - 31.622776601683793).abs() < 1e-12);
        assert_eq!(cfg.quadrature, GridSizes { u_l: 40, u_n: 40, u_nu: 40 });
        assert_eq!(cfg.validation.n_realizations, 30_000);
        assert_eq!(cfg.scenario(), Scenario::desk());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let e = RunConfig::from_json(r#"{"environment": {"k_factor": 3}}"#).unwrap_err();
        assert!(e.to_string().contains("k_factor"), "{e}");
    }

    #[test]
    fn invariant_violation_names_the_field() {
        let e = RunConfig::from_json(r#"{"environment": {"alpha_los": 3.0, "alpha_nlos": 2.7}}"#).unwrap_err();
        assert!(e.to_string().contains("alpha_los"), "{e}");
    }

    #[test]
    fn parse_error_reports_position() {
        let e = RunConfig::from_json("{\n  \"scheme\": \"ac\",\n  \"penalty\": {\"eta0\": }\n}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn json_round_trip_is_idempotent() {
        let mut cfg = RunConfig::default();
        cfg.apply_profile(Profile::Ci);
        cfg.scheme = Scheme::FixedTraj;
        let text = cfg.to_json();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn ci_profile() {
        let mut cfg = RunConfig::default();
        cfg.apply_profile(Profile::Ci);
        assert_eq!(cfg.scenario(), Scenario::ci());
        assert_eq!(cfg.quadrature, GridSizes::uniform(20));
        assert_eq!(cfg.validation.n_realizations, 5000);
        assert!("nightly".parse::<Profile>().is_err());
    }
}
