//! Command-line front end.
//!
//! Exit status: 0 on success, 2 when the mission is infeasible or a plan
//! fails validation, 1 on any other error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::baselines::{run_scheme, BaselineResult, Scheme};
use crate::config::{load_config, Profile, RunConfig};
use crate::error::{PlanError, Result};
use crate::montecarlo::configure_threads_from_env;
use crate::output::{
    create_dir, lower_bound_model, overestimation_csv, read_json, sweep_csv, write_file, write_json, write_results,
    PlanFile, SchemeSummary, Summary, Timing,
};
use crate::validation::{monte_carlo_validate, overestimation_report, run_sweep, SweepParam};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "uav-planner", version, about = "Plan UAV trajectories, TDMA schedules and slot lengths that meet expected-rate targets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the Monte Carlo seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Named override set (`ci`: 40 slots, 20-point grids, 5000 realizations).
    #[arg(long)]
    profile: Option<Profile>,
    /// Overrides the output directory of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan one scheme and certify it by Monte Carlo.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scheme: Option<Scheme>,
    },
    /// Re-validate a saved plan (a directory holding plan.json).
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Sweep one parameter over a list of values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// v_max (m/s), k_rician (dB) or r_min (bps/Hz).
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "proposed")]
        schemes: Vec<Scheme>,
    },
    /// Run all five schemes and the overestimation report.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

fn prepare(common: &Common) -> Result<RunConfig> {
    let mut cfg = load_config(&common.config)?;
    if let Some(p) = common.profile {
        cfg.apply_profile(p);
    }
    if let Some(seed) = common.seed {
        cfg.validation.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn timing(start: Instant) -> Timing {
    Timing {
        timestamp_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64()),
        runtime_s: start.elapsed().as_secs_f64(),
    }
}

fn report(r: &BaselineResult) {
    let verdicts: Vec<String> = r
        .mc
        .mean
        .iter()
        .zip(&r.mc.stderr)
        .map(|(m, e)| format!("{m:.4}+-{e:.4}"))
        .collect();
    println!(
        "{}: T = {:.4} s, converged = {}, feasible = {}, margin = {}, MC rates = [{}]",
        r.scheme,
        r.completion_time,
        r.converged,
        r.is_feasible(),
        r.margin_used,
        verdicts.join(", ")
    );
    if let Some(f) = &r.failure {
        println!("{}: {f}", r.scheme);
    }
}

fn summary(cfg: &RunConfig, schemes: Vec<SchemeSummary>, start: Instant) -> Summary {
    Summary {
        schemes,
        seed: cfg.validation.seed,
        config: cfg.clone(),
        timing: timing(start),
    }
}

fn solve(common: &Common, scheme: Option<Scheme>) -> Result<i32> {
    let start = Instant::now();
    let mut cfg = prepare(common)?;
    if let Some(s) = scheme {
        cfg.scheme = s;
    }
    let (scenario, env) = (cfg.scenario(), cfg.env());
    let result = run_scheme(cfg.scheme, &scenario, &env, &cfg.scheme_config())?;
    let out = &cfg.output_dir;
    write_results(out, &result, &scenario, &lower_bound_model(&cfg, &env)?)?;
    write_json(&out.join("summary.json"), &summary(&cfg, vec![(&result).into()], start))?;
    report(&result);
    Ok(if result.is_feasible() { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn validate(common: &Common, plan_dir: &Path) -> Result<i32> {
    let cfg = prepare(common)?;
    let file: PlanFile = read_json(&plan_dir.join("plan.json"))?;
    let scenario = file.scenario.build();
    let env = cfg.env();
    let model = lower_bound_model(&cfg, &env)?;
    let mc = monte_carlo_validate(&file.plan, &scenario, &env, &model, &cfg.validation)?;
    create_dir(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("mc_report.json"), &mc)?;
    for (k, ((m, e), ok)) in mc.mean.iter().zip(&mc.stderr).zip(&mc.feasible).enumerate() {
        println!("GN {k}: {m:.6} +- {e:.6} bps/Hz, {}", if *ok { "meets" } else { "misses" });
    }
    Ok(if mc.all_feasible() { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn sweep(common: &Common, param: SweepParam, values: &[f64], schemes: &[Scheme]) -> Result<i32> {
    let cfg = prepare(common)?;
    let result = run_sweep(&cfg.scenario(), &cfg.env(), param, values, schemes, &cfg.scheme_config())?;
    create_dir(&cfg.output_dir)?;
    write_file(&cfg.output_dir.join("sweep.csv"), &sweep_csv(&result))?;
    write_json(&cfg.output_dir.join("sweep.json"), &result)?;
    for r in &result.records {
        match (&r.completion_time, &r.error) {
            (Some(t), _) => println!("{} {} = {}: T = {t:.4} s, feasible = {}", r.scheme, param.name(), r.value, r.feasible),
            (None, e) => println!("{} {} = {}: {}", r.scheme, param.name(), r.value, e.as_deref().unwrap_or("failed")),
        }
    }
    for t in &result.trends {
        println!("{}: monotone trend = {}, all values feasible = {}", t.scheme, t.monotone, t.complete);
    }
    Ok(EXIT_OK)
}

fn compare(common: &Common) -> Result<i32> {
    let start = Instant::now();
    let cfg = prepare(common)?;
    let (scenario, env, scheme_cfg) = (cfg.scenario(), cfg.env(), cfg.scheme_config());
    let results: Vec<Result<BaselineResult>> = Scheme::ALL
        .par_iter()
        .map(|s| run_scheme(*s, &scenario, &env, &scheme_cfg))
        .collect();
    let out = &cfg.output_dir;
    let model = lower_bound_model(&cfg, &env)?;
    let mut done = Vec::new();
    let mut records = Vec::new();
    for (scheme, r) in Scheme::ALL.iter().zip(results) {
        match r {
            Ok(r) => {
                write_results(&out.join(scheme.name()), &r, &scenario, &model)?;
                report(&r);
                records.push((&r).into());
                done.push(r);
            }
            Err(e) => {
                println!("{scheme}: {e}");
                records.push(SchemeSummary::failed(*scheme, &e));
            }
        }
    }
    let points = overestimation_report(&done, &scenario, &env, &cfg.validation)?;
    write_file(&out.join("overestimation.csv"), &overestimation_csv(&points))?;
    write_json(&out.join("summary.json"), &summary(&cfg, records, start))?;
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve { common, scheme } => solve(&common, scheme),
        Command::Validate { common, plan } => validate(&common, &plan),
        Command::Sweep {
            common,
            param,
            values,
            schemes,
        } => sweep(&common, param, &values, &schemes),
        Command::Compare { common } => compare(&common),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    configure_threads_from_env();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e @ PlanError::Infeasible(_)) => {
            eprintln!("error: {e}");
            EXIT_INFEASIBLE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
