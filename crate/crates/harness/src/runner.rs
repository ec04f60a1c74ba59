//! Single runs, seed fan-out, and rate sweeps.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use narrowing::blin::{run_blin, BlinConfig, BlinError};
use narrowing::blin_mos::{run_blin_mos, MosConfig, MosMode};
use narrowing::objectives::Objective;
use narrowing::random_search::{
    default_omega, rs_noisy_rate_check, rs_rate_sweep, run_random_search,
};
use narrowing::rates::{self, RateReport};
use narrowing::rng::RandomSource;
use narrowing::schedule::{make_schedule, EdgeLengthSchedule, ScheduleKind, ScheduleSpec};
use narrowing::stats::median;
use narrowing::trace::{RunSummary, RunTrace};

use crate::config::{Algo, ResolvedConfig};
use crate::error::{HarnessError, Result};
use crate::output::{self, fmt_num};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub seed: u64,
    pub budget: u64,
    /// False when the schedule ran out before the budget forecast fired.
    pub complete: bool,
    pub error: Option<String>,
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
    pub trace: RunTrace,
}

pub fn run_id(seed: u64) -> String {
    format!("s{seed}")
}

fn profile_of(obj: &dyn Objective) -> Result<&narrowing::objectives::DimensionProfile> {
    obj.profile()
        .ok_or_else(|| HarnessError::Config(format!("{} has no dimension profile", obj.name())))
}

/// The schedule for one run at budget `t`.
pub fn build_schedule(
    cfg: &ResolvedConfig,
    obj: &dyn Objective,
    t: u64,
    k: Option<f64>,
) -> Result<EdgeLengthSchedule> {
    if cfg.schedule == ScheduleKind::Geometric {
        return Ok(EdgeLengthSchedule::geometric());
    }
    let profile = profile_of(obj)?;
    let mut spec = ScheduleSpec::new(cfg.schedule, t, obj.dim(), profile.zooming_dim)
        .scattering_dim(profile.scattering_dim)
        .allow_geometric_fallback(true);
    if cfg.schedule == ScheduleKind::AceMosK {
        let k = k.ok_or_else(|| HarnessError::Config("schedule ace-mos-k needs k".into()))?;
        spec = spec.k(k);
    }
    Ok(make_schedule(&spec)?)
}

/// One algorithm run at budget `t` with seed `seed`.
pub fn run_one(cfg: &ResolvedConfig, obj: &dyn Objective, t: u64, seed: u64) -> Result<RunRecord> {
    let source = RandomSource::new(seed);
    let noise = cfg.noise_model()?;
    let id = run_id(seed);
    let done = |trace: RunTrace, epsilon, k| RunRecord {
        run_id: id.clone(),
        seed,
        budget: t,
        complete: true,
        error: None,
        epsilon,
        k,
        trace,
    };
    match cfg.algo {
        Algo::Rs | Algo::RsNoisy => {
            let r = run_random_search(obj, t, &noise, &source)?;
            Ok(done(r.to_trace(obj), None, None))
        }
        Algo::Blin => {
            let schedule = build_schedule(cfg, obj, t, None)?;
            let blin = BlinConfig {
                budget: t,
                lipschitz: cfg.lipschitz,
                arm_rule: cfg.arm_rule,
                max_batches: cfg.max_batches,
            };
            match run_blin(obj, &blin, &schedule, &source) {
                Ok(run) => Ok(done(run.trace, None, None)),
                Err(BlinError::Invalid(e)) => Err(e.into()),
                Err(e @ BlinError::ScheduleTooShort { .. }) => {
                    let message = e.to_string();
                    let BlinError::ScheduleTooShort { partial, .. } = e else {
                        unreachable!()
                    };
                    Ok(RunRecord {
                        complete: false,
                        error: Some(message),
                        ..done(partial.trace, None, None)
                    })
                }
            }
        }
        Algo::BlinMos | Algo::BlinMosK => {
            let profile = profile_of(obj)?;
            let k = match cfg.algo {
                Algo::BlinMosK => Some(cfg.k_for(obj, t)?),
                _ => None,
            };
            let schedule = build_schedule(cfg, obj, t, k)?;
            let mos = MosConfig {
                mode: if k.is_some() {
                    MosMode::NoiselessK
                } else {
                    MosMode::Noisy
                },
                epsilon: cfg.epsilon_for(t),
                kappa_s: profile.scattering_const,
                d_s: profile.scattering_dim,
                kappa_p: cfg.kappa_p,
                k,
                lipschitz: cfg.lipschitz,
                max_batches: cfg.max_batches,
                forecast_factor: cfg.forecast_factor,
                noisy_constant: cfg.noisy_constant,
            };
            let run = run_blin_mos(obj, t, &mos, &schedule, &noise, &source)?;
            Ok(done(run.trace, Some(run.epsilon), k))
        }
    }
}

/// All seeds of `cfg` at its budget, in seed order.
pub fn execute(cfg: &ResolvedConfig) -> Result<Vec<RunRecord>> {
    let obj = cfg.objective()?;
    log::info!(
        "running {} on {} with T = {} over {} seeds",
        cfg.algo,
        obj.name(),
        cfg.budget,
        cfg.seeds.len()
    );
    cfg.seeds
        .par_iter()
        .map(|&s| run_one(cfg, obj.as_ref(), cfg.budget, s))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub run_id: String,
    pub seed: u64,
    pub budget: u64,
    pub complete: bool,
    pub error: Option<String>,
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
    pub notes: Vec<String>,
    pub summary: RunSummary,
}

/// Contents of `<stem>.summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ResolvedConfig,
    pub runs: Vec<RunEntry>,
    /// Median of `f* - Y^max` across runs, when `f*` is known.
    pub median_simple_regret: Option<f64>,
}

impl RunReport {
    pub fn new(config: &ResolvedConfig, records: &[RunRecord]) -> Self {
        let regrets: Option<Vec<f64>> = records
            .iter()
            .map(|r| r.trace.summary.simple_regret)
            .collect();
        RunReport {
            config: config.clone(),
            runs: records
                .iter()
                .map(|r| RunEntry {
                    run_id: r.run_id.clone(),
                    seed: r.seed,
                    budget: r.budget,
                    complete: r.complete,
                    error: r.error.clone(),
                    epsilon: r.epsilon,
                    k: r.k,
                    notes: r.trace.notes.clone(),
                    summary: r.trace.summary.clone(),
                })
                .collect(),
            median_simple_regret: regrets.filter(|v| !v.is_empty()).map(|v| median(&v)),
        }
    }
}

/// Paths written by [`write_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

impl Artifacts {
    pub fn under(dir: &std::path::Path, stem: &str) -> Self {
        Artifacts {
            csv: dir.join(format!("{stem}.csv")),
            summary: dir.join(format!("{stem}.summary.json")),
            plot: dir.join(format!("{stem}.gp")),
        }
    }
}

/// Write trace CSV, summary JSON and plot script. Incomplete runs are
/// written under `.partial` names and reported as an error.
pub fn write_run(cfg: &ResolvedConfig, records: &[RunRecord], stem: &str) -> Result<Artifacts> {
    let paths = Artifacts::under(&cfg.out, stem);
    let csv = output::trace_csv(records.iter().map(|r| (r.run_id.as_str(), &r.trace)))?;
    let json = output::json_bytes(&RunReport::new(cfg, records))?;
    let csv_name = paths
        .csv
        .file_name()
        .unwrap()
        .to_string_lossy()
        .into_owned();
    let ids: Vec<String> = records.iter().map(|r| r.run_id.clone()).collect();
    let plot =
        output::trace_plot_script(&csv_name, &ids, &format!("{} T={}", cfg.algo, cfg.budget));
    if let Some(bad) = records.iter().find(|r| !r.complete) {
        output::write_partial(&paths.csv, &csv)?;
        output::write_partial(&paths.summary, &json)?;
        output::write_partial(&paths.plot, plot.as_bytes())?;
        return Err(HarnessError::Incomplete {
            run_id: bad.run_id.clone(),
            message: bad.error.clone().unwrap_or_default(),
        });
    }
    output::write_atomic(&paths.csv, &csv)?;
    output::write_atomic(&paths.summary, &json)?;
    output::write_atomic(&paths.plot, plot.as_bytes())?;
    Ok(paths)
}

/// `run` subcommand: execute and write.
pub fn cli_run(cfg: &ResolvedConfig) -> Result<Artifacts> {
    let records = execute(cfg)?;
    write_run(cfg, &records, "run")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: ResolvedConfig,
    /// Which gap is regressed.
    pub metric: String,
    pub report: RateReport,
    pub pass: bool,
    pub within_band: bool,
    /// `k` used at each budget, for the k-mode.
    pub ks: Option<Vec<f64>>,
}

/// Regress the algorithm's headline gap over `cfg.budgets`.
pub fn sweep(cfg: &ResolvedConfig) -> Result<SweepReport> {
    if cfg.budgets.len() < 3 {
        return Err(narrowing::error::Error::GridTooSmall {
            needed: 3,
            got: cfg.budgets.len(),
        }
        .into());
    }
    let obj = cfg.objective()?;
    let obj = obj.as_ref();
    let profile = profile_of(obj)?;
    let gap = |metric: fn(&RunSummary) -> Option<f64>| {
        move |t: u64, seed: u64| -> narrowing::error::Result<f64> {
            let rec = run_one(cfg, obj, t, seed).map_err(|e| match e {
                HarnessError::Core(e) => e,
                other => narrowing::error::Error::Schedule(other.to_string()),
            })?;
            if !rec.complete {
                return Err(narrowing::error::Error::Schedule(
                    rec.error.unwrap_or_default(),
                ));
            }
            metric(&rec.trace.summary).ok_or(narrowing::error::Error::MissingProfile)
        }
    };
    let (metric, report) = match cfg.algo {
        Algo::Rs => ("f* - Y_max", rs_rate_sweep(obj, &cfg.budgets, &cfg.seeds)?),
        Algo::RsNoisy => (
            "f* + b - Y_max",
            rs_noisy_rate_check(
                obj,
                &cfg.noise_model()?,
                &cfg.budgets,
                default_omega,
                &cfg.seeds,
            )?,
        ),
        Algo::Blin => (
            "f* - Y_max",
            rates::sweep(
                &cfg.budgets,
                &cfg.seeds,
                -1.0 / profile.zooming_dim,
                gap(|s| s.simple_regret),
            )?,
        ),
        Algo::BlinMos => {
            let dz = profile.zooming_dim;
            (
                "cumulative regret",
                rates::sweep(
                    &cfg.budgets,
                    &cfg.seeds,
                    dz / (dz + 1.0),
                    gap(|s| s.cum_regret),
                )?,
            )
        }
        Algo::BlinMosK => (
            "f* - Y_max",
            rates::sweep(
                &cfg.budgets,
                &cfg.seeds,
                -1.0 / profile.scattering_dim,
                gap(|s| s.simple_regret),
            )?,
        ),
    };
    let ks = match cfg.algo {
        Algo::BlinMosK => Some(
            cfg.budgets
                .iter()
                .map(|&t| cfg.k_for(obj, t))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    Ok(SweepReport {
        config: cfg.clone(),
        metric: metric.into(),
        pass: report.pass(),
        within_band: report.within_band(),
        report,
        ks,
    })
}

/// `sweep` subcommand: regress and write `sweep.csv`, `sweep.summary.json`, `sweep.gp`.
pub fn cli_sweep(cfg: &ResolvedConfig) -> Result<(SweepReport, Artifacts)> {
    let rep = sweep(cfg)?;
    let paths = Artifacts::under(&cfg.out, "sweep");
    let r = &rep.report;
    let rows: Vec<Vec<String>> = r
        .budgets
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            vec![
                t.to_string(),
                fmt_num(r.medians[i]),
                r.scaled_medians
                    .as_ref()
                    .map(|s| fmt_num(s[i]))
                    .unwrap_or_default(),
            ]
        })
        .collect();
    let csv = output::table_csv(&["budget", "median", "scaled_median"], &rows)?;
    output::write_atomic(&paths.csv, &csv)?;
    output::write_atomic(&paths.summary, &output::json_bytes(&rep)?)?;
    let plot = output::sweep_plot_script(
        "sweep.csv",
        &format!("{} {}", cfg.algo, rep.metric),
        r.slope,
        r.intercept,
    );
    output::write_atomic(&paths.plot, plot.as_bytes())?;
    Ok((rep, paths))
}
