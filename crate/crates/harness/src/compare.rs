//! BLiN against k-mode BLiN-MOS on `g_p` under common seeds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use narrowing::objectives::gp_profile;
use narrowing::stats::median;
use narrowing::trace::RunTrace;

use crate::config::{Algo, ExperimentConfig, ResolvedConfig};
use crate::error::{HarnessError, Result};
use crate::output::{self, fmt_num};
use crate::runner::{execute, Artifacts, RunRecord};

pub const MIN_SEEDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Winner {
    Blin,
    BlinMos,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub p: f64,
    pub zooming_dim: f64,
    pub scattering_dim: f64,
    /// `d_z`, `d_s`, or `equal`.
    pub larger_dim: String,
    pub k: f64,
    pub blin_regret: Vec<f64>,
    pub mos_regret: Vec<f64>,
    pub blin_median: f64,
    pub mos_median: f64,
    pub winner: Winner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub budget: u64,
    pub dim: usize,
    pub seeds: Vec<u64>,
    pub blin_config: Vec<ResolvedConfig>,
    pub mos_config: Vec<ResolvedConfig>,
    pub entries: Vec<ComparisonEntry>,
}

impl ComparisonReport {
    pub fn entry(&self, p: f64) -> Option<&ComparisonEntry> {
        self.entries.iter().find(|e| e.p == p)
    }
}

pub fn winner(blin: f64, mos: f64) -> Winner {
    if mos < blin {
        Winner::BlinMos
    } else if blin < mos {
        Winner::Blin
    } else {
        Winner::Tie
    }
}

fn regrets(records: &[RunRecord]) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            if !r.complete {
                return Err(HarnessError::Incomplete {
                    run_id: r.run_id.clone(),
                    message: r.error.clone().unwrap_or_default(),
                });
            }
            r.trace
                .summary
                .simple_regret
                .ok_or_else(|| HarnessError::Config("objective has no known optimum".into()))
        })
        .collect()
}

/// Runs behind a comparison, tagged `p<p>/<algo>/s<seed>`.
pub type TaggedTraces = Vec<(String, RunTrace)>;

/// BLiN (ACE schedule, center arms) against k-mode BLiN-MOS (default `k`,
/// `eps = 1/T^2`, geometric schedule) on `g_p` in dimension `dim`.
pub fn run_comparison(
    budget: u64,
    dim: usize,
    p_list: &[f64],
    seeds: &[u64],
    out: &Path,
) -> Result<(ComparisonReport, TaggedTraces)> {
    if seeds.len() < MIN_SEEDS {
        return Err(HarnessError::TooFewSeeds {
            needed: MIN_SEEDS,
            got: seeds.len(),
        });
    }
    let mut report = ComparisonReport {
        budget,
        dim,
        seeds: seeds.to_vec(),
        blin_config: Vec::new(),
        mos_config: Vec::new(),
        entries: Vec::new(),
    };
    let mut traces = Vec::new();
    for &p in p_list {
        let base = ExperimentConfig {
            objective: Some("gp".into()),
            dim: Some(dim),
            p: Some(p),
            budget: Some(budget),
            seeds: Some(seeds.to_vec()),
            out: Some(out.to_path_buf()),
            ..Default::default()
        };
        let blin_cfg = ExperimentConfig {
            algo: Some(Algo::Blin),
            ..base.clone()
        }
        .resolve()?;
        let mos_cfg = ExperimentConfig {
            algo: Some(Algo::BlinMosK),
            ..base
        }
        .resolve()?;
        log::info!("comparing at p = {p}");
        let blin = execute(&blin_cfg)?;
        let mos = execute(&mos_cfg)?;
        let blin_regret = regrets(&blin)?;
        let mos_regret = regrets(&mos)?;
        let profile = gp_profile(dim, p)?;
        let (dz, ds) = (profile.zooming_dim, profile.scattering_dim);
        let blin_median = median(&blin_regret);
        let mos_median = median(&mos_regret);
        report.entries.push(ComparisonEntry {
            p,
            zooming_dim: dz,
            scattering_dim: ds,
            larger_dim: if dz > ds {
                "d_z"
            } else if ds > dz {
                "d_s"
            } else {
                "equal"
            }
            .into(),
            k: mos_cfg.k.unwrap_or(f64::NAN),
            blin_regret,
            mos_regret,
            blin_median,
            mos_median,
            winner: winner(blin_median, mos_median),
        });
        for (algo, records) in [("blin", blin), ("blin-mos-k", mos)] {
            for r in records {
                traces.push((format!("p{p}/{algo}/{}", r.run_id), r.trace));
            }
        }
        report.blin_config.push(blin_cfg);
        report.mos_config.push(mos_cfg);
    }
    Ok((report, traces))
}

pub fn reproduce_gp_experiment(
    budget: u64,
    dim: usize,
    p_list: &[f64],
    seeds: &[u64],
) -> Result<ComparisonReport> {
    run_comparison(budget, dim, p_list, seeds, Path::new("out")).map(|(r, _)| r)
}

/// `compare` subcommand: writes per-seed regrets, medians, traces and plot scripts.
pub fn cli_compare(
    budget: u64,
    dim: usize,
    p_list: &[f64],
    seeds: &[u64],
    out: &Path,
) -> Result<(ComparisonReport, Artifacts)> {
    let (report, traces) = run_comparison(budget, dim, p_list, seeds, out)?;
    let paths = Artifacts::under(out, "compare");

    let mut per_seed = Vec::new();
    let mut medians = Vec::new();
    for e in &report.entries {
        for (algo, regrets) in [("blin", &e.blin_regret), ("blin-mos-k", &e.mos_regret)] {
            for (seed, r) in report.seeds.iter().zip(regrets) {
                per_seed.push(vec![
                    fmt_num(e.p),
                    algo.into(),
                    seed.to_string(),
                    fmt_num(*r),
                ]);
            }
        }
        medians.push(vec![fmt_num(e.p), "blin".into(), fmt_num(e.blin_median)]);
        medians.push(vec![
            fmt_num(e.p),
            "blin-mos-k".into(),
            fmt_num(e.mos_median),
        ]);
    }
    output::write_atomic(
        &paths.csv,
        &output::table_csv(&["p", "algo", "seed", "simple_regret"], &per_seed)?,
    )?;
    output::write_atomic(
        &out.join("compare_medians.csv"),
        &output::table_csv(&["p", "algo", "median_simple_regret"], &medians)?,
    )?;
    output::write_atomic(
        &out.join("compare_traces.csv"),
        &output::trace_csv(traces.iter().map(|(id, t)| (id.as_str(), t)))?,
    )?;
    output::write_atomic(&paths.summary, &output::json_bytes(&report)?)?;
    let ids: Vec<String> = traces.iter().map(|(id, _)| id.clone()).collect();
    let trace_plot = output::trace_plot_script(
        "compare_traces.csv",
        &ids,
        &format!("simple regret vs pulls, d={dim}, T={budget}"),
    );
    output::write_atomic(&out.join("compare_traces.gp"), trace_plot.as_bytes())?;
    let median_plot = format!(
        "set datafile separator ','\n\
         set logscale y\n\
         set xlabel 'p'\n\
         set ylabel 'median simple regret'\n\
         set title 'd={dim}, T={budget}, {} seeds'\n\
         plot 'compare_medians.csv' using 1:(strcol(2) eq 'blin' ? $3 : 1/0) skip 1 with linespoints title 'BLiN', \\\n     \
         'compare_medians.csv' using 1:(strcol(2) eq 'blin-mos-k' ? $3 : 1/0) skip 1 with linespoints title 'BLiN-MOS'\n",
        report.seeds.len()
    );
    output::write_atomic(&paths.plot, median_plot.as_bytes())?;
    Ok((report, paths))
}
