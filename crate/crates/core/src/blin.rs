//! Batched Lipschitz Narrowing on a noiseless oracle.
//!
//! Each batch evaluates one arm per active cube, drops cubes whose value
//! trails the batch maximum by more than `2 L r_m`, and splits the survivors
//! down to the next edge length. The run stops as soon as the next batch
//! would reach the budget.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cube::DyadicCube;
use crate::error::{invalid, Error, Result};
use crate::objectives::Objective;
use crate::rates::{self, RateReport};
use crate::rng::{Purpose, RandomSource};
use crate::schedule::{make_schedule, EdgeLengthSchedule, ScheduleKind, ScheduleSpec};
use crate::trace::{RowKind, RunSummary, RunTrace, Termination, TraceRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArmRule {
    /// Midpoint of the cube.
    #[default]
    Center,
    /// One uniform draw from the cube.
    UniformRandom,
}

impl std::str::FromStr for ArmRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center" => Ok(ArmRule::Center),
            "uniform-random" | "uniform" => Ok(ArmRule::UniformRandom),
            other => Err(invalid("arm_rule", format!("unknown arm rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlinConfig {
    pub budget: u64,
    pub lipschitz: f64,
    pub arm_rule: ArmRule,
    /// Optional cap `M` on the batch index.
    pub max_batches: Option<usize>,
}

impl BlinConfig {
    pub fn new(budget: u64, lipschitz: f64) -> Self {
        Self {
            budget,
            lipschitz,
            arm_rule: ArmRule::Center,
            max_batches: None,
        }
    }

    pub fn arm_rule(mut self, rule: ArmRule) -> Self {
        self.arm_rule = rule;
        self
    }
}

/// Active set of one evaluated batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlinBatch {
    pub batch: usize,
    pub level: u32,
    pub cubes: Vec<DyadicCube>,
    pub arms: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub survived: Vec<bool>,
    pub y_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlinRun {
    pub trace: RunTrace,
    pub batches: Vec<BlinBatch>,
}

impl BlinRun {
    pub fn output(&self) -> (f64, &[f64]) {
        (self.trace.summary.y_max, &self.trace.summary.arm)
    }
}

#[derive(Debug, Error)]
pub enum BlinError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error(
        "schedule too short: no refinement after batch {batch} ({used} of {budget} pulls used)"
    )]
    ScheduleTooShort {
        batch: usize,
        used: u64,
        budget: u64,
        partial: Box<BlinRun>,
    },
}

pub fn run_blin(
    obj: &dyn Objective,
    cfg: &BlinConfig,
    schedule: &EdgeLengthSchedule,
    source: &RandomSource,
) -> std::result::Result<BlinRun, BlinError> {
    if !(cfg.lipschitz > 0.0) {
        return Err(invalid("lipschitz", "L must be positive").into());
    }
    if cfg.budget < 1 {
        return Err(invalid("budget", "T must be positive").into());
    }
    let d = obj.dim();
    let f_star = obj.f_star();
    let mut notes = Vec::new();
    if schedule.fell_back() {
        notes.push(format!(
            "schedule {} fell back to {}",
            schedule.requested(),
            schedule.kind()
        ));
    }

    let mut m = 1usize;
    let mut level = schedule
        .level(1)
        .ok_or_else(|| Error::Schedule("schedule defines no batches".into()))?;
    let mut active = initial_partition(d, level)?;
    if active.len() as u64 > cfg.budget {
        return Err(Error::InfeasibleFirstBatch {
            needed: active.len() as u64,
            budget: cfg.budget,
        }
        .into());
    }

    let mut rows = Vec::new();
    let mut batches: Vec<BlinBatch> = Vec::new();
    let mut used = 0u64;
    let mut regret = 0.0;

    loop {
        let r = crate::cube::edge_length(level);
        let arms: Vec<Vec<f64>> = active
            .par_iter()
            .enumerate()
            .map(|(serial, cube)| match cfg.arm_rule {
                ArmRule::Center => cube.center(),
                ArmRule::UniformRandom => {
                    cube.sample(&mut source.stream(Purpose::Arms, m as u64, serial as u64))
                }
            })
            .collect();
        let values: Vec<f64> = arms.par_iter().map(|x| obj.eval(x)).collect();
        used += active.len() as u64;
        if let Some(f) = f_star {
            regret += values.iter().map(|v| f - v).sum::<f64>();
        }
        let (best, y_max) =
            values
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
                );
        let threshold = 2.0 * cfg.lipschitz * r;
        let survived: Vec<bool> = values.iter().map(|&v| y_max - v <= threshold).collect();
        let survivors: Vec<&DyadicCube> = active
            .iter()
            .zip(&survived)
            .filter_map(|(c, &s)| s.then_some(c))
            .collect();
        rows.push(TraceRow {
            kind: RowKind::Batch,
            batch: m as u64,
            r_m: Some(r),
            n_m: 1,
            cubes: active.len() as u64,
            survivors: Some(survivors.len() as u64),
            threshold: Some(threshold),
            pulls: active.len() as u64,
            cum_pulls: used,
            y_max,
            simple_regret: f_star.map(|f| f - y_max),
            cum_regret: f_star.map(|_| regret),
        });
        let best_arm = arms[best].clone();
        let next = schedule.next_refinement(m);
        let capped = matches!((cfg.max_batches, next), (Some(cap), Some((j, _))) if j > cap);

        let finish = |termination, rows: Vec<TraceRow>, batches: Vec<BlinBatch>| BlinRun {
            trace: RunTrace {
                algo: "blin".into(),
                rows,
                summary: RunSummary {
                    y_max,
                    arm: best_arm.clone(),
                    total_batches: m as u64,
                    total_pulls: used,
                    simple_regret: f_star.map(|f| f - y_max),
                    arm_gap: f_star.map(|f| f - y_max),
                    cum_regret: f_star.map(|_| regret),
                    termination,
                },
                notes: notes.clone(),
            },
            batches,
        };

        let forecast = next.map(|(_, next_level)| {
            let bits = (next_level - level) as u64 * d as u64;
            if bits >= 100 {
                u128::MAX
            } else {
                used as u128 + ((survivors.len() as u128) << bits)
            }
        });
        let next_active = match (next, forecast) {
            (Some((j, next_level)), Some(f)) if !capped && f < cfg.budget as u128 => {
                let ratio = 1u64 << (next_level - level);
                let mut kids = Vec::with_capacity((f - used as u128) as usize);
                for c in &survivors {
                    kids.extend(c.children(ratio)?);
                }
                Some((j, next_level, kids))
            }
            _ => None,
        };

        batches.push(BlinBatch {
            batch: m,
            level,
            cubes: std::mem::take(&mut active),
            arms,
            values,
            survived,
            y_max,
        });

        match next_active {
            Some((j, next_level, kids)) => {
                for skipped in m + 1..j {
                    rows.push(skipped_row(skipped, r, used, y_max, f_star.map(|_| regret)));
                }
                m = j;
                level = next_level;
                active = kids;
            }
            None => {
                return match next {
                    None => {
                        let run = finish(Termination::ScheduleExhausted, rows, batches);
                        Err(BlinError::ScheduleTooShort {
                            batch: m,
                            used,
                            budget: cfg.budget,
                            partial: Box::new(run),
                        })
                    }
                    Some(_) if capped => Ok(finish(Termination::BatchCap, rows, batches)),
                    Some(_) => Ok(finish(Termination::BudgetForecast, rows, batches)),
                };
            }
        }
    }
}

fn skipped_row(batch: usize, r: f64, used: u64, y_max: f64, cum_regret: Option<f64>) -> TraceRow {
    TraceRow {
        kind: RowKind::Skipped,
        batch: batch as u64,
        r_m: Some(r),
        n_m: 0,
        cubes: 0,
        survivors: None,
        threshold: None,
        pulls: 0,
        cum_pulls: used,
        y_max,
        simple_regret: None,
        cum_regret,
    }
}

/// `(2^level)^d` cubes of edge `2^-level` tiling the unit cube.
pub(crate) fn initial_partition(d: usize, level: u32) -> Result<Vec<DyadicCube>> {
    let unit = DyadicCube::unit(d);
    if level == 0 {
        Ok(vec![unit])
    } else {
        unit.children(1u64 << level)
    }
}

/// Batch-count ceiling `2 ceil(log2 log2 T / log2(d / (d + 1 - d_z))) + 2`
/// for the ACE schedule.
pub fn ace_batch_bound(budget: u64, d: usize, d_z: f64) -> u64 {
    let d = d as f64;
    let ratio = (budget as f64).log2().log2() / (d / (d + 1.0 - d_z)).log2();
    2 * ratio.ceil().max(0.0) as u64 + 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliViolation {
    pub batch: usize,
    pub cube: DyadicCube,
    pub max_gap: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliReport {
    pub batches_checked: usize,
    pub cubes_checked: usize,
    pub violations: Vec<EliViolation>,
}

impl EliReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Slack for floating-point evaluation of cube gaps.
const GAP_SLACK: f64 = 1e-12;

/// Every cube active in batch `m` has `max_{x in cube} (f* - f(x)) <= 4 L r_{m-1}`.
///
/// Batch 1 is checked against `r_0 = 1`.
pub fn assert_lemma_eli(run: &BlinRun, obj: &dyn Objective, lipschitz: f64) -> Result<EliReport> {
    let f_star = obj.f_star().ok_or(Error::MissingProfile)?;
    let mut report = EliReport {
        batches_checked: 0,
        cubes_checked: 0,
        violations: Vec::new(),
    };
    let mut prev_edge = 1.0;
    for batch in &run.batches {
        let bound = 4.0 * lipschitz * prev_edge;
        for cube in &batch.cubes {
            let (f_min, _) = obj
                .cube_range(cube)
                .ok_or_else(|| invalid("objective", "gap-bound check needs exact cube ranges"))?;
            let max_gap = f_star - f_min;
            if max_gap > bound + GAP_SLACK {
                report.violations.push(EliViolation {
                    batch: batch.batch,
                    cube: cube.clone(),
                    max_gap,
                    bound,
                });
            }
        }
        report.batches_checked += 1;
        report.cubes_checked += batch.cubes.len();
        prev_edge = crate::cube::edge_length(batch.level);
    }
    Ok(report)
}

/// Batches in which no active cube contains `x_star`.
pub fn optimal_cube_losses(batches: &[BlinBatch], x_star: &[f64]) -> Vec<usize> {
    batches
        .iter()
        .filter(|b| !b.cubes.iter().any(|c| c.contains(x_star)))
        .map(|b| b.batch)
        .collect()
}

/// Every cube of each batch sits inside exactly one survivor of the previous batch.
pub fn check_survivor_nesting(batches: &[BlinBatch]) -> std::result::Result<(), String> {
    for pair in batches.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let parents: std::collections::HashSet<&DyadicCube> = prev
            .cubes
            .iter()
            .zip(&prev.survived)
            .filter_map(|(c, &s)| s.then_some(c))
            .collect();
        for cube in &next.cubes {
            let parent = cube
                .ancestor(prev.level)
                .ok_or_else(|| format!("batch {}: cube coarser than parent", next.batch))?;
            if !parents.contains(&parent) {
                return Err(format!(
                    "batch {}: cube {:?} has no surviving parent",
                    next.batch,
                    cube.anchor()
                ));
            }
        }
    }
    Ok(())
}

/// Sweep BLiN over `budgets` and regress `log2` of the median simple regret.
pub fn blin_rate_sweep(
    obj: &dyn Objective,
    budgets: &[u64],
    kind: ScheduleKind,
    arm_rule: ArmRule,
    seeds: &[u64],
) -> Result<RateReport> {
    let profile = obj.profile().ok_or(Error::MissingProfile)?;
    let d_z = profile.zooming_dim;
    let f_star = profile.f_star;
    let lipschitz = profile.lipschitz;
    rates::sweep(budgets, seeds, -1.0 / d_z, |t, seed| {
        let schedule = make_schedule(
            &ScheduleSpec::new(kind, t, obj.dim(), d_z).scattering_dim(profile.scattering_dim),
        )?;
        let cfg = BlinConfig::new(t, lipschitz).arm_rule(arm_rule);
        match run_blin(obj, &cfg, &schedule, &RandomSource::new(seed)) {
            Ok(run) => Ok(f_star - run.trace.summary.y_max),
            Err(BlinError::Invalid(e)) => Err(e),
            Err(e @ BlinError::ScheduleTooShort { .. }) => Err(Error::Schedule(e.to_string())),
        }
    })
}
