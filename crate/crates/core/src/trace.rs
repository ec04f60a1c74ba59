//! Per-batch and per-pull records shared by all algorithms.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    /// A batch that evaluated arms.
    Batch,
    /// A batch with `r_m = r_{m-1}`; nothing is pulled.
    Skipped,
    /// Leftover budget spent after the last batch.
    Finish,
    /// One pull of a sequential algorithm.
    Pull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub kind: RowKind,
    pub batch: u64,
    pub r_m: Option<f64>,
    pub n_m: u64,
    /// Active cubes `|A_m|`.
    pub cubes: u64,
    /// Cubes surviving elimination, when the row eliminates.
    pub survivors: Option<u64>,
    pub threshold: Option<f64>,
    pub pulls: u64,
    pub cum_pulls: u64,
    /// Largest observation of this row (running max for `Pull` rows).
    pub y_max: f64,
    pub simple_regret: Option<f64>,
    pub cum_regret: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Sequential algorithm used its whole horizon.
    Horizon,
    /// Budget forecast reached `T`.
    BudgetForecast,
    /// The configured batch cap was reached.
    BatchCap,
    /// The edge-length schedule stopped refining.
    ScheduleExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub y_max: f64,
    pub arm: Vec<f64>,
    /// Index `M*` of the last batch (skipped batches included).
    pub total_batches: u64,
    pub total_pulls: u64,
    /// `f* - y_max`.
    pub simple_regret: Option<f64>,
    /// `f* - f(arm)`.
    pub arm_gap: Option<f64>,
    pub cum_regret: Option<f64>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algo: String,
    pub rows: Vec<TraceRow>,
    pub summary: RunSummary,
    /// Free-form notes such as schedule fallbacks.
    pub notes: Vec<String>,
}

impl RunTrace {
    /// Checks `cum_pulls` bookkeeping and monotone cumulative regret.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut total = 0u64;
        let mut last_regret = f64::NEG_INFINITY;
        for row in &self.rows {
            total += row.pulls;
            if row.cum_pulls != total {
                return Err(format!(
                    "batch {}: cum_pulls {} != running sum {total}",
                    row.batch, row.cum_pulls
                ));
            }
            if let Some(r) = row.cum_regret {
                if r < last_regret {
                    return Err(format!("batch {}: cumulative regret decreased", row.batch));
                }
                last_regret = r;
            }
        }
        if total != self.summary.total_pulls {
            return Err(format!(
                "summary reports {} pulls, rows sum to {total}",
                self.summary.total_pulls
            ));
        }
        Ok(())
    }

    /// Rows that actually pulled arms in a batch.
    pub fn batch_rows(&self) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Batch)
    }
}
