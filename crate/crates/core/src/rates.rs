//! Log-log rate regressions over a budget grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::stats::{fit_line, median};

/// Allowed distance between a fitted and a theoretical slope.
pub const SLOPE_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub budgets: Vec<u64>,
    /// Median gap per budget.
    pub medians: Vec<f64>,
    /// Medians rescaled by the rate normalizer, when one applies.
    pub scaled_medians: Option<Vec<f64>>,
    pub slope: f64,
    pub intercept: f64,
    pub expected_slope: f64,
    pub tolerance: f64,
    pub seeds: usize,
}

impl RateReport {
    /// One-sided check: the fitted rate is at least as fast as expected.
    pub fn pass(&self) -> bool {
        self.slope <= self.expected_slope + self.tolerance
    }

    /// Two-sided check: `|slope - expected| <= tolerance`.
    pub fn within_band(&self) -> bool {
        (self.slope - self.expected_slope).abs() <= self.tolerance
    }
}

/// Run `gap(T, seed)` for every budget and seed, then regress
/// `log2(median gap)` on `log2 T`. Seeds run in parallel and merge in order.
pub fn sweep<F>(budgets: &[u64], seeds: &[u64], expected_slope: f64, gap: F) -> Result<RateReport>
where
    F: Fn(u64, u64) -> Result<f64> + Sync,
{
    if budgets.len() < 3 {
        return Err(Error::GridTooSmall {
            needed: 3,
            got: budgets.len(),
        });
    }
    if seeds.is_empty() {
        return Err(Error::TooFewSeeds { needed: 1, got: 0 });
    }
    let mut medians = Vec::with_capacity(budgets.len());
    for &t in budgets {
        let gaps: Vec<f64> = seeds
            .par_iter()
            .map(|&s| gap(t, s))
            .collect::<Result<_>>()?;
        let m = median(&gaps);
        if !(m > 0.0) {
            return Err(invalid(
                "gap",
                format!("median gap {m} at T = {t} has no logarithm"),
            ));
        }
        medians.push(m);
    }
    let xs: Vec<f64> = budgets.iter().map(|&t| (t as f64).log2()).collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.log2()).collect();
    let line = fit_line(&xs, &ys);
    Ok(RateReport {
        budgets: budgets.to_vec(),
        medians,
        scaled_medians: None,
        slope: line.slope,
        intercept: line.intercept,
        expected_slope,
        tolerance: SLOPE_TOLERANCE,
        seeds: seeds.len(),
    })
}

/// `2^lo, 2^(lo+1), ..., 2^hi`.
pub fn dyadic_grid(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}
