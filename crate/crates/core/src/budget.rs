use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Pull accounting for one run: `used <= horizon`, grid points strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetLedger {
    horizon: u64,
    used: u64,
    grid_points: Vec<u64>,
}

impl BudgetLedger {
    pub fn new(horizon: u64) -> Self {
        Self {
            horizon,
            used: 0,
            grid_points: Vec::new(),
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.horizon - self.used
    }

    /// Cumulative pull counts at the end of each spending batch (`t_m`).
    pub fn grid_points(&self) -> &[u64] {
        &self.grid_points
    }

    /// Charge one batch of `pulls`; zero-pull batches leave the grid unchanged.
    pub fn spend(&mut self, pulls: u64) -> Result<u64> {
        let next = self
            .used
            .checked_add(pulls)
            .filter(|&n| n <= self.horizon)
            .ok_or_else(|| {
                invalid(
                    "pulls",
                    format!(
                        "{pulls} pulls exceed the remaining budget {}",
                        self.remaining()
                    ),
                )
            })?;
        if pulls > 0 {
            self.used = next;
            self.grid_points.push(next);
        }
        Ok(self.used)
    }

    /// Would a batch ending at cumulative count `forecast` exhaust the horizon?
    pub fn forecast_exhausts(&self, forecast: u128) -> bool {
        forecast >= self.horizon as u128
    }
}
