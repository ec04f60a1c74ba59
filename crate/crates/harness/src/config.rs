//! Flat JSON experiment configuration, CLI overrides, and default resolution.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use narrowing::blin::ArmRule;
use narrowing::blin_mos::{mos_k_default, NoisyConstant};
use narrowing::objectives::{build_objective, NoiseModel, Objective};
use narrowing::rates::dyadic_grid;
use narrowing::schedule::ScheduleKind;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Rs,
    RsNoisy,
    Blin,
    BlinMos,
    BlinMosK,
}

impl std::str::FromStr for Algo {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rs" => Ok(Algo::Rs),
            "rs-noisy" => Ok(Algo::RsNoisy),
            "blin" => Ok(Algo::Blin),
            "blin-mos" => Ok(Algo::BlinMos),
            "blin-mos-k" => Ok(Algo::BlinMosK),
            other => Err(HarnessError::Config(format!(
                "unknown algo `{other}` (expected rs, rs-noisy, blin, blin-mos, blin-mos-k)"
            ))),
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algo::Rs => "rs",
            Algo::RsNoisy => "rs-noisy",
            Algo::Blin => "blin",
            Algo::BlinMos => "blin-mos",
            Algo::BlinMosK => "blin-mos-k",
        })
    }
}

/// What a user writes in a config file or on the command line. Every field
/// is optional; [`ExperimentConfig::resolve`] fills in the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algo: Option<Algo>,
    pub objective: Option<String>,
    pub dim: Option<usize>,
    pub p: Option<f64>,
    /// Level of the `constant` objective.
    pub value: Option<f64>,
    pub budget: Option<u64>,
    /// Budget grid for sweeps.
    pub budgets: Option<Vec<u64>>,
    pub seeds: Option<Vec<u64>>,
    pub schedule: Option<ScheduleKind>,
    /// `none`, `uniform[:h]` or `tgauss:sigma[:lo:hi]`.
    pub noise: Option<String>,
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
    pub lipschitz: Option<f64>,
    pub kappa_p: Option<f64>,
    pub arm_rule: Option<ArmRule>,
    pub forecast_factor: Option<f64>,
    pub noisy_constant: Option<NoisyConstant>,
    pub max_batches: Option<usize>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        ExperimentConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: ExperimentConfig) -> Self {
        let base = self;
        overlay!(
            base,
            top,
            algo,
            objective,
            dim,
            p,
            value,
            budget,
            budgets,
            seeds,
            schedule,
            noise,
            epsilon,
            k,
            lipschitz,
            kappa_p,
            arm_rule,
            forecast_factor,
            noisy_constant,
            max_batches,
            out
        )
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let algo = self.algo.unwrap_or(Algo::Blin);
        let objective = self.objective.clone().unwrap_or_else(|| "gp".into());
        let dim = self.dim.unwrap_or(4);
        if dim == 0 {
            return Err(HarnessError::Config("dim must be positive".into()));
        }
        let (p, value) = match objective.as_str() {
            "gp" => (Some(self.p.unwrap_or(5.0)), None),
            "constant" => (None, Some(self.value.unwrap_or(0.0))),
            other => return Err(HarnessError::Config(format!("unknown objective `{other}`"))),
        };
        let budget = self.budget.unwrap_or(1 << 19);
        if budget < 2 {
            return Err(HarnessError::Config("budget must be at least 2".into()));
        }
        let seeds = self.seeds.clone().unwrap_or_else(|| vec![0]);
        if seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }

        let noise_text = self.noise.clone().unwrap_or_else(|| {
            match algo {
                Algo::RsNoisy | Algo::BlinMos => "uniform:1",
                _ => "none",
            }
            .into()
        });
        let noise: NoiseModel = noise_text.parse()?;
        match algo {
            Algo::Rs | Algo::Blin | Algo::BlinMosK if !noise.is_none() => {
                return Err(HarnessError::Config(format!(
                    "{algo} observes the objective exactly; use noise `none` (got `{noise_text}`)"
                )));
            }
            Algo::RsNoisy if noise.is_none() => {
                return Err(HarnessError::Config("rs-noisy needs a noise model".into()));
            }
            Algo::BlinMos if noise.density_floor().is_none() && self.kappa_p.is_none() => {
                return Err(HarnessError::Config(
                    "noisy blin-mos needs kappa_p: give a noise model with a density floor or set kappa_p".into(),
                ));
            }
            _ => {}
        }
        let kappa_p = match algo {
            Algo::BlinMos => self.kappa_p.or_else(|| noise.density_floor()),
            _ => None,
        };

        let mut resolved = ResolvedConfig {
            algo,
            objective,
            dim,
            p,
            value,
            budget,
            budgets: Vec::new(),
            seeds,
            schedule: self.schedule.unwrap_or(match algo {
                Algo::Blin => ScheduleKind::AceBlin,
                _ => ScheduleKind::Geometric,
            }),
            noise: noise.to_string(),
            epsilon: None,
            epsilon_explicit: self.epsilon.is_some(),
            k: None,
            k_explicit: self.k.is_some(),
            lipschitz: 1.0,
            kappa_p,
            arm_rule: self.arm_rule.unwrap_or_default(),
            forecast_factor: self.forecast_factor.unwrap_or(2.0),
            noisy_constant: self.noisy_constant.unwrap_or_default(),
            max_batches: self.max_batches,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        };
        let obj = resolved.objective()?;
        resolved.lipschitz = match self.lipschitz {
            Some(l) => l,
            None => obj.lipschitz().filter(|&l| l > 0.0).unwrap_or(1.0),
        };
        if !(resolved.lipschitz > 0.0) {
            return Err(HarnessError::Config("lipschitz must be positive".into()));
        }
        if matches!(algo, Algo::BlinMos | Algo::BlinMosK) {
            let eps = self
                .epsilon
                .unwrap_or(1.0 / (budget as f64 * budget as f64));
            if !(eps > 0.0 && eps < 1.0) {
                return Err(HarnessError::Config("epsilon must lie in (0, 1)".into()));
            }
            resolved.epsilon = Some(eps);
        }
        if algo == Algo::BlinMosK {
            resolved.k = Some(match self.k {
                Some(k) => k,
                None => resolved.default_k(obj.as_ref(), budget)?,
            });
        }
        resolved.budgets = match &self.budgets {
            Some(b) => b.clone(),
            None => match algo {
                Algo::Rs | Algo::RsNoisy => dyadic_grid(8, 16),
                Algo::Blin => dyadic_grid(12, 19),
                Algo::BlinMos | Algo::BlinMosK => dyadic_grid(12, 17),
            },
        };
        Ok(resolved)
    }
}

/// A configuration with every default made explicit. This is what gets
/// echoed into each output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub algo: Algo,
    pub objective: String,
    pub dim: usize,
    pub p: Option<f64>,
    pub value: Option<f64>,
    pub budget: u64,
    pub budgets: Vec<u64>,
    pub seeds: Vec<u64>,
    pub schedule: ScheduleKind,
    pub noise: String,
    /// Set for the BLiN-MOS variants.
    pub epsilon: Option<f64>,
    pub epsilon_explicit: bool,
    /// Set for `blin-mos-k`; sweeps recompute it per budget unless explicit.
    pub k: Option<f64>,
    pub k_explicit: bool,
    pub lipschitz: f64,
    pub kappa_p: Option<f64>,
    pub arm_rule: ArmRule,
    pub forecast_factor: f64,
    pub noisy_constant: NoisyConstant,
    pub max_batches: Option<usize>,
    pub out: PathBuf,
}

impl ResolvedConfig {
    pub fn objective(&self) -> Result<Box<dyn Objective>> {
        let mut params = BTreeMap::new();
        params.insert("d".to_string(), self.dim as f64);
        if let Some(p) = self.p {
            params.insert("p".to_string(), p);
        }
        if let Some(c) = self.value {
            params.insert("c".to_string(), c);
        }
        Ok(build_objective(&self.objective, &params)?)
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        Ok(self.noise.parse()?)
    }

    /// `k` for budget `t`: the explicit value, or the default from the regret bound.
    pub fn k_for(&self, obj: &dyn Objective, t: u64) -> Result<f64> {
        match self.k {
            Some(k) if self.k_explicit || t == self.budget => Ok(k),
            _ => self.default_k(obj, t),
        }
    }

    fn default_k(&self, obj: &dyn Objective, t: u64) -> Result<f64> {
        let profile = obj.profile().ok_or_else(|| {
            HarnessError::Config(
                "blin-mos-k needs an objective with a dimension profile or an explicit k".into(),
            )
        })?;
        Ok(mos_k_default(
            t,
            profile.zooming_const,
            profile.scattering_const,
            profile.scattering_dim,
            profile.zooming_dim,
        )?)
    }

    /// Epsilon at budget `t`: the explicit value, or `1/t^2`.
    pub fn epsilon_for(&self, t: u64) -> Option<f64> {
        match self.epsilon {
            Some(e) if self.epsilon_explicit => Some(e),
            Some(_) => Some(1.0 / (t as f64 * t as f64)),
            None => None,
        }
    }
}

/// Parse seeds as `a..b` (end exclusive) or a comma list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || HarnessError::Config(format!("bad seed list `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a >= b {
            return Err(bad());
        }
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}

/// Parse a budget: a plain integer or `2^k`.
pub fn parse_budget(s: &str) -> Result<u64> {
    let bad = || HarnessError::Config(format!("bad budget `{s}`"));
    match s.trim().split_once('^') {
        Some(("2", e)) => {
            let e: u32 = e.parse().map_err(|_| bad())?;
            1u64.checked_shl(e).filter(|_| e < 64).ok_or_else(bad)
        }
        Some(_) => Err(bad()),
        None => s.trim().parse().map_err(|_| bad()),
    }
}

/// Parse a budget grid: `2^8..2^16` (powers of two, inclusive) or a comma list.
pub fn parse_budgets(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_budget(a)?, parse_budget(b)?);
        if !a.is_power_of_two() || !b.is_power_of_two() || a > b {
            return Err(HarnessError::Config(format!(
                "budget range `{s}` needs powers of two in increasing order"
            )));
        }
        return Ok(dyadic_grid(a.trailing_zeros(), b.trailing_zeros()));
    }
    s.split(',').map(parse_budget).collect()
}
