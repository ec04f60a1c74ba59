//! Edge-length schedules `{r_m}` for the batched narrowing algorithms.
//!
//! Every schedule is stored as integer levels (`r_m = 2^-level_m`), which
//! makes monotonicity and power-of-two divisibility hold by construction.
//! All logarithms here are base 2.

use serde::{Deserialize, Serialize};

use crate::cube::{edge_length, MAX_LEVEL};
use crate::error::{invalid, Error, Result};

/// Number of `c_i` terms expanded for the ACE kinds (batches up to twice this).
const ACE_TERMS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `r_m = 2^-m`.
    Geometric,
    /// ACE sequence for noiseless narrowing.
    AceBlin,
    /// ACE sequence for max-order-statistic narrowing under noise.
    AceMosNoisy,
    /// ACE sequence for the noiseless `alpha_m = r_m^k` variant.
    AceMosK,
}

impl ScheduleKind {
    pub fn is_ace(self) -> bool {
        !matches!(self, ScheduleKind::Geometric)
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(ScheduleKind::Geometric),
            "ace-blin" => Ok(ScheduleKind::AceBlin),
            "ace-mos-noisy" => Ok(ScheduleKind::AceMosNoisy),
            "ace-mos-k" => Ok(ScheduleKind::AceMosK),
            other => Err(invalid("schedule", format!("unknown kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScheduleKind::Geometric => "geometric",
            ScheduleKind::AceBlin => "ace-blin",
            ScheduleKind::AceMosNoisy => "ace-mos-noisy",
            ScheduleKind::AceMosK => "ace-mos-k",
        })
    }
}

/// Inputs for [`make_schedule`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub budget: u64,
    pub dim: usize,
    pub zooming_dim: f64,
    pub scattering_dim: f64,
    pub k: Option<f64>,
    /// Accept `AceBlin` with `d_z <= 1` by switching to `Geometric`.
    pub allow_geometric_fallback: bool,
}

impl ScheduleSpec {
    pub fn new(kind: ScheduleKind, budget: u64, dim: usize, zooming_dim: f64) -> Self {
        Self {
            kind,
            budget,
            dim,
            zooming_dim,
            scattering_dim: 0.0,
            k: None,
            allow_geometric_fallback: false,
        }
    }

    pub fn scattering_dim(mut self, d_s: f64) -> Self {
        self.scattering_dim = d_s;
        self
    }

    pub fn k(mut self, k: f64) -> Self {
        self.k = Some(k);
        self
    }

    pub fn allow_geometric_fallback(mut self, allow: bool) -> Self {
        self.allow_geometric_fallback = allow;
        self
    }
}

/// A realized sequence of edge lengths, indexed from batch 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeLengthSchedule {
    kind: ScheduleKind,
    requested: ScheduleKind,
    c1: Option<f64>,
    eta: Option<f64>,
    /// `levels[m - 1]` is the level of batch `m`; empty for `Geometric`.
    levels: Vec<u32>,
}

impl EdgeLengthSchedule {
    pub fn geometric() -> Self {
        Self {
            kind: ScheduleKind::Geometric,
            requested: ScheduleKind::Geometric,
            c1: None,
            eta: None,
            levels: Vec::new(),
        }
    }

    /// Kind actually used (differs from [`Self::requested`] after a fallback).
    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn requested(&self) -> ScheduleKind {
        self.requested
    }

    pub fn fell_back(&self) -> bool {
        self.kind != self.requested
    }

    pub fn c1(&self) -> Option<f64> {
        self.c1
    }

    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    /// Level of batch `m`; batch 0 is the unit cube. `None` past the end.
    pub fn level(&self, m: usize) -> Option<u32> {
        if m == 0 {
            return Some(0);
        }
        match self.kind {
            ScheduleKind::Geometric => (m <= MAX_LEVEL as usize).then_some(m as u32),
            _ => self.levels.get(m - 1).copied(),
        }
    }

    /// `r_m`.
    pub fn edge(&self, m: usize) -> Option<f64> {
        self.level(m).map(edge_length)
    }

    /// Number of batches the schedule defines.
    pub fn len(&self) -> usize {
        match self.kind {
            ScheduleKind::Geometric => MAX_LEVEL as usize,
            _ => self.levels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// First batch after `m` whose edge is strictly smaller than `r_m`.
    pub fn next_refinement(&self, m: usize) -> Option<(usize, u32)> {
        let current = self.level(m)?;
        (m + 1..=self.len()).find_map(|j| {
            let l = self.level(j)?;
            (l > current).then_some((j, l))
        })
    }

    /// The first `count` edge lengths `r_1..r_count` (fewer if the schedule ends).
    pub fn prefix(&self, count: usize) -> Vec<f64> {
        (1..=count).map_while(|m| self.edge(m)).collect()
    }
}

/// Build the edge-length schedule described by `spec`.
pub fn make_schedule(spec: &ScheduleSpec) -> Result<EdgeLengthSchedule> {
    if spec.budget < 2 {
        return Err(invalid("budget", "T must be at least 2"));
    }
    if spec.dim == 0 {
        return Err(invalid("dim", "d must be positive"));
    }
    let d = spec.dim as f64;
    let d_z = spec.zooming_dim;
    let d_s = spec.scattering_dim;
    if !(d_z >= 0.0) || !d_z.is_finite() {
        return Err(invalid("zooming_dim", "d_z must be a finite value >= 0"));
    }
    if !(d_s >= 0.0) || !d_s.is_finite() {
        return Err(invalid("scattering_dim", "d_s must be a finite value >= 0"));
    }
    if spec.kind == ScheduleKind::Geometric {
        return Ok(EdgeLengthSchedule::geometric());
    }
    if d_z >= d + 1.0 {
        return Err(Error::Schedule(format!(
            "d_z = {d_z} >= d + 1 = {} makes eta non-positive",
            d + 1.0
        )));
    }
    let t = spec.budget as f64;
    let log_t = t.log2();
    let (c1, eta) = match spec.kind {
        ScheduleKind::Geometric => unreachable!(),
        ScheduleKind::AceBlin => {
            if d_z <= 1.0 {
                if spec.allow_geometric_fallback {
                    log::info!("ace-blin with d_z = {d_z} <= 1: falling back to geometric");
                    let mut s = EdgeLengthSchedule::geometric();
                    s.requested = ScheduleKind::AceBlin;
                    return Ok(s);
                }
                return Err(Error::Schedule(format!(
                    "ace-blin needs d_z > 1 (got {d_z}); c_1 would be non-positive"
                )));
            }
            ((d_z - 1.0) / (d_z * d) * log_t, (d + 1.0 - d_z) / d)
        }
        ScheduleKind::AceMosNoisy => {
            let c1 = d_z / ((d + 1.0) * (d_z + 1.0)) * (t / log_t).log2();
            (c1, (d + 1.0 - d_z) / (d + 1.0))
        }
        ScheduleKind::AceMosK => {
            let k = spec.k.ok_or_else(|| invalid("k", "ace-mos-k requires k"))?;
            if !(k > 0.0) {
                return Err(invalid("k", "k must be positive"));
            }
            if !(d_s > 0.0) {
                return Err(invalid("scattering_dim", "ace-mos-k requires d_s > 0"));
            }
            let kds = k * d_s;
            let c1 = (d_z - 1.0 + kds) / ((d + kds) * (d_z + kds)) * (t / log_t).log2();
            (c1, (d + 1.0 - d_z) / (d + kds))
        }
    };
    if !(c1 > 0.0) || !c1.is_finite() {
        return Err(Error::Schedule(format!(
            "c_1 = {c1} is not positive for {}",
            spec.kind
        )));
    }
    Ok(EdgeLengthSchedule {
        kind: spec.kind,
        requested: spec.kind,
        c1: Some(c1),
        eta: Some(eta),
        levels: ace_levels(c1, eta, ACE_TERMS),
    })
}

/// Levels of the ACE recurrence with `r_0 = 1`:
/// `r_{2n-1} = min(r_{2n-2}, 2^-floor(S_n))`, `r_{2n} = 2^-ceil(S_n)`.
fn ace_levels(c1: f64, eta: f64, terms: usize) -> Vec<u32> {
    let mut levels = Vec::with_capacity(2 * terms);
    let mut prev = 0u32;
    let mut c = c1;
    let mut sum = 0.0;
    for _ in 0..terms {
        sum += c;
        c *= eta;
        let a = clamp_level(sum.floor());
        let b = clamp_level(sum.ceil());
        let odd = prev.max(a);
        let even = b.max(odd);
        levels.push(odd);
        levels.push(even);
        prev = even;
        if even == MAX_LEVEL {
            break;
        }
    }
    levels
}

fn clamp_level(v: f64) -> u32 {
    if v <= 0.0 {
        0
    } else if v >= MAX_LEVEL as f64 {
        MAX_LEVEL
    } else {
        v as u32
    }
}
