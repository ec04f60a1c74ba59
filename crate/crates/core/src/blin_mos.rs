//! BLiN with maximum order statistics.
//!
//! Each active cube gets `n_m` uniform samples and is scored by the largest
//! observation. Two modes share the loop: `Noisy` targets cumulative regret
//! under bounded noise, `NoiselessK` targets simple regret with the sharper
//! threshold `L r_m^{1+k}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blin::initial_partition;
use crate::cube::{edge_length, DyadicCube};
use crate::error::{invalid, Error, Result};
use crate::objectives::{NoiseModel, Objective};
use crate::rng::{Purpose, RandomSource, Stream};
use crate::schedule::EdgeLengthSchedule;
use crate::trace::{RowKind, RunSummary, RunTrace, Termination, TraceRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MosMode {
    Noisy,
    NoiselessK,
}

impl std::str::FromStr for MosMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noisy" => Ok(MosMode::Noisy),
            "noiseless-k" | "k" => Ok(MosMode::NoiselessK),
            other => Err(invalid("mode", format!("unknown BLiN-MOS mode `{other}`"))),
        }
    }
}

/// Constant inside the noisy-mode sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisyConstant {
    /// `kappa_s kappa_p r / (d_s + 1)`, the value the concentration argument uses.
    #[default]
    Proof,
    /// `kappa_s e^{-1/2} r / (sqrt(2 pi) (d_s + 1))`, as printed in the pseudocode.
    AlgorithmBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosConfig {
    pub mode: MosMode,
    /// Defaults to `1/T^2` when unset.
    pub epsilon: Option<f64>,
    pub kappa_s: f64,
    pub d_s: f64,
    /// Noise density floor; read from the noise model when unset.
    pub kappa_p: Option<f64>,
    pub k: Option<f64>,
    pub lipschitz: f64,
    pub max_batches: Option<usize>,
    /// Multiplier on the next batch in the budget forecast.
    pub forecast_factor: f64,
    pub noisy_constant: NoisyConstant,
}

impl MosConfig {
    pub fn noisy(kappa_s: f64, d_s: f64) -> Self {
        Self {
            mode: MosMode::Noisy,
            epsilon: None,
            kappa_s,
            d_s,
            kappa_p: None,
            k: None,
            lipschitz: 1.0,
            max_batches: None,
            forecast_factor: 2.0,
            noisy_constant: NoisyConstant::Proof,
        }
    }

    pub fn noiseless_k(kappa_s: f64, d_s: f64, k: f64, lipschitz: f64) -> Self {
        Self {
            mode: MosMode::NoiselessK,
            k: Some(k),
            lipschitz,
            ..Self::noisy(kappa_s, d_s)
        }
    }

    pub fn epsilon_for(&self, budget: u64) -> f64 {
        self.epsilon
            .unwrap_or_else(|| 1.0 / (budget as f64 * budget as f64))
    }

    fn validate(&self, budget: u64, noise: &NoiseModel) -> Result<(f64, Option<f64>)> {
        let eps = self.epsilon_for(budget);
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid("epsilon", "epsilon must lie in (0, 1)"));
        }
        if !(self.kappa_s > 0.0 && self.kappa_s <= 1.0) {
            return Err(invalid("kappa_s", "kappa_s must lie in (0, 1]"));
        }
        if !(self.d_s >= 0.0 && self.d_s.is_finite()) {
            return Err(invalid("d_s", "d_s must be a finite non-negative number"));
        }
        if !(self.lipschitz > 0.0) {
            return Err(invalid("lipschitz", "L must be positive"));
        }
        if !(self.forecast_factor > 0.0) {
            return Err(invalid("forecast_factor", "must be positive"));
        }
        noise.validate()?;
        match self.mode {
            MosMode::Noisy => {
                let kp = match self.kappa_p {
                    Some(kp) => kp,
                    None => noise.density_floor().ok_or_else(|| {
                        invalid(
                            "noise",
                            "noisy mode needs noise with a positive density floor",
                        )
                    })?,
                };
                if !(kp > 0.0) {
                    return Err(invalid("kappa_p", "density floor must be positive"));
                }
                Ok((eps, Some(kp)))
            }
            MosMode::NoiselessK => {
                if !noise.is_none() {
                    return Err(invalid("noise", "k-mode assumes a noiseless oracle"));
                }
                match self.k {
                    Some(k) if k > 0.0 && k.is_finite() => Ok((eps, None)),
                    _ => Err(invalid("k", "k-mode needs a positive exponent k")),
                }
            }
        }
    }

    fn escape(&self, kappa_p: Option<f64>, r: f64) -> f64 {
        match self.mode {
            MosMode::Noisy => match self.noisy_constant {
                NoisyConstant::Proof => {
                    self.kappa_s * kappa_p.unwrap_or(0.0) * r / (self.d_s + 1.0)
                }
                NoisyConstant::AlgorithmBox => {
                    self.kappa_s * (-0.5f64).exp() * r
                        / ((2.0 * std::f64::consts::PI).sqrt() * (self.d_s + 1.0))
                }
            },
            MosMode::NoiselessK => self.kappa_s * r.powf(self.k.unwrap_or(0.0) * self.d_s),
        }
    }

    fn threshold(&self, r: f64) -> f64 {
        match self.mode {
            MosMode::Noisy => self.lipschitz * r,
            MosMode::NoiselessK => self.lipschitz * r.powf(1.0 + self.k.unwrap_or(0.0)),
        }
    }
}

/// `ceil(ln(1/eps) / -ln(1 - x))` for a per-sample hit probability `x`.
pub fn sample_count_for(eps: f64, x: f64) -> Result<u64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::SampleCountDomain(x));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("epsilon", "epsilon must lie in (0, 1)"));
    }
    let n = (-eps.ln() / -(-x).ln_1p()).ceil();
    if !(n.is_finite() && n < u64::MAX as f64) {
        return Err(Error::SampleCountDomain(x));
    }
    Ok((n as u64).max(1))
}

/// `n_m` for one batch. Noisy mode uses `x = kappa_s kappa_p r/(d_s+1)`,
/// k-mode uses `x = kappa_s r^{k d_s}`.
pub fn mos_sample_count(
    mode: MosMode,
    eps: f64,
    kappa_s: f64,
    kappa_p: Option<f64>,
    d_s: f64,
    r: f64,
    k: Option<f64>,
) -> Result<u64> {
    let x = match mode {
        MosMode::Noisy => {
            let kp = kappa_p.ok_or_else(|| invalid("kappa_p", "noisy mode needs kappa_p"))?;
            kappa_s * kp * r / (d_s + 1.0)
        }
        MosMode::NoiselessK => {
            let k = k.ok_or_else(|| invalid("k", "k-mode needs k"))?;
            kappa_s * r.powf(k * d_s)
        }
    };
    sample_count_for(eps, x)
}

/// Whether `n` sits between the two sides of
/// `gamma^x/(gamma(-ln(1-kappa/gamma))) <= -1/ln(1-kappa gamma^-x) <= gamma^x/kappa`
/// once scaled by `ln(1/eps)`, where the hit probability is `kappa gamma^-x`.
pub fn sample_count_within_prop_basic(
    n: u64,
    eps: f64,
    kappa: f64,
    gamma: f64,
    x: f64,
) -> Result<bool> {
    let (lower, _, upper) = crate::analysis::prop_basic_terms(kappa, gamma, x)?;
    let scale = -eps.ln();
    let slack = 1.0 + crate::analysis::PROP_BASIC_SLACK;
    Ok(scale * lower <= n as f64 * slack && n as f64 <= (scale * upper * slack).ceil())
}

/// The `(kappa, gamma, x)` triple that writes the batch hit probability as
/// `kappa gamma^-x` with `x = level`.
pub fn prop_basic_params(cfg: &MosConfig, kappa_p: Option<f64>, level: u32) -> (f64, f64, f64) {
    match cfg.mode {
        MosMode::Noisy => (cfg.escape(kappa_p, 1.0), 2.0, level as f64),
        MosMode::NoiselessK => (
            cfg.kappa_s,
            2f64.powf(cfg.k.unwrap_or(0.0) * cfg.d_s),
            level as f64,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosBatchRecord {
    pub batch: usize,
    pub level: u32,
    pub r_m: f64,
    pub n_m: u64,
    pub cubes: Vec<DyadicCube>,
    /// `Y_{q, n_m}` per cube.
    pub cube_max: Vec<f64>,
    pub survived: Vec<bool>,
    pub y_max: f64,
    pub survivors: usize,
    pub pulls: u64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinishRecord {
    pub cubes: Vec<DyadicCube>,
    pub pulls: u64,
    pub y_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosRun {
    pub trace: RunTrace,
    pub records: Vec<MosBatchRecord>,
    pub finish: Option<FinishRecord>,
    pub epsilon: f64,
    pub kappa_p: Option<f64>,
}

struct CubeDraws {
    y_max: f64,
    arm: Vec<f64>,
    regret: f64,
}

fn draw_cube(
    obj: &dyn Objective,
    cube: &DyadicCube,
    n: u64,
    noise: &NoiseModel,
    arms: &mut Stream,
    noise_stream: &mut Stream,
    f_star: f64,
) -> CubeDraws {
    let mut best = CubeDraws {
        y_max: f64::NEG_INFINITY,
        arm: Vec::new(),
        regret: 0.0,
    };
    for _ in 0..n {
        let x = cube.sample(arms);
        let fx = obj.eval(&x);
        let y = fx + noise.sample(noise_stream);
        best.regret += f_star - fx;
        if y > best.y_max {
            best.y_max = y;
            best.arm = x;
        }
    }
    best
}

pub fn run_blin_mos(
    obj: &dyn Objective,
    budget: u64,
    cfg: &MosConfig,
    schedule: &EdgeLengthSchedule,
    noise: &NoiseModel,
    source: &RandomSource,
) -> Result<MosRun> {
    if budget < 2 {
        return Err(invalid("budget", "T must be at least 2"));
    }
    let (eps, kappa_p) = cfg.validate(budget, noise)?;
    let d = obj.dim();
    let f_star = obj.f_star();
    // Regret sums need some reference; NaN keeps them out of the summary when f* is unknown.
    let f_ref = f_star.unwrap_or(f64::NAN);
    let mut notes = Vec::new();
    if cfg.mode == MosMode::Noisy && cfg.lipschitz != 1.0 {
        notes.push(format!(
            "noisy elimination threshold scaled by L = {}",
            cfg.lipschitz
        ));
    }
    if schedule.fell_back() {
        notes.push(format!(
            "schedule {} fell back to {}",
            schedule.requested(),
            schedule.kind()
        ));
    }

    let n_at = |level: u32| sample_count_for(eps, cfg.escape(kappa_p, edge_length(level)));

    let mut m = 1usize;
    let mut level = schedule
        .level(1)
        .ok_or_else(|| Error::Schedule("schedule defines no batches".into()))?;
    let mut n = n_at(level)?;
    let mut active = initial_partition(d, level)?;
    let first = (active.len() as u128) * n as u128;
    if first > budget as u128 {
        return Err(Error::InfeasibleFirstBatch {
            needed: first.min(u64::MAX as u128) as u64,
            budget,
        });
    }

    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut used = 0u64;
    let mut ledger_t = 0u128;
    let mut regret = 0.0;
    let mut best: (f64, Vec<f64>);

    let (termination, finish_cubes) = loop {
        let r = edge_length(level);
        let draws: Vec<CubeDraws> = active
            .par_iter()
            .enumerate()
            .map(|(serial, cube)| {
                let mut arms = source.stream(Purpose::Arms, m as u64, serial as u64);
                let mut ns = source.stream(Purpose::Noise, m as u64, serial as u64);
                draw_cube(obj, cube, n, noise, &mut arms, &mut ns, f_ref)
            })
            .collect();
        let pulls = active.len() as u64 * n;
        used += pulls;
        regret += draws.iter().map(|c| c.regret).sum::<f64>();
        let (top, y_max) = draws
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, c)| {
                if c.y_max > acc.1 {
                    (i, c.y_max)
                } else {
                    acc
                }
            });
        best = (y_max, draws[top].arm.clone());
        let threshold = cfg.threshold(r);
        let survived: Vec<bool> = draws.iter().map(|c| y_max - c.y_max <= threshold).collect();
        let survivors: Vec<DyadicCube> = active
            .iter()
            .zip(&survived)
            .filter(|(_, &s)| s)
            .map(|(c, _)| c.clone())
            .collect();
        rows.push(TraceRow {
            kind: RowKind::Batch,
            batch: m as u64,
            r_m: Some(r),
            n_m: n,
            cubes: active.len() as u64,
            survivors: Some(survivors.len() as u64),
            threshold: Some(threshold),
            pulls,
            cum_pulls: used,
            y_max,
            simple_regret: f_star.map(|f| f - y_max),
            cum_regret: f_star.map(|_| regret),
        });
        let survivor_count = survivors.len();
        records.push(MosBatchRecord {
            batch: m,
            level,
            r_m: r,
            n_m: n,
            cubes: std::mem::take(&mut active),
            cube_max: draws.iter().map(|c| c.y_max).collect(),
            survived,
            y_max,
            survivors: survivor_count,
            pulls,
            threshold,
        });

        if cfg.max_batches.is_some_and(|cap| m >= cap) {
            break (Termination::BatchCap, survivors);
        }
        let Some((j, next_level)) = schedule.next_refinement(m) else {
            break (Termination::ScheduleExhausted, survivors);
        };
        if cfg.max_batches.is_some_and(|cap| j > cap) {
            break (Termination::BatchCap, survivors);
        }
        let bits = (next_level - level) as u64 * d as u64;
        let child_count = if bits >= 100 {
            u128::MAX
        } else {
            (survivor_count as u128) << bits
        };
        let next_n = n_at(next_level)?;
        let next_pulls = child_count.saturating_mul(next_n as u128);
        let forecast = ledger_t as f64 + cfg.forecast_factor * next_pulls as f64;
        let remaining = (budget - used) as u128;
        let children = |survivors: Vec<DyadicCube>| -> Result<Vec<DyadicCube>> {
            if child_count > remaining.max(survivor_count as u128) {
                return Ok(survivors);
            }
            let ratio = 1u64 << (next_level - level);
            let mut kids = Vec::with_capacity(child_count as usize);
            for c in &survivors {
                kids.extend(c.children(ratio)?);
            }
            Ok(kids)
        };
        if forecast >= budget as f64 || next_pulls > remaining {
            break (Termination::BudgetForecast, children(survivors)?);
        }
        ledger_t += (cfg.forecast_factor * next_pulls as f64) as u128;
        for skipped in m + 1..j {
            rows.push(TraceRow {
                kind: RowKind::Skipped,
                batch: skipped as u64,
                r_m: Some(r),
                n_m: 0,
                cubes: 0,
                survivors: None,
                threshold: None,
                pulls: 0,
                cum_pulls: used,
                y_max,
                simple_regret: None,
                cum_regret: f_star.map(|_| regret),
            });
        }
        active = children(survivors)?;
        m = j;
        level = next_level;
        n = next_n;
    };

    let remaining = budget - used;
    let mut rounds = m as u64;
    let finish = if remaining > 0 && !finish_cubes.is_empty() {
        let count = finish_cubes.len() as u64;
        let draws: Vec<CubeDraws> = finish_cubes
            .par_iter()
            .enumerate()
            .map(|(i, cube)| {
                let pulls = remaining / count + u64::from((i as u64) < remaining % count);
                let mut arms = source.stream(Purpose::Finish, 0, i as u64);
                let mut ns = source.stream(Purpose::FinishNoise, 0, i as u64);
                draw_cube(obj, cube, pulls, noise, &mut arms, &mut ns, f_ref)
            })
            .collect();
        used += remaining;
        regret += draws.iter().map(|c| c.regret).sum::<f64>();
        let mut finish_max = f64::NEG_INFINITY;
        for c in draws {
            if c.y_max > finish_max {
                finish_max = c.y_max;
                if c.y_max > best.0 {
                    best = (c.y_max, c.arm);
                }
            }
        }
        rounds += 1;
        rows.push(TraceRow {
            kind: RowKind::Finish,
            batch: rounds,
            r_m: Some(finish_cubes[0].edge_length()),
            n_m: remaining / count,
            cubes: count,
            survivors: None,
            threshold: None,
            pulls: remaining,
            cum_pulls: used,
            y_max: finish_max,
            simple_regret: f_star.map(|f| f - finish_max),
            cum_regret: f_star.map(|_| regret),
        });
        Some(FinishRecord {
            cubes: finish_cubes,
            pulls: remaining,
            y_max: finish_max,
        })
    } else {
        None
    };

    let arm_gap = f_star.map(|f| f - obj.eval(&best.1));
    Ok(MosRun {
        trace: RunTrace {
            algo: "blin-mos".into(),
            rows,
            summary: RunSummary {
                y_max: best.0,
                arm: best.1,
                total_batches: rounds,
                total_pulls: used,
                simple_regret: f_star.map(|f| f - best.0),
                arm_gap,
                cum_regret: f_star.map(|_| regret),
                termination,
            },
            notes,
        },
        records,
        finish,
        epsilon: eps,
        kappa_p,
    })
}

/// Batches of a k-mode run in which no active cube contains `x_star`.
pub fn mos_optimal_cube_losses(run: &MosRun, x_star: &[f64]) -> Vec<usize> {
    let mut lost: Vec<usize> = run
        .records
        .iter()
        .filter(|b| !b.cubes.iter().any(|c| c.contains(x_star)))
        .map(|b| b.batch)
        .collect();
    if let Some(f) = &run.finish {
        if !f.cubes.iter().any(|c| c.contains(x_star)) {
            lost.push(run.trace.summary.total_batches as usize);
        }
    }
    lost
}

/// The exponent `k` that balances the simple-regret bound, clamped to `(0, k_max]`.
///
/// `log T` is base 2 here, matching the schedules.
pub fn mos_k_default(budget: u64, c_z: f64, kappa_s: f64, d_s: f64, d_z: f64) -> Result<f64> {
    if !(c_z > 0.0 && kappa_s > 0.0 && d_s > 0.0 && d_z >= 0.0) {
        return Err(invalid(
            "mos_k_default",
            "need C_z, kappa_s, d_s > 0 and d_z >= 0",
        ));
    }
    if budget < 3 {
        return Err(Error::HorizonTooSmall(format!("T = {budget}")));
    }
    let t = budget as f64;
    let log_t = t.log2();
    let a = kappa_s * t;
    let disc = a * a - 8.0 * c_z * log_t * a;
    if !(disc > 0.0) {
        return Err(Error::HorizonTooSmall(format!(
            "T = {budget}: negative discriminant for k-mode"
        )));
    }
    let k = (((a + disc.sqrt()) / (4.0 * c_z * log_t)).log2() - d_z) / d_s;
    if !(k > 0.0) {
        return Err(Error::HorizonTooSmall(format!(
            "T = {budget}: k = {k} is not positive"
        )));
    }
    // The admissible upper end uses log(1/eps) = 2 log T, which is the same expression.
    let eps_log = 2.0 * log_t;
    let disc_max = a * a - 4.0 * c_z * eps_log * a;
    let k_max = (((a + disc_max.sqrt()) / (2.0 * c_z * eps_log)).log2() - d_z) / d_s;
    Ok(k.min(k_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyRegretBound {
    pub bound: f64,
    /// Smallest batch count the bound asks for.
    pub prescribed_batches: f64,
}

/// Total-regret bound for the noisy mode with `r_m = 2^-m` and `eps = 1/T^2`.
///
/// `log T` is the natural log, since it comes from `ln(1/eps)`.
pub fn mos_noisy_regret_bound(
    budget: u64,
    d_z: f64,
    kappa_z: f64,
    d_s: f64,
    kappa_s: f64,
    kappa_p: f64,
) -> Result<NoisyRegretBound> {
    if d_z == 0.0 {
        return Err(Error::DegenerateBound(
            "zooming dimension 0 divides by d_z in the regret constant".into(),
        ));
    }
    if !(d_z > 0.0 && kappa_z > 0.0 && d_s >= 0.0 && kappa_s > 0.0 && kappa_p > 0.0) {
        return Err(invalid(
            "mos_noisy_regret_bound",
            "constants must be positive",
        ));
    }
    if budget < 3 {
        return Err(Error::HorizonTooSmall(format!("T = {budget}")));
    }
    let t = budget as f64;
    let ln_t = t.ln();
    let two_dz = 2f64.powf(d_z);
    let inner = kappa_z * d_z * (d_s + 1.0) / (kappa_s * kappa_p * (two_dz - 1.0));
    let e = 1.0 / (d_z + 1.0);
    let bound = 12.0 * (d_z + 1.0) / d_z * inner.powf(e) * t.powf(d_z * e) * ln_t.powf(e);
    let prescribed = (kappa_s * kappa_p * t * (two_dz - 1.0)
        / (kappa_z * d_z * (d_s + 1.0) * two_dz * 2.0 * ln_t))
        .ln()
        / ((d_z + 1.0) * std::f64::consts::LN_2);
    Ok(NoisyRegretBound {
        bound,
        prescribed_batches: prescribed,
    })
}

/// Round-count ceiling `2 ceil(log2 log2(T/log2 T) / log2((d+1)/(d+1-d_z))) + 3`
/// for the noisy ACE schedule.
pub fn ace_noisy_batch_bound(budget: u64, d: usize, d_z: f64) -> u64 {
    let t = budget as f64;
    let d = d as f64;
    let ratio = (t / t.log2()).log2().log2() / ((d + 1.0) / (d + 1.0 - d_z)).log2();
    2 * ratio.ceil().max(0.0) as u64 + 3
}
