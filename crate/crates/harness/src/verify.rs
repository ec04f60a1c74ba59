//! `verify` and `bounds` subcommands: dimension-theory checks and bound calculators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use narrowing::analysis::{
    ds_dz_sum_check, estimate_scatter_prob, fit_scattering_dim, prop_basic_check, zooming_number,
};
use narrowing::blin::ace_batch_bound;
use narrowing::blin_mos::{
    ace_noisy_batch_bound, mos_k_default, mos_noisy_regret_bound, NoisyRegretBound,
};
use narrowing::cube::DyadicCube;
use narrowing::objectives::{gp_profile, GpNorm};
use narrowing::random_search::rs_high_prob_bound;
use narrowing::rng::{Purpose, RandomSource};
use narrowing::stats::fit_line;

use crate::config::ResolvedConfig;
use crate::error::Result;
use crate::runner::build_schedule;

/// `(d, p)` pairs of the scattering grid.
pub const SCATTER_PROFILES: [(usize, f64); 4] = [(1, 1.0), (2, 2.0), (4, 5.0), (4, 1.5)];
pub const SCATTER_ALPHAS: [f64; 6] = [0.05, 0.1, 0.2, 0.36, 0.5, 0.8];
/// Twelve geometric steps from 0.05 to 0.5. At `d/p = 4` and `n = 1e5` the
/// fitted slope still has a standard error near 0.04.
pub fn fit_alphas() -> Vec<f64> {
    (0..12)
        .map(|i| 0.05 * 10f64.powf(i as f64 / 11.0))
        .collect()
}
pub const FIT_DIMS: [usize; 3] = [1, 2, 4];
pub const FIT_PS: [f64; 4] = [1.0, 1.5, 2.0, 5.0];
pub const ZOOM_PROFILES: [(usize, f64); 3] = [(1, 1.0), (2, 2.0), (4, 5.0)];
pub const ZOOM_LEVELS: std::ops::RangeInclusive<u32> = 3..=8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterCheck {
    pub d: usize,
    pub p: f64,
    pub alpha: f64,
    pub p_hat: f64,
    pub expected: f64,
    /// Three binomial standard errors at the expected value.
    pub halfwidth: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitCheck {
    pub d: usize,
    pub p: f64,
    pub scattering_dim: f64,
    pub scattering_const: f64,
    pub expected_dim: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomCheck {
    pub d: usize,
    pub p: f64,
    pub levels: Vec<u32>,
    pub counts: Vec<u128>,
    pub slope: f64,
    pub expected: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: u64,
    pub scatter: Vec<ScatterCheck>,
    pub scatter_pass_fraction: f64,
    pub fits: Vec<FitCheck>,
    pub zooming: Vec<ZoomCheck>,
    pub prop_basic_points: usize,
    pub prop_basic_violations: usize,
    pub dimension_sums: Vec<(usize, f64, bool)>,
    pub pass: bool,
}

/// Scatter estimates on `[0, 1/4]^d` against the closed form `alpha^{d/p}`.
pub fn scatter_grid(seed: u64, samples: u64) -> Result<Vec<ScatterCheck>> {
    let src = RandomSource::new(seed);
    let cells: Vec<(usize, usize, f64, f64)> = SCATTER_PROFILES
        .iter()
        .flat_map(|&(d, p)| SCATTER_ALPHAS.iter().map(move |&a| (d, p, a)))
        .enumerate()
        .map(|(i, (d, p, a))| (i, d, p, a))
        .collect();
    cells
        .par_iter()
        .map(|&(i, d, p, alpha)| {
            let g = GpNorm::new(d, p)?;
            let cube = DyadicCube::new(2, vec![0; d])?;
            let mut stream = src.stream(Purpose::Estimate, i as u64, 0);
            let est = estimate_scatter_prob(&g, &cube, alpha, samples, &mut stream)?;
            let expected = alpha.powf(d as f64 / p);
            let halfwidth = 3.0 * (expected * (1.0 - expected) / samples as f64).sqrt();
            Ok(ScatterCheck {
                d,
                p,
                alpha,
                p_hat: est.p_hat,
                expected,
                halfwidth,
                pass: (est.p_hat - expected).abs() <= halfwidth,
            })
        })
        .collect()
}

/// Log-log fits of the scattering law on `[0, 1/4]^d` for every `(d, p)`
/// in `FIT_DIMS x FIT_PS`.
pub fn scatter_fits(seed: u64, samples: u64) -> Result<Vec<FitCheck>> {
    let src = RandomSource::new(seed);
    let profiles: Vec<(usize, f64)> = FIT_DIMS
        .iter()
        .flat_map(|&d| FIT_PS.iter().map(move |&p| (d, p)))
        .collect();
    profiles
        .par_iter()
        .enumerate()
        .map(|(i, &(d, p))| {
            let g = GpNorm::new(d, p)?;
            let cube = DyadicCube::new(2, vec![0; d])?;
            let fit = fit_scattering_dim(&g, &cube, &fit_alphas(), samples, |j| {
                src.stream(Purpose::Estimate, 1000 + i as u64, j as u64)
            })?;
            let expected_dim = d as f64 / p;
            Ok(FitCheck {
                d,
                p,
                scattering_dim: fit.scattering_dim,
                scattering_const: fit.scattering_const,
                expected_dim,
                pass: (fit.scattering_dim - expected_dim).abs() <= 0.1
                    && (fit.scattering_const - 1.0).abs() <= 0.15,
            })
        })
        .collect()
}

/// Slope of `log2 N_r` against the level.
pub fn zooming_slopes() -> Result<Vec<ZoomCheck>> {
    ZOOM_PROFILES
        .iter()
        .map(|&(d, p)| {
            let g = GpNorm::new(d, p)?;
            let levels: Vec<u32> = ZOOM_LEVELS.collect();
            let counts = levels
                .iter()
                .map(|&i| zooming_number(&g, i).map(|z| z.count))
                .collect::<narrowing::error::Result<Vec<u128>>>()?;
            let xs: Vec<f64> = levels.iter().map(|&i| i as f64).collect();
            let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).log2()).collect();
            let slope = fit_line(&xs, &ys).slope;
            let expected = (p - 1.0) * d as f64 / p;
            Ok(ZoomCheck {
                d,
                p,
                levels,
                counts,
                slope,
                expected,
                pass: (slope - expected).abs() <= 0.3,
            })
        })
        .collect()
}

pub fn verify_report(seed: u64, samples: u64) -> Result<VerifyReport> {
    let scatter = scatter_grid(seed, samples)?;
    let passed = scatter.iter().filter(|c| c.pass).count();
    let scatter_pass_fraction = passed as f64 / scatter.len() as f64;
    let fits = scatter_fits(seed, samples)?;
    let zooming = zooming_slopes()?;
    let kappas: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let xs: Vec<f64> = (1..=40).map(f64::from).collect();
    let prop = prop_basic_check(&kappas, &[1.5, 2.0, 4.0], &xs)?;
    let dimension_sums = [(4, 1.5), (4, 5.0), (1, 1.0)]
        .iter()
        .map(|&(d, p)| Ok((d, p, ds_dz_sum_check(&gp_profile(d, p)?))))
        .collect::<Result<Vec<_>>>()?;
    let pass = scatter_pass_fraction >= 0.95
        && fits.iter().all(|f| f.pass)
        && zooming.iter().all(|z| z.pass)
        && prop.pass()
        && dimension_sums.iter().all(|s| s.2);
    Ok(VerifyReport {
        samples,
        scatter,
        scatter_pass_fraction,
        fits,
        zooming,
        prop_basic_points: prop.points,
        prop_basic_violations: prop.violations.len(),
        dimension_sums,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub budget: u64,
    pub dim: usize,
    pub zooming_dim: f64,
    pub zooming_const: f64,
    pub scattering_dim: f64,
    pub scattering_const: f64,
    pub rs_epsilon: f64,
    pub rs_high_prob_radius: Option<f64>,
    pub mos_noisy: Option<NoisyRegretBound>,
    pub mos_k_default: Option<f64>,
    pub ace_blin_batch_bound: u64,
    pub ace_noisy_batch_bound: u64,
    /// First edge lengths of the configured schedule.
    pub schedule_prefix: Vec<f64>,
    /// Why an entry above is missing.
    pub notes: Vec<String>,
}

fn keep<T>(notes: &mut Vec<String>, label: &str, r: narrowing::error::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{label}: {e}"));
            None
        }
    }
}

pub fn bounds_report(cfg: &ResolvedConfig) -> Result<BoundsReport> {
    let obj = cfg.objective()?;
    let profile = obj.profile().cloned().ok_or_else(|| {
        crate::error::HarnessError::Config(format!("{} has no dimension profile", obj.name()))
    })?;
    let t = cfg.budget;
    let mut notes = Vec::new();
    let rs_epsilon = cfg.epsilon.unwrap_or(0.1);
    let rs = keep(
        &mut notes,
        "rs_high_prob_radius",
        rs_high_prob_bound(
            cfg.lipschitz,
            1.0,
            profile.scattering_const,
            profile.scattering_dim,
            t,
            rs_epsilon,
        ),
    );
    let kappa_p = cfg
        .kappa_p
        .or_else(|| cfg.noise_model().ok().and_then(|n| n.density_floor()))
        .unwrap_or(0.5);
    let mos_noisy = keep(
        &mut notes,
        "mos_noisy",
        mos_noisy_regret_bound(
            t,
            profile.zooming_dim,
            profile.zooming_const,
            profile.scattering_dim,
            profile.scattering_const,
            kappa_p,
        ),
    );
    let k = keep(
        &mut notes,
        "mos_k_default",
        mos_k_default(
            t,
            profile.zooming_const,
            profile.scattering_const,
            profile.scattering_dim,
            profile.zooming_dim,
        ),
    );
    let schedule_prefix = match build_schedule(cfg, obj.as_ref(), t, cfg.k.or(k)) {
        Ok(s) => s.prefix(12),
        Err(e) => {
            notes.push(format!("schedule: {e}"));
            Vec::new()
        }
    };
    Ok(BoundsReport {
        budget: t,
        dim: cfg.dim,
        zooming_dim: profile.zooming_dim,
        zooming_const: profile.zooming_const,
        scattering_dim: profile.scattering_dim,
        scattering_const: profile.scattering_const,
        rs_epsilon,
        rs_high_prob_radius: rs,
        mos_noisy,
        mos_k_default: k,
        ace_blin_batch_bound: ace_batch_bound(t, cfg.dim, profile.zooming_dim),
        ace_noisy_batch_bound: ace_noisy_batch_bound(t, cfg.dim, profile.zooming_dim),
        schedule_prefix,
        notes,
    })
}
