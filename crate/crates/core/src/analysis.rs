//! Empirical checks of the dimension theory: scattering probabilities,
//! zooming numbers, dimension fits and the sample-count inequalities.

use serde::{Deserialize, Serialize};

use crate::cube::{edge_length, DyadicCube};
use crate::error::{invalid, Error, Result};
use crate::objectives::{DimensionProfile, Objective};
use crate::rng::Stream;
use crate::stats::fit_line_weighted;

/// Which near-optimal set a zooming count was taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZoomingConvention {
    /// Standard cubes of edge `r` contained in `S(6r)`.
    SixR,
}

impl ZoomingConvention {
    pub fn multiplier(self) -> f64 {
        match self {
            ZoomingConvention::SixR => 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomingCount {
    pub level: u32,
    pub count: u128,
    pub convention: ZoomingConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterEstimate {
    pub cube: DyadicCube,
    pub alpha: f64,
    pub samples: u64,
    pub f_max: f64,
    pub f_min: f64,
    pub p_hat: f64,
    /// Three binomial standard errors at `p_hat`.
    pub ci_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterFit {
    pub scattering_dim: f64,
    pub scattering_const: f64,
    pub estimates: Vec<ScatterEstimate>,
    /// Grid values dropped because `p_hat == 0`.
    pub dropped: Vec<f64>,
}

/// `(f_min, f_max)` over `cube`: analytic when the objective provides it,
/// otherwise bracketed on a `per_axis^d` grid including the corners.
pub fn cube_range(obj: &dyn Objective, cube: &DyadicCube, per_axis: usize) -> (f64, f64) {
    if let Some(range) = obj.cube_range(cube) {
        return range;
    }
    let d = cube.dim();
    let lo = cube.lower_corner();
    let r = cube.edge_length();
    let steps = per_axis.max(2);
    let mut idx = vec![0usize; d];
    let (mut fmin, mut fmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut x = vec![0.0; d];
    loop {
        for j in 0..d {
            x[j] = lo[j] + r * idx[j] as f64 / (steps - 1) as f64;
        }
        let v = obj.eval(&x);
        fmin = fmin.min(v);
        fmax = fmax.max(v);
        let mut j = d;
        loop {
            if j == 0 {
                return (fmin, fmax);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < steps {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Fraction of `n` uniform draws in `cube` with
/// `f >= f_max - alpha (f_max - f_min)`.
pub fn estimate_scatter_prob(
    obj: &dyn Objective,
    cube: &DyadicCube,
    alpha: f64,
    n: u64,
    stream: &mut Stream,
) -> Result<ScatterEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid("alpha", "alpha must lie in (0, 1]"));
    }
    if n == 0 {
        return Err(invalid("n", "need at least one sample"));
    }
    let (f_min, f_max) = cube_range(obj, cube, 17);
    if f_max <= f_min {
        return Err(Error::DegenerateCube(f_max));
    }
    let threshold = (1.0 - alpha) * f_max + alpha * f_min;
    let hits = (0..n)
        .filter(|_| obj.eval(&cube.sample(stream)) >= threshold)
        .count() as u64;
    let p_hat = hits as f64 / n as f64;
    Ok(ScatterEstimate {
        cube: cube.clone(),
        alpha,
        samples: n,
        f_max,
        f_min,
        p_hat,
        ci_halfwidth: 3.0 * (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
    })
}

/// Least-squares fit of `log p_hat = log kappa_s + d_s log alpha`, each
/// point weighted by the inverse of `Var(log p_hat) ~ (1 - p) / (n p)`.
///
/// Each grid value uses its own `stream`; callers supply one per alpha.
pub fn fit_scattering_dim(
    obj: &dyn Objective,
    cube: &DyadicCube,
    alphas: &[f64],
    n: u64,
    mut stream_for: impl FnMut(usize) -> Stream,
) -> Result<ScatterFit> {
    if alphas.len() < 5 {
        return Err(Error::GridTooSmall {
            needed: 5,
            got: alphas.len(),
        });
    }
    if let Some(a) = alphas.iter().find(|a| !(0.02..=0.5).contains(*a)) {
        return Err(invalid("alpha", format!("{a} outside [0.02, 0.5]")));
    }
    let mut estimates = Vec::with_capacity(alphas.len());
    let mut dropped = Vec::new();
    for (i, &alpha) in alphas.iter().enumerate() {
        let est = estimate_scatter_prob(obj, cube, alpha, n, &mut stream_for(i))?;
        if est.p_hat == 0.0 {
            log::warn!("alpha = {alpha}: no sample hit the level band; dropped from the fit");
            dropped.push(alpha);
        } else {
            estimates.push(est);
        }
    }
    if estimates.len() < 3 {
        return Err(Error::GridTooSmall {
            needed: 3,
            got: estimates.len(),
        });
    }
    let xs: Vec<f64> = estimates.iter().map(|e| e.alpha.ln()).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.p_hat.ln()).collect();
    let ws: Vec<f64> = estimates
        .iter()
        .map(|e| e.samples as f64 * e.p_hat / (1.0 - e.p_hat).max(1.0 / e.samples as f64))
        .collect();
    let line = fit_line_weighted(&xs, &ys, &ws);
    Ok(ScatterFit {
        scattering_dim: line.slope,
        scattering_const: line.intercept.exp(),
        estimates,
        dropped,
    })
}

/// Number of level-`level` standard cubes entirely inside `S(threshold)`.
///
/// Uses the objective's near-optimal box when it has one, otherwise a
/// pruned descent driven by exact per-cube ranges.
pub fn count_near_optimal_cubes(obj: &dyn Objective, level: u32, threshold: f64) -> Result<u128> {
    if let Some((lo, hi)) = obj.near_optimal_box(threshold) {
        return Ok(lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| box_axis_count(a, b, level) as u128)
            .product());
    }
    enumerate_near_optimal_cubes(obj, level, threshold)
}

/// Pruned tree descent; needs `f_star` and exact cube ranges.
pub fn enumerate_near_optimal_cubes(
    obj: &dyn Objective,
    level: u32,
    threshold: f64,
) -> Result<u128> {
    let f_star = obj.f_star().ok_or(Error::MissingProfile)?;
    let root = DyadicCube::unit(obj.dim());
    if obj.cube_range(&root).is_none() {
        return Err(invalid(
            "objective",
            "zooming enumeration needs exact per-cube ranges",
        ));
    }
    let d = obj.dim() as u32;
    let mut total = 0u128;
    let mut stack = vec![root];
    while let Some(cube) = stack.pop() {
        let (f_min, f_max) = obj.cube_range(&cube).expect("checked above");
        if f_star - f_max > threshold {
            continue;
        }
        if f_star - f_min <= threshold {
            total += 1u128 << ((level - cube.level()) * d);
            continue;
        }
        if cube.level() < level {
            stack.extend(cube.children(2)?);
        }
    }
    Ok(total)
}

/// Cubes `[j r, (j+1) r]` with `lo <= j r` and `(j+1) r <= hi`, `r = 2^-level`.
fn box_axis_count(lo: f64, hi: f64, level: u32) -> u64 {
    let scale = (level as f64).exp2();
    let first = (lo * scale).ceil().max(0.0);
    let end = (hi * scale).floor().min(scale);
    if end <= first {
        0
    } else {
        (end - first) as u64
    }
}

/// `N_r` for `r = 2^-level` under the `S(6r)` convention.
pub fn zooming_number(obj: &dyn Objective, level: u32) -> Result<ZoomingCount> {
    let convention = ZoomingConvention::SixR;
    let count = count_near_optimal_cubes(obj, level, convention.multiplier() * edge_length(level))?;
    Ok(ZoomingCount {
        level,
        count,
        convention,
    })
}

/// `max_{i=1..12} N_r r^{d_z}` for `g_p`, from the analytic `S(6r)` box.
pub(crate) fn gp_zooming_const(d: usize, p: f64, d_z: f64) -> f64 {
    (1..=12u32)
        .map(|i| {
            let r = edge_length(i);
            let side = (p * 6.0 * r).powf(1.0 / p).min(1.0);
            let n = (box_axis_count(0.0, side, i) as f64).powi(d as i32);
            n * r.powf(d_z)
        })
        .fold(0.0, f64::max)
}

/// One grid point of the sample-count inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropBasicPoint {
    pub kappa: f64,
    pub gamma: f64,
    pub x: f64,
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropBasicReport {
    pub points: usize,
    pub violations: Vec<PropBasicPoint>,
}

impl PropBasicReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative slack allowed in the sample-count inequalities.
pub const PROP_BASIC_SLACK: f64 = 1e-12;

/// The three terms `(lower, middle, upper)` of
/// `gamma^x / (gamma (-log(1 - kappa/gamma))) <= -1/log(1 - kappa gamma^-x) <= gamma^x / kappa`.
pub fn prop_basic_terms(kappa: f64, gamma: f64, x: f64) -> Result<(f64, f64, f64)> {
    let arg = kappa * gamma.powf(-x);
    if !(kappa > 0.0 && kappa <= 1.0) || !(gamma > 1.0) || !(x >= 1.0) || !(arg > 0.0 && arg < 1.0)
    {
        return Err(invalid(
            "prop_basic",
            format!("need kappa in (0,1], gamma > 1, x >= 1, kappa gamma^-x in (0,1); got ({kappa}, {gamma}, {x})"),
        ));
    }
    let gx = gamma.powf(x);
    let lower = -gx / (gamma * (-kappa / gamma).ln_1p());
    let middle = -1.0 / (-arg).ln_1p();
    let upper = gx / kappa;
    Ok((lower, middle, upper))
}

pub fn prop_basic_check(kappas: &[f64], gammas: &[f64], xs: &[f64]) -> Result<PropBasicReport> {
    let mut violations = Vec::new();
    let mut points = 0;
    for &kappa in kappas {
        for &gamma in gammas {
            for &x in xs {
                let (lower, middle, upper) = prop_basic_terms(kappa, gamma, x)?;
                points += 1;
                let ok = lower <= middle * (1.0 + PROP_BASIC_SLACK)
                    && middle <= upper * (1.0 + PROP_BASIC_SLACK);
                if !ok {
                    violations.push(PropBasicPoint {
                        kappa,
                        gamma,
                        x,
                        lower,
                        middle,
                        upper,
                    });
                }
            }
        }
    }
    Ok(PropBasicReport { points, violations })
}

/// `d_s + d_z == d`, in rational arithmetic when the profile carries it.
pub fn ds_dz_sum_check(profile: &DimensionProfile) -> bool {
    match &profile.exact {
        Some(ex) => {
            ex.zooming + ex.scattering == num_rational::Ratio::from_integer(profile.dim as i64)
        }
        None => profile.zooming_dim + profile.scattering_dim == profile.dim as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{gp_profile, Constant, GpNorm};
    use crate::rng::{Purpose, RandomSource};

    /// Brute-force count over every level-`level` cube, independent of both
    /// production routes.
    fn brute_force_count(g: &GpNorm, level: u32, threshold: f64) -> u128 {
        let d = g.dim();
        let side = 1u64 << level;
        let r = edge_length(level);
        let mut count = 0;
        let mut idx = vec![0u64; d];
        'outer: loop {
            let far: Vec<f64> = idx.iter().map(|&a| (a + 1) as f64 * r).collect();
            if 1.0 - g.eval(&far) <= threshold {
                count += 1;
            }
            for j in (0..d).rev() {
                idx[j] += 1;
                if idx[j] < side {
                    continue 'outer;
                }
                idx[j] = 0;
            }
            break;
        }
        count
    }

    #[test]
    fn zooming_routes_agree_with_brute_force() {
        for &(d, p) in &[(1usize, 1.0), (2, 2.0), (3, 1.5), (2, 5.0)] {
            let g = GpNorm::new(d, p).unwrap();
            for level in 1..=5u32 {
                let t = 6.0 * edge_length(level);
                let brute = brute_force_count(&g, level, t);
                assert_eq!(count_near_optimal_cubes(&g, level, t).unwrap(), brute);
                assert_eq!(enumerate_near_optimal_cubes(&g, level, t).unwrap(), brute);
            }
        }
    }

    #[test]
    fn zooming_linear_1d_is_six() {
        let g = GpNorm::new(1, 1.0).unwrap();
        let z = zooming_number(&g, 6).unwrap();
        assert_eq!(z.count, 6);
        assert_eq!(z.convention, ZoomingConvention::SixR);
        for level in 4..=10 {
            assert_eq!(zooming_number(&g, level).unwrap().count, 6);
        }
    }

    #[test]
    fn zooming_count_monotone_in_threshold() {
        let g = GpNorm::new(3, 2.0).unwrap();
        let mut last = 0;
        for k in 0..40 {
            let c = count_near_optimal_cubes(&g, 4, k as f64 * 0.02).unwrap();
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn scatter_alpha_one_is_certain() {
        let g = GpNorm::new(2, 3.0).unwrap();
        let cube = DyadicCube::new(2, vec![1, 2]).unwrap();
        let mut s = RandomSource::new(5).stream(Purpose::Estimate, 0, 0);
        let e = estimate_scatter_prob(&g, &cube, 1.0, 1000, &mut s).unwrap();
        assert_eq!(e.p_hat, 1.0);
    }

    #[test]
    fn scatter_degenerate_cube_reported() {
        let c = Constant::new(2, 0.3);
        let mut s = RandomSource::new(5).stream(Purpose::Estimate, 0, 0);
        let err = estimate_scatter_prob(&c, &DyadicCube::unit(2), 0.5, 10, &mut s);
        assert_eq!(err, Err(Error::DegenerateCube(0.3)));
        let src = RandomSource::new(5);
        let fit = fit_scattering_dim(
            &c,
            &DyadicCube::unit(2),
            &[0.02, 0.05, 0.1, 0.2, 0.5],
            100,
            |i| src.stream(Purpose::Estimate, i as u64, 0),
        );
        assert!(matches!(fit, Err(Error::DegenerateCube(_))));
    }

    #[test]
    fn scatter_fit_needs_five_points() {
        let g = GpNorm::new(1, 1.0).unwrap();
        let src = RandomSource::new(1);
        let r = fit_scattering_dim(&g, &DyadicCube::unit(1), &[0.1, 0.2], 10, |i| {
            src.stream(Purpose::Estimate, i as u64, 0)
        });
        assert_eq!(r.unwrap_err(), Error::GridTooSmall { needed: 5, got: 2 });
    }

    #[test]
    fn bracketing_matches_analytic_range_on_corner_cube() {
        struct Opaque(GpNorm);
        impl Objective for Opaque {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn eval(&self, x: &[f64]) -> f64 {
                self.0.eval(x)
            }
            fn name(&self) -> String {
                "opaque".into()
            }
        }
        let g = GpNorm::new(2, 2.0).unwrap();
        let cube = DyadicCube::new(1, vec![0, 1]).unwrap();
        let exact = g.cube_range(&cube).unwrap();
        let bracket = cube_range(&Opaque(g), &cube, 9);
        assert_eq!(exact, bracket);
    }

    #[test]
    fn prop_basic_tight_at_x_one() {
        let (lo, mid, up) = prop_basic_terms(1.0, 2.0, 1.0).unwrap();
        let want = 1.0 / std::f64::consts::LN_2;
        assert!((lo - want).abs() < 1e-12 * want);
        assert!((mid - want).abs() < 1e-12 * want);
        assert_eq!(up, 2.0);
    }

    #[test]
    fn prop_basic_large_x() {
        let (_, mid, up) = prop_basic_terms(0.5, 2.0, 10.0).unwrap();
        assert!(mid < up && up == 2048.0);
        assert!((mid - 2047.5).abs() < 1e-3);
        let (_, mid, up) = prop_basic_terms(1.0, 2.0, 40.0).unwrap();
        assert!((mid / up - 1.0).abs() < 1e-6);
    }

    #[test]
    fn prop_basic_domain_errors() {
        assert!(prop_basic_terms(1.5, 2.0, 1.0).is_err());
        assert!(prop_basic_terms(0.5, 1.0, 1.0).is_err());
        assert!(prop_basic_terms(0.5, 2.0, 0.5).is_err());
    }

    #[test]
    fn profile_sums_are_exact() {
        for &(d, p) in &[(4, 1.5), (4, 5.0), (1, 1.0), (3, 7.0)] {
            assert!(ds_dz_sum_check(&gp_profile(d, p).unwrap()), "d={d} p={p}");
        }
    }
}
