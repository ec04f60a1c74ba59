//! Uniform random search, noiseless and noisy, with its bound calculators.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::objectives::{NoiseModel, Objective};
use crate::rates::{self, RateReport};
use crate::rng::{Purpose, RandomSource};
use crate::trace::{RowKind, RunSummary, RunTrace, Termination, TraceRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsResult {
    /// `Y_T^max`.
    pub y_max: f64,
    /// `X_T^*`, the earliest pull attaining `y_max`.
    pub best_arm: Vec<f64>,
    pub best_index: usize,
    /// Observed values, one per pull.
    pub observations: Vec<f64>,
    /// Running maximum of `observations`.
    pub running_max: Vec<f64>,
    /// Running sum of `f* - f(X_i)` when `f*` is known.
    pub cum_regret: Option<Vec<f64>>,
}

impl RsResult {
    pub fn pulls(&self) -> usize {
        self.observations.len()
    }

    /// One `Pull` row per oracle call.
    pub fn to_trace(&self, obj: &dyn Objective) -> RunTrace {
        let f_star = obj.f_star();
        let rows = self
            .running_max
            .iter()
            .enumerate()
            .map(|(i, &y)| TraceRow {
                kind: RowKind::Pull,
                batch: i as u64 + 1,
                r_m: None,
                n_m: 1,
                cubes: 0,
                survivors: None,
                threshold: None,
                pulls: 1,
                cum_pulls: i as u64 + 1,
                y_max: y,
                simple_regret: f_star.map(|f| f - y),
                cum_regret: self.cum_regret.as_ref().map(|c| c[i]),
            })
            .collect();
        RunTrace {
            algo: "rs".into(),
            rows,
            summary: RunSummary {
                y_max: self.y_max,
                arm: self.best_arm.clone(),
                total_batches: 1,
                total_pulls: self.pulls() as u64,
                simple_regret: f_star.map(|f| f - self.y_max),
                arm_gap: f_star.map(|f| f - obj.eval(&self.best_arm)),
                cum_regret: self.cum_regret.as_ref().and_then(|c| c.last().copied()),
                termination: Termination::Horizon,
            },
            notes: Vec::new(),
        }
    }
}

/// Draw `T` uniform arms on `[0,1]^d`, observe `f(X_i) + W_i`, keep the max.
///
/// Arms come from one sequential stream, so a longer run extends a shorter
/// one with the same seed.
pub fn run_random_search(
    obj: &dyn Objective,
    pulls: u64,
    noise: &NoiseModel,
    source: &RandomSource,
) -> Result<RsResult> {
    if pulls == 0 {
        return Err(invalid("T", "random search needs at least one pull"));
    }
    noise.validate()?;
    let d = obj.dim();
    let f_star = obj.f_star();
    let mut arms = source.stream(Purpose::Arms, 0, 0);
    let mut noise_stream = source.stream(Purpose::Noise, 0, 0);
    let n = pulls as usize;
    let mut observations = Vec::with_capacity(n);
    let mut running_max = Vec::with_capacity(n);
    let mut cum_regret = f_star.map(|_| Vec::with_capacity(n));
    let mut best = (f64::NEG_INFINITY, Vec::new(), 0usize);
    let mut regret = 0.0;
    let mut x = vec![0.0; d];
    for i in 0..n {
        for v in x.iter_mut() {
            *v = arms.uniform();
        }
        let fx = obj.eval(&x);
        let y = fx + noise.sample(&mut noise_stream);
        if y > best.0 {
            best = (y, x.clone(), i);
        }
        observations.push(y);
        running_max.push(best.0);
        if let (Some(f), Some(c)) = (f_star, cum_regret.as_mut()) {
            regret += f - fx;
            c.push(regret);
        }
    }
    Ok(RsResult {
        y_max: best.0,
        best_arm: best.1,
        best_index: best.2,
        observations,
        running_max,
        cum_regret,
    })
}

/// Radius `L Theta ((1 - e^{ln(eps)/T}) / kappa_s)^{1/d_s}` that bounds
/// `f* - Y_T^max` with probability at least `1 - eps`.
pub fn rs_high_prob_bound(
    lipschitz: f64,
    diameter: f64,
    kappa_s: f64,
    d_s: f64,
    pulls: u64,
    eps: f64,
) -> Result<f64> {
    if d_s == 0.0 {
        return Err(Error::DegenerateBound(
            "scattering dimension 0 has no finite-T radius".into(),
        ));
    }
    if !(lipschitz > 0.0 && diameter > 0.0 && kappa_s > 0.0 && d_s > 0.0 && pulls > 0) {
        return Err(invalid(
            "rs_high_prob_bound",
            "all parameters must be positive",
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", "eps must lie in (0, 1)"));
    }
    let escape = -(eps.ln() / pulls as f64).exp_m1();
    Ok(lipschitz * diameter * (escape / kappa_s).powf(1.0 / d_s))
}

/// Default slowly growing normalizer `log2 log2 T + 2`.
pub fn default_omega(t: u64) -> f64 {
    (t as f64).log2().max(1.0).log2() + 2.0
}

/// Sweep noiseless random search and regress the median gap `f* - Y_T^max`.
pub fn rs_rate_sweep(obj: &dyn Objective, budgets: &[u64], seeds: &[u64]) -> Result<RateReport> {
    let profile = obj.profile().ok_or(Error::MissingProfile)?;
    let f_star = profile.f_star;
    rates::sweep(budgets, seeds, -1.0 / profile.scattering_dim, |t, seed| {
        let r = run_random_search(obj, t, &NoiseModel::None, &RandomSource::new(seed))?;
        Ok(f_star - r.y_max)
    })
}

/// Regress the median of `f* + b - Y_T^max` under `noise` (support `[a, b]`).
///
/// The expected slope is `-1/(d_s+1)` with noise and `-1/d_s` without.
/// `scaled_medians` holds `(T/omega_T)^{1/(d_s+1)}` times each median.
pub fn rs_noisy_rate_check(
    obj: &dyn Objective,
    noise: &NoiseModel,
    budgets: &[u64],
    omega: impl Fn(u64) -> f64,
    seeds: &[u64],
) -> Result<RateReport> {
    let profile = obj.profile().ok_or(Error::MissingProfile)?;
    let d_s = profile.scattering_dim;
    let f_star = profile.f_star;
    let b = noise.support().map_or(0.0, |(_, b)| b);
    let (expected, exponent) = if noise.is_none() {
        (-1.0 / d_s, 1.0 / d_s)
    } else {
        (-1.0 / (d_s + 1.0), 1.0 / (d_s + 1.0))
    };
    let mut report = rates::sweep(budgets, seeds, expected, |t, seed| {
        let r = run_random_search(obj, t, noise, &RandomSource::new(seed))?;
        Ok(f_star + b - r.y_max)
    })?;
    report.scaled_medians = Some(
        report
            .budgets
            .iter()
            .zip(&report.medians)
            .map(|(&t, m)| (t as f64 / omega(t)).powf(exponent) * m)
            .collect(),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{Constant, CountingObjective, GpNorm};

    #[test]
    fn constant_objective_returns_constant() {
        let c = Constant::new(3, 0.7);
        let r = run_random_search(&c, 50, &NoiseModel::None, &RandomSource::new(1)).unwrap();
        assert_eq!(r.y_max, 0.7);
        assert_eq!(r.best_index, 0);
    }

    #[test]
    fn exactly_t_oracle_calls() {
        let g = GpNorm::new(2, 2.0).unwrap();
        let counted = CountingObjective::new(&g);
        let r = run_random_search(&counted, 321, &NoiseModel::default(), &RandomSource::new(9))
            .unwrap();
        assert_eq!(counted.calls(), 321);
        assert_eq!(r.pulls(), 321);
    }

    #[test]
    fn y_max_is_brute_force_max() {
        let g = GpNorm::new(3, 1.5).unwrap();
        let r = run_random_search(&g, 500, &NoiseModel::default(), &RandomSource::new(3)).unwrap();
        let brute = r
            .observations
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.y_max, brute);
        assert_eq!(r.observations[r.best_index], r.y_max);
        assert!(r.running_max.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn bound_reference_value() {
        let b = rs_high_prob_bound(1.0, 1.0, 1.0, 1.0, 1000, 0.01).unwrap();
        assert!((b - 0.0045946).abs() < 1e-7);
        let near_one = rs_high_prob_bound(1.0, 1.0, 1.0, 1.0, 1000, 1.0 - 1e-15).unwrap();
        assert!(near_one < 1e-17);
        assert!(matches!(
            rs_high_prob_bound(1.0, 1.0, 1.0, 0.0, 10, 0.1),
            Err(Error::DegenerateBound(_))
        ));
        assert!(rs_high_prob_bound(1.0, 1.0, 1.0, 1.0, 10, 1.0).is_err());
    }

    #[test]
    fn ties_resolve_to_earliest_pull() {
        let c = Constant::new(1, 0.0);
        let r = run_random_search(&c, 10, &NoiseModel::None, &RandomSource::new(4)).unwrap();
        assert_eq!(r.best_index, 0);
    }

    #[test]
    fn trace_has_one_row_per_pull() {
        let g = GpNorm::new(1, 1.0).unwrap();
        let r = run_random_search(&g, 16, &NoiseModel::None, &RandomSource::new(1)).unwrap();
        let trace = r.to_trace(&g);
        assert_eq!(trace.rows.len(), 16);
        trace.check_consistency().unwrap();
    }

    #[test]
    fn single_point_grid_rejected() {
        let g = GpNorm::new(1, 1.0).unwrap();
        let err = rs_noisy_rate_check(&g, &NoiseModel::default(), &[1024], default_omega, &[1]);
        assert_eq!(err.unwrap_err(), Error::GridTooSmall { needed: 3, got: 1 });
    }
}
