//! Benchmark objectives, their dimension profiles, and bounded noise.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_rational::Ratio;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cube::DyadicCube;
use crate::error::{invalid, Error, Result};
use crate::rng::Stream;

/// A black-box function on `[0,1]^d` to be maximized.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    /// Value at `x`; callers keep `x` inside the unit cube.
    fn eval(&self, x: &[f64]) -> f64;

    fn name(&self) -> String;

    /// Declared Lipschitz constant in the sup norm.
    fn lipschitz(&self) -> Option<f64> {
        self.profile().map(|p| p.lipschitz)
    }

    fn profile(&self) -> Option<&DimensionProfile> {
        None
    }

    /// `max f` when known exactly.
    fn f_star(&self) -> Option<f64> {
        self.profile().map(|p| p.f_star)
    }

    /// Exact `(f_min, f_max)` over a cube.
    fn cube_range(&self, _cube: &DyadicCube) -> Option<(f64, f64)> {
        None
    }

    /// The near-optimal set `S(gap)` as a box `(lower, upper)`, for
    /// objectives where it is exactly an axis-aligned box.
    fn near_optimal_box(&self, _gap: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        None
    }
}

/// Exact rational dimensions, available when `p` is rational.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactDims {
    pub zooming: Ratio<i64>,
    pub scattering: Ratio<i64>,
}

/// Analytic constants of an objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionProfile {
    pub lipschitz: f64,
    pub dim: usize,
    pub zooming_dim: f64,
    /// `max_i N_r r^{d_z}` over levels 1..=12 under the `S(6r)` convention.
    pub zooming_const: f64,
    pub scattering_dim: f64,
    pub scattering_const: f64,
    pub f_star: f64,
    pub x_star: Vec<f64>,
    pub exact: Option<ExactDims>,
}

/// `g_p(x) = 1 - ||x||_inf^p / p`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpNorm {
    dim: usize,
    p: f64,
    profile: DimensionProfile,
}

impl GpNorm {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        let profile = gp_profile(dim, p)?;
        Ok(Self { dim, p, profile })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Largest sup-norm radius inside `S(gap)`: `min(1, (p gap)^{1/p})`.
    pub fn optimal_radius(&self, gap: f64) -> f64 {
        if gap <= 0.0 {
            0.0
        } else {
            (self.p * gap).powf(1.0 / self.p).min(1.0)
        }
    }
}

fn gp_value(p: f64, x: &[f64]) -> f64 {
    let norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1.0 - norm.powf(p) / p
}

impl Objective for GpNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        gp_value(self.p, x)
    }

    fn name(&self) -> String {
        format!("gp(d={},p={})", self.dim, self.p)
    }

    fn profile(&self) -> Option<&DimensionProfile> {
        Some(&self.profile)
    }

    fn cube_range(&self, cube: &DyadicCube) -> Option<(f64, f64)> {
        // Nearest corner to the origin maximizes, farthest minimizes.
        let hi = gp_value(self.p, &cube.lower_corner());
        let lo = gp_value(self.p, &cube.upper_corner());
        Some((lo, hi))
    }

    fn near_optimal_box(&self, gap: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let s = self.optimal_radius(gap);
        Some((vec![0.0; self.dim], vec![s; self.dim]))
    }
}

/// Checked evaluation of `g_p`.
pub fn gp_eval(d: usize, p: f64, x: &[f64]) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p", "p must be >= 1"));
    }
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::OutsideDomain);
    }
    Ok(gp_value(p, x))
}

/// Dimension profile of `g_p` on `[0,1]^d`.
pub fn gp_profile(d: usize, p: f64) -> Result<DimensionProfile> {
    if d == 0 {
        return Err(invalid("d", "d must be positive"));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid("p", "p must be a finite value >= 1"));
    }
    let df = d as f64;
    let zooming_dim = (p - 1.0) * df / p;
    let scattering_dim = df / p;
    let exact = Ratio::<i64>::approximate_float(p).and_then(|pr| {
        let dr = Ratio::from_integer(d as i64);
        (*pr.numer() != 0).then(|| ExactDims {
            zooming: (pr - 1) * dr / pr,
            scattering: dr / pr,
        })
    });
    let zooming_const = crate::analysis::gp_zooming_const(d, p, zooming_dim);
    Ok(DimensionProfile {
        lipschitz: 1.0,
        dim: d,
        zooming_dim,
        zooming_const,
        scattering_dim,
        scattering_const: 1.0,
        f_star: 1.0,
        x_star: vec![0.0; d],
        exact,
    })
}

/// `f(x) = c` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    dim: usize,
    value: f64,
}

impl Constant {
    pub fn new(dim: usize, value: f64) -> Self {
        Self { dim, value }
    }
}

impl Objective for Constant {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, _x: &[f64]) -> f64 {
        self.value
    }

    fn name(&self) -> String {
        format!("constant(d={},c={})", self.dim, self.value)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }

    fn f_star(&self) -> Option<f64> {
        Some(self.value)
    }

    fn cube_range(&self, _cube: &DyadicCube) -> Option<(f64, f64)> {
        Some((self.value, self.value))
    }
}

/// Counts oracle calls of the wrapped objective.
pub struct CountingObjective<'a> {
    inner: &'a dyn Objective,
    calls: AtomicU64,
}

impl<'a> CountingObjective<'a> {
    pub fn new(inner: &'a dyn Objective) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl Objective for CountingObjective<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(x)
    }

    fn name(&self) -> String {
        self.inner.name()
    }

    fn lipschitz(&self) -> Option<f64> {
        self.inner.lipschitz()
    }

    fn profile(&self) -> Option<&DimensionProfile> {
        self.inner.profile()
    }

    fn f_star(&self) -> Option<f64> {
        self.inner.f_star()
    }

    fn cube_range(&self, cube: &DyadicCube) -> Option<(f64, f64)> {
        self.inner.cube_range(cube)
    }

    fn near_optimal_box(&self, gap: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        self.inner.near_optimal_box(gap)
    }
}

/// Build a named objective: `gp` (params `d`, `p`) or `constant` (`d`, `c`).
pub fn build_objective(name: &str, params: &BTreeMap<String, f64>) -> Result<Box<dyn Objective>> {
    let get = |key: &'static str| {
        params
            .get(key)
            .copied()
            .ok_or_else(|| invalid(key, format!("objective `{name}` needs `{key}`")))
    };
    let dim = |v: f64| {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(invalid("d", format!("{v} is not a positive integer")))
        }
    };
    match name {
        "gp" => Ok(Box::new(GpNorm::new(dim(get("d")?)?, get("p")?)?)),
        "constant" => Ok(Box::new(Constant::new(
            dim(get("d")?)?,
            params.get("c").copied().unwrap_or(0.0),
        ))),
        other => Err(Error::UnknownObjective(other.to_string())),
    }
}

/// Bounded additive observation noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    None,
    /// Uniform on `[-half_width, half_width]`.
    UniformSym {
        half_width: f64,
    },
    /// `N(0, sigma^2)` conditioned on `[lo, hi]`.
    TruncatedGaussian {
        sigma: f64,
        lo: f64,
        hi: f64,
    },
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::UniformSym { half_width: 1.0 }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::UniformSym { half_width } if half_width > 0.0 => Ok(()),
            NoiseModel::UniformSym { .. } => Err(invalid("noise", "half width must be positive")),
            NoiseModel::TruncatedGaussian { sigma, lo, hi } if sigma > 0.0 && lo < hi => Ok(()),
            NoiseModel::TruncatedGaussian { .. } => {
                Err(invalid("noise", "need sigma > 0 and lo < hi"))
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, NoiseModel::None)
    }

    /// Support `[a, b]`; `None` for the noiseless oracle.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            NoiseModel::None => None,
            NoiseModel::UniformSym { half_width } => Some((-half_width, half_width)),
            NoiseModel::TruncatedGaussian { lo, hi, .. } => Some((lo, hi)),
        }
    }

    /// Density at `w` (zero outside the support).
    pub fn density(&self, w: f64) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::UniformSym { half_width } => {
                if w.abs() <= half_width {
                    0.5 / half_width
                } else {
                    0.0
                }
            }
            NoiseModel::TruncatedGaussian { sigma, lo, hi } => {
                if w < lo || w > hi {
                    return 0.0;
                }
                let mass = std_normal_cdf(hi / sigma) - std_normal_cdf(lo / sigma);
                let z = w / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt() * mass)
            }
        }
    }

    /// `kappa_p`: infimum of the density on the support.
    pub fn density_floor(&self) -> Option<f64> {
        let (a, b) = self.support()?;
        // Both densities are unimodal at 0, so the infimum sits at an endpoint.
        Some(self.density(a).min(self.density(b)))
    }

    pub fn sample(&self, stream: &mut Stream) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::UniformSym { half_width } => (2.0 * stream.uniform() - 1.0) * half_width,
            NoiseModel::TruncatedGaussian { sigma, lo, hi } => loop {
                let z: f64 = StandardNormal.sample(stream.rng());
                let w = sigma * z;
                if (lo..=hi).contains(&w) {
                    break w;
                }
            },
        }
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    /// `none`, `uniform[:h]`, or `tgauss:sigma[:lo:hi]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| invalid("noise", format!("bad number `{v}` in `{s}`")))
        };
        let model = match parts.as_slice() {
            ["none"] => NoiseModel::None,
            ["uniform"] => NoiseModel::UniformSym { half_width: 1.0 },
            ["uniform", h] => NoiseModel::UniformSym {
                half_width: num(h)?,
            },
            ["tgauss", sd] => NoiseModel::TruncatedGaussian {
                sigma: num(sd)?,
                lo: -1.0,
                hi: 1.0,
            },
            ["tgauss", sd, lo, hi] => NoiseModel::TruncatedGaussian {
                sigma: num(sd)?,
                lo: num(lo)?,
                hi: num(hi)?,
            },
            _ => return Err(invalid("noise", format!("unrecognized noise spec `{s}`"))),
        };
        model.validate()?;
        Ok(model)
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            NoiseModel::None => write!(f, "none"),
            NoiseModel::UniformSym { half_width } => write!(f, "uniform:{half_width}"),
            NoiseModel::TruncatedGaussian { sigma, lo, hi } => {
                write!(f, "tgauss:{sigma}:{lo}:{hi}")
            }
        }
    }
}

/// `count` i.i.d. noise draws.
pub fn noise_sample(model: &NoiseModel, stream: &mut Stream, count: usize) -> Vec<f64> {
    (0..count).map(|_| model.sample(stream)).collect()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(z / std::f64::consts::SQRT_2))
}
