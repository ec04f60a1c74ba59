//! Dyadic (standard) cubes of the unit cube `[0,1]^d`.
//!
//! A cube at level `l` has edge length `2^-l` and an integer anchor on the
//! `2^-l` grid, so membership, nesting and tiling are decided with integer
//! arithmetic only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Deepest supported level; anchors must fit in a `u64`.
pub const MAX_LEVEL: u32 = 62;

/// Closed axis-aligned cube `prod_j [a_j 2^-l, (a_j + 1) 2^-l]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    level: u32,
    anchor: Vec<u64>,
}

impl DyadicCube {
    /// The whole domain `[0,1]^dim`.
    pub fn unit(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            level: 0,
            anchor: vec![0; dim],
        }
    }

    pub fn new(level: u32, anchor: Vec<u64>) -> Result<Self> {
        if anchor.is_empty() {
            return Err(crate::error::invalid(
                "anchor",
                "dimension must be positive",
            ));
        }
        if level > MAX_LEVEL {
            return Err(crate::error::invalid(
                "level",
                format!("{level} exceeds the maximum level {MAX_LEVEL}"),
            ));
        }
        let side = 1u64 << level;
        if let Some(a) = anchor.iter().find(|&&a| a >= side) {
            return Err(crate::error::invalid(
                "anchor",
                format!("coordinate {a} outside 0..{side} at level {level}"),
            ));
        }
        Ok(Self { level, anchor })
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn anchor(&self) -> &[u64] {
        &self.anchor
    }

    /// `2^-level`, exact in binary floating point.
    pub fn edge_length(&self) -> f64 {
        edge_length(self.level)
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        let r = self.edge_length();
        self.anchor.iter().map(|&a| a as f64 * r).collect()
    }

    pub fn upper_corner(&self) -> Vec<f64> {
        let r = self.edge_length();
        self.anchor.iter().map(|&a| (a + 1) as f64 * r).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        let r = self.edge_length();
        self.anchor.iter().map(|&a| (a as f64 + 0.5) * r).collect()
    }

    /// Closed-cube membership, decided exactly.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let scale = (self.level as f64).exp2();
        x.iter().zip(&self.anchor).all(|(&xj, &a)| {
            if !xj.is_finite() || xj < 0.0 {
                return false;
            }
            // Scaling by a power of two is exact, so `s` is x_j in grid units.
            let s = xj * scale;
            let fl = s.floor();
            if fl >= 18_446_744_073_709_551_616.0 {
                return false;
            }
            let fl = fl as u128;
            let a = a as u128;
            fl >= a && (fl < a + 1 || (fl == a + 1 && s == s.floor()))
        })
    }

    /// True when `other` is this cube or lies inside it.
    pub fn contains_cube(&self, other: &DyadicCube) -> bool {
        if other.dim() != self.dim() || other.level < self.level {
            return false;
        }
        let shift = other.level - self.level;
        other
            .anchor
            .iter()
            .zip(&self.anchor)
            .all(|(&o, &s)| o >> shift == s)
    }

    /// Ancestor at a coarser level.
    pub fn ancestor(&self, level: u32) -> Option<DyadicCube> {
        if level > self.level {
            return None;
        }
        let shift = self.level - level;
        Some(DyadicCube {
            level,
            anchor: self.anchor.iter().map(|&a| a >> shift).collect(),
        })
    }

    /// Number of children produced by [`DyadicCube::children`] for `ratio`.
    pub fn child_count(&self, ratio: u64) -> Result<u64> {
        let bits = ratio_bits(ratio)?;
        let total = bits as u64 * self.dim() as u64;
        if total >= 64 {
            return Err(crate::error::invalid(
                "ratio",
                format!("{ratio}^{} children overflow", self.dim()),
            ));
        }
        Ok(1u64 << total)
    }

    /// Split into `ratio^d` children of edge `r / ratio`.
    ///
    /// Children are listed in lexicographic anchor order, last coordinate
    /// fastest.
    pub fn children(&self, ratio: u64) -> Result<Vec<DyadicCube>> {
        let bits = ratio_bits(ratio)?;
        let level = self.level + bits;
        if level > MAX_LEVEL {
            return Err(crate::error::invalid(
                "ratio",
                format!("child level {level} exceeds {MAX_LEVEL}"),
            ));
        }
        let count = self.child_count(ratio)? as usize;
        let d = self.dim();
        let mut out = Vec::with_capacity(count);
        let mut offset = vec![0u64; d];
        for _ in 0..count {
            out.push(DyadicCube {
                level,
                anchor: self
                    .anchor
                    .iter()
                    .zip(&offset)
                    .map(|(&a, &o)| (a << bits) + o)
                    .collect(),
            });
            for j in (0..d).rev() {
                offset[j] += 1;
                if offset[j] < ratio {
                    break;
                }
                offset[j] = 0;
            }
        }
        Ok(out)
    }

    /// The level-`level` cube containing `x`, choosing the lower cell on
    /// shared faces (and the last cell at coordinate 1).
    pub fn containing(x: &[f64], level: u32) -> Result<DyadicCube> {
        if x.is_empty() {
            return Err(crate::error::invalid("x", "empty point"));
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutsideDomain);
        }
        let side = 1u64 << level;
        let scale = (level as f64).exp2();
        let anchor = x
            .iter()
            .map(|&v| ((v * scale).floor() as u64).min(side - 1))
            .collect();
        DyadicCube::new(level, anchor)
    }
}

/// `count` i.i.d. uniform points on `cube`, read sequentially from `stream`.
pub fn sample_uniform(cube: &DyadicCube, stream: &mut Stream, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| cube.sample(stream)).collect()
}

impl DyadicCube {
    /// One uniform point, drawing `dim` uniforms from `stream`.
    ///
    /// Exact for anchors below `2^53`; deeper anchors are rounded and then
    /// clamped to the cube's floating-point corners.
    pub fn sample(&self, stream: &mut Stream) -> Vec<f64> {
        let r = self.edge_length();
        self.anchor
            .iter()
            .map(|&a| {
                let x = (a as f64 + stream.uniform()) * r;
                x.clamp(a as f64 * r, (a + 1) as f64 * r)
            })
            .collect()
    }
}

/// `2^-level`.
pub fn edge_length(level: u32) -> f64 {
    (-(level as f64)).exp2()
}

/// `log2(ratio)` for a power-of-two ratio `>= 2`.
pub fn ratio_bits(ratio: u64) -> Result<u32> {
    if ratio < 2 || !ratio.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(ratio));
    }
    Ok(ratio.trailing_zeros())
}
