//! Lipschitz functions vanishing at the base point.
//!
//! On a finite space every Lipschitz function is "little Lipschitz" in the
//! literal sense, so the decay of the difference quotients at small scales is
//! measured through [`scale_lip_constant`] and [`scale_profile`] over a
//! refinement family of grids instead.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::math::{abs, ln, pow};
use crate::metric::PointedMetricSpace;

/// Relative slack accepted when checking a supplied Lipschitz bound.
pub const LIP_BOUND_SLACK: f64 = 1e-12;

/// Real values on the points of a space, zero at the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct LipFunction<'a> {
    space: &'a PointedMetricSpace,
    values: Vec<f64>,
}

impl<'a> LipFunction<'a> {
    pub fn new(space: &'a PointedMetricSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Dimension {
                expected: space.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(param("values", format!("non-finite value at point {i}")));
        }
        let at_base = values[space.base()];
        if at_base != 0.0 {
            return Err(Error::BaseValue(at_base));
        }
        Ok(Self { space, values })
    }

    /// Shifts `values` so that the base point maps to zero.
    pub fn normalized(space: &'a PointedMetricSpace, mut values: Vec<f64>) -> Result<Self> {
        if let Some(&b) = values.get(space.base()) {
            values.iter_mut().for_each(|v| *v -= b);
        }
        Self::new(space, values)
    }

    pub fn zero(space: &'a PointedMetricSpace) -> Self {
        Self {
            space,
            values: alloc::vec![0.0; space.len()],
        }
    }

    pub fn from_fn(space: &'a PointedMetricSpace, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::normalized(space, (0..space.len()).map(f).collect())
    }

    pub fn space(&self) -> &'a PointedMetricSpace {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `a * self + other`, both on the same space.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        if !core::ptr::eq(self.space, other.space) && self.space != other.space {
            return Err(param("other", "functions live on different spaces"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + y)
            .collect();
        Self::new(self.space, values)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            space: self.space,
            values: self.values.iter().map(|x| a * x).collect(),
        }
    }
}

/// Largest `|v_i - v_j| / d(i, j)^exponent` over the given pairs, with the
/// maximizing pair.
pub(crate) fn quotient_sup(
    space: &PointedMetricSpace,
    values: &[f64],
    pairs: impl Iterator<Item = (usize, usize)>,
    exponent: f64,
) -> (f64, Option<(usize, usize)>) {
    let mut best = (0.0, None);
    for (i, j) in pairs {
        let d = space.dist(i, j);
        let d = if exponent == 1.0 { d } else { pow(d, exponent) };
        let q = abs(values[i] - values[j]) / d;
        if q > best.0 || best.1.is_none() {
            best = (q, Some((i, j)));
        }
    }
    best
}

/// Lipschitz constant of arbitrary `values` on `space`.
pub fn lip_constant(space: &PointedMetricSpace, values: &[f64]) -> f64 {
    quotient_sup(space, values, space.pairs(), 1.0).0
}

/// Lipschitz constant for the metric `d^exponent` (exponent may exceed 1 when
/// `space` is itself a snowflake and the target exponent is coarser).
pub fn holder_constant(space: &PointedMetricSpace, values: &[f64], exponent: f64) -> f64 {
    quotient_sup(space, values, space.pairs(), exponent).0
}

/// The Lip₀ norm: exact supremum over all unordered pairs.
pub fn lip_norm(f: &LipFunction<'_>) -> f64 {
    lip_constant(f.space, &f.values)
}

pub fn sup_norm(f: &LipFunction<'_>) -> f64 {
    f.values.iter().fold(0.0, |m, v| m.max(abs(*v)))
}

/// Supremum of the difference quotients over pairs with `0 < d(s, t) < delta`.
pub fn scale_lip_constant(f: &LipFunction<'_>, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(param("delta", format!("{delta} must be positive")));
    }
    let space = f.space;
    let small = space.pairs().filter(|&(i, j)| space.dist(i, j) < delta);
    Ok(quotient_sup(space, &f.values, small, 1.0).0)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleProfile {
    pub deltas: Vec<f64>,
    pub constants: Vec<f64>,
    /// Least-squares slope of `ln constant` against `ln delta` over the
    /// positive constants; `None` when fewer than two are positive.
    pub slope_estimate: Option<f64>,
}

pub fn scale_profile(f: &LipFunction<'_>, deltas: &[f64]) -> Result<ScaleProfile> {
    check_decreasing(deltas)?;
    let space = f.space;
    // one pass over the pairs, bucketed by the smallest delta exceeding the distance
    let mut constants = alloc::vec![0.0f64; deltas.len()];
    for (i, j) in space.pairs() {
        let d = space.dist(i, j);
        let q = abs(f.values[i] - f.values[j]) / d;
        let covered = deltas.partition_point(|&delta| delta > d);
        if covered > 0 {
            let c = &mut constants[covered - 1];
            *c = c.max(q);
        }
    }
    // delta_k covers every pair counted at any later (smaller) delta
    for k in (0..deltas.len().saturating_sub(1)).rev() {
        constants[k] = constants[k].max(constants[k + 1]);
    }
    let points: Vec<(f64, f64)> = deltas
        .iter()
        .zip(&constants)
        .filter(|(_, &c)| c > 0.0)
        .map(|(&d, &c)| (ln(d), ln(c)))
        .collect();
    Ok(ScaleProfile {
        deltas: deltas.to_vec(),
        constants,
        slope_estimate: least_squares_slope(&points),
    })
}

pub(crate) fn check_decreasing(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(param("deltas", "empty list"));
    }
    if deltas.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(param("deltas", "every delta must be positive and finite"));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(param("deltas", "must be strictly decreasing"));
    }
    Ok(())
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Which extremal Lipschitz extension to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Extension {
    /// `min_q g(q) + L d(x, q)`, the largest extension.
    #[default]
    McShane,
    /// `max_q g(q) - L d(x, q)`, the smallest extension.
    Whitney,
    /// Midpoint of the two.
    Midpoint,
}

/// McShane extension of `known` (point index, value) to all of `space`.
pub fn mcshane_extend(space: &PointedMetricSpace, known: &[(usize, f64)], lip: f64) -> Result<Vec<f64>> {
    extend(space, known, lip, Extension::McShane)
}

pub fn extend(
    space: &PointedMetricSpace,
    known: &[(usize, f64)],
    lip: f64,
    kind: Extension,
) -> Result<Vec<f64>> {
    if known.is_empty() {
        return Err(param("known", "extension needs at least one anchor"));
    }
    if !(lip >= 0.0) || !lip.is_finite() {
        return Err(param("lip", format!("{lip} is not a finite nonnegative bound")));
    }
    for (a, &(p, gp)) in known.iter().enumerate() {
        if p >= space.len() {
            return Err(param("known", format!("point {p} out of range")));
        }
        for &(q, gq) in &known[a + 1..] {
            if p == q {
                if gp != gq {
                    return Err(param("known", format!("point {p} given two values")));
                }
                continue;
            }
            let d = space.dist(p, q);
            let quotient = abs(gp - gq) / d;
            if quotient > lip * (1.0 + LIP_BOUND_SLACK) {
                return Err(Error::LipschitzBound {
                    i: p,
                    j: q,
                    quotient,
                    bound: lip,
                });
            }
        }
    }
    let upper = |x: usize| {
        known
            .iter()
            .map(|&(q, g)| g + lip * space.dist(x, q))
            .fold(f64::INFINITY, f64::min)
    };
    let lower = |x: usize| {
        known
            .iter()
            .map(|&(q, g)| g - lip * space.dist(x, q))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut out: Vec<f64> = (0..space.len())
        .map(|x| match kind {
            Extension::McShane => upper(x),
            Extension::Whitney => lower(x),
            Extension::Midpoint => 0.5 * (upper(x) + lower(x)),
        })
        .collect();
    // anchors reproduce g exactly, independent of rounding in g + L * 0
    for &(q, g) in known {
        out[q] = g;
    }
    Ok(out)
}
