//! The de Leeuw embedding into functions on off-diagonal pairs, and the
//! weighted sequence embedding with difference-quotient functionals.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{param, Result};
use crate::lip::{check_decreasing, lip_norm, LipFunction};
use crate::math::{abs, pow, sqrt};
use crate::metric::{max_separated_set, Enumeration, PointedMetricSpace, SeparatedSet};

/// The off-diagonal set `(M × M) \ Δ` of a space: every ordered pair `(i, j)`,
/// `i != j`, listed row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSpace {
    n: usize,
    pairs: Vec<(usize, usize)>,
    pair_dist: Vec<f64>,
}

impl PairSpace {
    pub fn new(space: &PointedMetricSpace) -> Self {
        let n = space.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let pair_dist = pairs.iter().map(|&(i, j)| space.dist(i, j)).collect();
        Self { n, pairs, pair_dist }
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_dist(&self) -> &[f64] {
        &self.pair_dist
    }

    /// Position of the ordered pair `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        if i == j || i >= self.n || j >= self.n {
            return None;
        }
        Some(i * (self.n - 1) + if j < i { j } else { j - 1 })
    }

    /// Position of `(j, i)` given the position of `(i, j)`.
    pub fn swapped(&self, k: usize) -> usize {
        let (i, j) = self.pairs[k];
        j * (self.n - 1) + if i < j { i } else { i - 1 }
    }
}

/// A real function on a [`PairSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairFunction<'a> {
    pair_space: &'a PairSpace,
    values: Vec<f64>,
}

impl<'a> PairFunction<'a> {
    pub fn new(pair_space: &'a PairSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != pair_space.len() {
            return Err(crate::Error::Dimension {
                expected: pair_space.len(),
                found: values.len(),
            });
        }
        Ok(Self { pair_space, values })
    }

    pub fn pair_space(&self) -> &'a PairSpace {
        self.pair_space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(abs(*v)))
    }

    /// `true` when `values(i, j) == -values(j, i)` for every pair.
    pub fn is_antisymmetric(&self) -> bool {
        (0..self.values.len()).all(|k| self.values[k] == -self.values[self.pair_space.swapped(k)])
    }
}

/// `(ΦF)(s, t) = (F(s) - F(t)) / d(s, t)`.
pub fn deleeuw_map<'a>(pair_space: &'a PairSpace, f: &LipFunction<'_>) -> Result<PairFunction<'a>> {
    let v = f.values();
    if v.len() != pair_space.points() {
        return Err(crate::Error::Dimension {
            expected: pair_space.points(),
            found: v.len(),
        });
    }
    let values = pair_space
        .pairs
        .iter()
        .zip(&pair_space.pair_dist)
        .map(|(&(i, j), &d)| (v[i] - v[j]) / d)
        .collect();
    Ok(PairFunction { pair_space, values })
}

/// For each δ, `sup { |f(s, t)| : d(s, t) < δ }`, zero when no pair is that close.
pub fn c0_profile(f: &PairFunction<'_>, deltas: &[f64]) -> Result<Vec<f64>> {
    check_decreasing(deltas)?;
    let ps = f.pair_space;
    Ok(deltas
        .iter()
        .map(|&delta| {
            ps.pair_dist
                .iter()
                .zip(&f.values)
                .filter(|(&d, _)| d < delta)
                .fold(0.0f64, |m, (_, v)| m.max(abs(*v)))
        })
        .collect())
}

/// Summable geometric weights `w_k = (1 - ratio) ratio^(k-1)`, `k = 1, 2, ...`.
///
/// The default ratio 1/2 gives `w_k = 2^-k`. Any ratio in (0, 1) keeps the
/// total weight of the first `N` entries at `1 - ratio^N < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeometricWeights {
    ratio: f64,
}

impl GeometricWeights {
    pub fn new(ratio: f64) -> Result<Self> {
        if ratio > 0.0 && ratio < 1.0 {
            Ok(Self { ratio })
        } else {
            Err(param("ratio", format!("{ratio} is outside (0, 1)")))
        }
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Weight of the `k`-th entry, `k >= 1`.
    pub fn weight(&self, k: usize) -> f64 {
        (1.0 - self.ratio) * pow(self.ratio, (k - 1) as f64)
    }

    pub fn take(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|k| self.weight(k)).collect()
    }
}

impl Default for GeometricWeights {
    fn default() -> Self {
        Self { ratio: 0.5 }
    }
}

/// Truncated element of the weighted ℓ² space `{ x : Σ |x_k|² w_k < ∞ }`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightedSeqVector {
    pub entries: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeightedSeqVector {
    pub fn norm(&self) -> f64 {
        sqrt(
            self.entries
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| x * x * w)
                .sum(),
        )
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.entries.len() != other.entries.len() || self.weights != other.weights {
            return Err(param("other", "vectors use different lengths or weights"));
        }
        Ok(sqrt(
            self.entries
                .iter()
                .zip(&other.entries)
                .zip(&self.weights)
                .map(|((x, y), w)| (x - y) * (x - y) * w)
                .sum(),
        ))
    }
}

/// `x_F = (F(p_1), F(p_2), ...)` along the enumeration.
pub fn sequence_embed(
    f: &LipFunction<'_>,
    enumeration: &Enumeration,
    weights: GeometricWeights,
) -> Result<WeightedSeqVector> {
    check_enumeration(f, enumeration)?;
    let v = f.values();
    Ok(WeightedSeqVector {
        entries: enumeration.as_slice().iter().map(|&p| v[p]).collect(),
        weights: weights.take(enumeration.len()),
    })
}

fn check_enumeration(f: &LipFunction<'_>, enumeration: &Enumeration) -> Result<()> {
    let space = f.space();
    if enumeration.len() != space.len() || enumeration.as_slice().first() != Some(&space.base()) {
        return Err(param(
            "enumeration",
            "does not enumerate this space from its base point",
        ));
    }
    Ok(())
}

/// `ℓ_{n,m}(x) = (x_n - x_m) / d(p_n, p_m)` with positions `n`, `m` in the
/// enumeration (zero-based).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiffQuotientFunctional {
    pub n: usize,
    pub m: usize,
    distance: f64,
}

impl DiffQuotientFunctional {
    pub fn scale(&self) -> f64 {
        1.0 / self.distance
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn apply(&self, x: &WeightedSeqVector) -> f64 {
        (x.entries[self.n] - x.entries[self.m]) / self.distance
    }
}

/// Every functional `ℓ_{n,m}`, `n != m`, for the enumeration.
pub fn functionals(space: &PointedMetricSpace, enumeration: &Enumeration) -> Vec<DiffQuotientFunctional> {
    let p = enumeration.as_slice();
    let len = p.len();
    (0..len)
        .flat_map(|n| (0..len).filter(move |&m| m != n).map(move |m| (n, m)))
        .map(|(n, m)| DiffQuotientFunctional {
            n,
            m,
            distance: space.dist(p[n], p[m]),
        })
        .collect()
}

/// `sup_{n != m} ℓ_{n,m}(x_F)`.
pub fn functional_sup(f: &LipFunction<'_>, enumeration: &Enumeration) -> Result<f64> {
    let x = sequence_embed(f, enumeration, GeometricWeights::default())?;
    Ok(functionals(f.space(), enumeration)
        .iter()
        .map(|l| l.apply(&x))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct C0Bound {
    /// Minimum distance over pairs whose quotient reaches ε; `None` stands for
    /// +∞ (no such pair).
    pub delta: Option<f64>,
    /// Number of unordered pairs with quotient at least ε.
    pub exceptional_pairs: usize,
    /// A δ-separated set of the whole space, when δ is finite.
    pub packing: Option<SeparatedSet>,
    /// Every offending pair is δ-separated and the packing holds at least two
    /// points whenever an offending pair exists.
    pub consistent: bool,
}

/// Scale below which every difference quotient of `f` is smaller than `eps`.
pub fn c0_membership_bound(f: &LipFunction<'_>, eps: f64) -> Result<C0Bound> {
    if !(eps > 0.0) {
        return Err(param("eps", format!("{eps} must be positive")));
    }
    let space = f.space();
    let v = f.values();
    let mut delta = None::<f64>;
    let mut count = 0;
    for (i, j) in space.pairs() {
        let d = space.dist(i, j);
        if abs(v[i] - v[j]) / d >= eps {
            count += 1;
            delta = Some(delta.map_or(d, |m| m.min(d)));
        }
    }
    let (packing, consistent) = match delta {
        None => (None, lip_norm(f) < eps),
        Some(delta) => {
            let set = max_separated_set(space, delta)?;
            let separated = space
                .pairs()
                .filter(|&(i, j)| abs(v[i] - v[j]) / space.dist(i, j) >= eps)
                .all(|(i, j)| space.dist(i, j) >= delta);
            let ok = separated && set.len() >= 2;
            (Some(set), ok)
        }
    };
    Ok(C0Bound {
        delta,
        exceptional_pairs: count,
        packing,
        consistent,
    })
}
