//! Finite pointed metric spaces.
//!
//! A [`PointedMetricSpace`] is a dense symmetric distance matrix together with
//! a distinguished base point. Construction validates the metric axioms; the
//! transforms here (snowflaking, interval grids, point clouds) produce valid
//! spaces by construction.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::error::{param, Error, Result};
use crate::math::{abs, pow};

/// Default relative tolerance for the triangle inequality and symmetry checks.
pub const DEFAULT_METRIC_TOLERANCE: f64 = 1e-12;

/// Default number of points up to which [`max_separated_set`] is exact.
pub const DEFAULT_EXACT_PACKING_LIMIT: usize = 25;

/// Hard ceiling for the exact packing search (bitmask width).
pub const MAX_EXACT_PACKING: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationConfig {
    /// Tolerance relative to the largest distance involved in a comparison.
    pub tolerance: f64,
    /// Maximum number of violations kept in a report.
    pub cap: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_METRIC_TOLERANCE,
            cap: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Violation {
    NonFinite {
        i: usize,
        j: usize,
    },
    Diagonal {
        i: usize,
        value: f64,
    },
    Asymmetry {
        i: usize,
        j: usize,
        defect: f64,
    },
    NonPositive {
        i: usize,
        j: usize,
        value: f64,
    },
    /// `d(i, k) > d(i, j) + d(j, k)` by `defect`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        defect: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricValidationReport {
    pub ok: bool,
    /// Axiom violations, worst triangle defects first, truncated to the cap.
    pub violations: Vec<Violation>,
    /// Number of violations found before truncation.
    pub total: usize,
}

/// Validates a square distance matrix with the default configuration.
pub fn validate_metric(dist: &[Vec<f64>]) -> Result<MetricValidationReport> {
    validate_metric_with(dist, &ValidationConfig::default())
}

pub fn validate_metric_with(dist: &[Vec<f64>], config: &ValidationConfig) -> Result<MetricValidationReport> {
    let n = dist.len();
    let mut flat = Vec::with_capacity(n * n);
    for (row, r) in dist.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare { row, len: r.len(), n });
        }
        flat.extend_from_slice(r);
    }
    Ok(validate_flat(n, &flat, config))
}

fn validate_flat(n: usize, d: &[f64], config: &ValidationConfig) -> MetricValidationReport {
    let at = |i: usize, j: usize| d[i * n + j];
    let tol = config.tolerance;
    let mut axioms = Vec::new();
    let mut triangles = Vec::new();
    let mut total = 0usize;
    let mut finite = true;

    for i in 0..n {
        for j in 0..n {
            let v = at(i, j);
            if !v.is_finite() {
                finite = false;
                total += 1;
                axioms.push(Violation::NonFinite { i, j });
                continue;
            }
            if i == j {
                if v != 0.0 {
                    total += 1;
                    axioms.push(Violation::Diagonal { i, value: v });
                }
                continue;
            }
            if v <= 0.0 {
                total += 1;
                axioms.push(Violation::NonPositive { i, j, value: v });
            }
            if i < j {
                let w = at(j, i);
                if w.is_finite() {
                    let defect = abs(v - w);
                    if defect > tol * abs(v).max(abs(w)) {
                        total += 1;
                        axioms.push(Violation::Asymmetry { i, j, defect });
                    }
                }
            }
        }
    }

    if finite {
        for i in 0..n {
            for k in (i + 1)..n {
                let dik = at(i, k);
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let (dij, djk) = (at(i, j), at(j, k));
                    let defect = dik - (dij + djk);
                    if defect > tol * dik.max(dij).max(djk) {
                        total += 1;
                        triangles.push(Violation::Triangle { i, j, k, defect });
                        if triangles.len() > 4 * config.cap.max(1) {
                            keep_worst(&mut triangles, config.cap);
                        }
                    }
                }
            }
        }
    }

    keep_worst(&mut triangles, config.cap);
    axioms.truncate(config.cap);
    let room = config.cap.saturating_sub(axioms.len());
    triangles.truncate(room);
    axioms.extend(triangles);
    MetricValidationReport {
        ok: total == 0,
        violations: axioms,
        total,
    }
}

fn keep_worst(triangles: &mut Vec<Violation>, cap: usize) {
    let defect = |v: &Violation| match v {
        Violation::Triangle { defect, .. } => *defect,
        _ => 0.0,
    };
    triangles.sort_by(|a, b| defect(b).total_cmp(&defect(a)));
    triangles.truncate(cap);
}

/// Norm used to turn a point cloud into a distance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PNorm {
    L1,
    L2,
    LInf,
}

impl PNorm {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| abs(x - y));
        match self {
            PNorm::L1 => diffs.sum(),
            PNorm::L2 => crate::math::sqrt(diffs.map(|x| x * x).sum()),
            PNorm::LInf => diffs.fold(0.0, f64::max),
        }
    }
}

/// A finite metric space with a distinguished base point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PointedMetricSpace {
    n: usize,
    dist: Vec<f64>,
    base: usize,
    labels: Option<Vec<String>>,
}

impl PointedMetricSpace {
    /// Builds a space from a square matrix, rejecting any axiom violation.
    pub fn new(dist: Vec<Vec<f64>>, base: usize) -> Result<Self> {
        Self::with_config(dist, base, &ValidationConfig::default())
    }

    pub fn with_config(dist: Vec<Vec<f64>>, base: usize, config: &ValidationConfig) -> Result<Self> {
        let report = validate_metric_with(&dist, config)?;
        let n = dist.len();
        if n == 0 {
            return Err(param("dist", "a metric space needs at least one point"));
        }
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidMetric(format!(
                "{} violation(s), first: {:?}",
                report.total, v
            )));
        }
        if base >= n {
            return Err(param("base", format!("index {base} out of range for {n} points")));
        }
        Ok(Self {
            n,
            dist: dist.into_iter().flatten().collect(),
            base,
            labels: None,
        })
    }

    /// Builds a space from points in R^k under the given norm.
    pub fn from_points(points: &[Vec<f64>], norm: PNorm, base: usize) -> Result<Self> {
        let k = points.first().map_or(0, Vec::len);
        if let Some(bad) = points.iter().find(|p| p.len() != k) {
            return Err(Error::Dimension {
                expected: k,
                found: bad.len(),
            });
        }
        let dist = points
            .iter()
            .map(|a| points.iter().map(|b| norm.distance(a, b)).collect())
            .collect();
        Self::new(dist, base)
    }

    /// Trusted constructor for matrices that are metrics by construction.
    pub(crate) fn from_flat_unchecked(n: usize, dist: Vec<f64>, base: usize) -> Self {
        debug_assert_eq!(dist.len(), n * n);
        Self {
            n,
            dist,
            base,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_base(mut self, base: usize) -> Result<Self> {
        if base >= self.n {
            return Err(param(
                "base",
                format!("index {base} out of range for {} points", self.n),
            ));
        }
        self.base = base;
        Ok(self)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn base(&self) -> usize {
        self.base
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.as_ref()?.iter().position(|l| l == label)
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest distance between distinct points, `None` for a one-point space.
    pub fn min_positive_distance(&self) -> Option<f64> {
        self.pairs().map(|(i, j)| self.dist(i, j)).reduce(f64::min)
    }

    /// Unordered pairs `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }

    /// Raises every distance to `exponent` without validating the result.
    pub(crate) fn powered(&self, exponent: f64) -> Self {
        let dist = if exponent == 1.0 {
            self.dist.clone()
        } else {
            self.dist.iter().map(|&d| pow(d, exponent)).collect()
        };
        Self {
            n: self.n,
            dist,
            base: self.base,
            labels: self.labels.clone(),
        }
    }
}

pub(crate) fn check_exponent(name: &'static str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(param(name, format!("{alpha} is outside (0, 1]")))
    }
}

/// The snowflaked space `(M, d^alpha)`.
pub fn snowflake(space: &PointedMetricSpace, alpha: f64) -> Result<PointedMetricSpace> {
    check_exponent("alpha", alpha)?;
    Ok(space.powered(alpha))
}

/// Grid coordinates `k / (n - 1)` for `k = 0..n`.
pub fn grid_points(n: usize) -> Vec<f64> {
    let m = (n.max(2) - 1) as f64;
    (0..n).map(|k| k as f64 / m).collect()
}

/// Uniform `n`-point grid on `[0, 1]` with the metric `|s - t|^alpha`, based at 0.
pub fn interval_space(n: usize, alpha: f64) -> Result<PointedMetricSpace> {
    if n < 2 {
        return Err(param(
            "n",
            format!("interval grid needs at least 2 points, got {n}"),
        ));
    }
    check_exponent("alpha", alpha)?;
    let m = (n - 1) as f64;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                // integer gap keeps grid distances exact before the power
                let gap = i.abs_diff(j) as f64 / m;
                dist[i * n + j] = if alpha == 1.0 { gap } else { pow(gap, alpha) };
            }
        }
    }
    Ok(PointedMetricSpace::from_flat_unchecked(n, dist, 0))
}

/// An ordering `p_1, p_2, ...` of all points starting at the base point.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Enumeration(Vec<usize>);

impl Enumeration {
    pub fn new(space: &PointedMetricSpace, order: Vec<usize>) -> Result<Self> {
        let n = space.len();
        if order.len() != n {
            return Err(param(
                "enumeration",
                format!("has {} entries for {n} points", order.len()),
            ));
        }
        let mut seen = vec![false; n];
        for &p in &order {
            if p >= n || core::mem::replace(&mut seen[p], true) {
                return Err(param("enumeration", format!("not a permutation (entry {p})")));
            }
        }
        if order[0] != space.base() {
            return Err(param("enumeration", "must start at the base point"));
        }
        Ok(Self(order))
    }

    /// Base point first, then the remaining points in index order.
    pub fn base_first(space: &PointedMetricSpace) -> Self {
        let b = space.base();
        Self(
            core::iter::once(b)
                .chain((0..space.len()).filter(|&i| i != b))
                .collect(),
        )
    }

    /// Breadth-first bisection of the index range: for a grid with `2^m + 1`
    /// points this lists the dyadic rationals level by level (0, 1, 1/2, 1/4,
    /// 3/4, ...). Requires the base point to be index 0.
    pub fn dyadic(space: &PointedMetricSpace) -> Result<Self> {
        let n = space.len();
        let mut order = vec![0];
        if n > 1 {
            order.push(n - 1);
            let mut queue = alloc::collections::VecDeque::from([(0usize, n - 1)]);
            while let Some((lo, hi)) = queue.pop_front() {
                if hi - lo >= 2 {
                    let mid = lo + (hi - lo) / 2;
                    order.push(mid);
                    queue.push_back((lo, mid));
                    queue.push_back((mid, hi));
                }
            }
        }
        Self::new(space, order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The first `n` points `P_n` (all points when `n` exceeds the count).
    pub fn prefix(&self, n: usize) -> &[usize] {
        &self.0[..n.min(self.0.len())]
    }
}

/// A δ-separated subset of points.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparatedSet {
    /// Sorted point indices.
    pub indices: Vec<usize>,
    /// `true` when the cardinality is certified maximum; otherwise a lower bound.
    pub exact: bool,
}

impl SeparatedSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Largest subset with pairwise distances at least `delta`.
pub fn max_separated_set(space: &PointedMetricSpace, delta: f64) -> Result<SeparatedSet> {
    max_separated_set_with(space, delta, DEFAULT_EXACT_PACKING_LIMIT)
}

/// As [`max_separated_set`], exact by branch-and-bound for up to `exact_limit`
/// points (capped at [`MAX_EXACT_PACKING`]) and greedy above.
pub fn max_separated_set_with(
    space: &PointedMetricSpace,
    delta: f64,
    exact_limit: usize,
) -> Result<SeparatedSet> {
    if !(delta > 0.0) {
        return Err(param("delta", format!("{delta} must be positive")));
    }
    let n = space.len();
    let conflicts = |i: usize, j: usize| i != j && space.dist(i, j) < delta;
    if n <= exact_limit.min(MAX_EXACT_PACKING) {
        let adj: Vec<u64> = (0..n)
            .map(|i| (0..n).filter(|&j| conflicts(i, j)).fold(0u64, |m, j| m | 1 << j))
            .collect();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut best = 0u64;
        independent_bb(&adj, all, 0, &mut best);
        let indices = (0..n).filter(|&i| best >> i & 1 == 1).collect();
        Ok(SeparatedSet { indices, exact: true })
    } else {
        let mut alive = vec![true; n];
        let mut degree: Vec<usize> = (0..n)
            .map(|i| (0..n).filter(|&j| conflicts(i, j)).count())
            .collect();
        let mut chosen = Vec::new();
        while let Some(v) = (0..n).filter(|&i| alive[i]).min_by_key(|&i| degree[i]) {
            chosen.push(v);
            let removed: Vec<usize> = (0..n)
                .filter(|&j| alive[j] && (j == v || conflicts(v, j)))
                .collect();
            for &r in &removed {
                alive[r] = false;
            }
            for j in 0..n {
                if alive[j] {
                    degree[j] -= removed.iter().filter(|&&r| conflicts(j, r)).count();
                }
            }
        }
        if chosen.len() < 2 {
            if let Some((i, j)) = space.pairs().find(|&(i, j)| space.dist(i, j) >= delta) {
                chosen = vec![i, j];
            }
        }
        chosen.sort_unstable();
        Ok(SeparatedSet {
            indices: chosen,
            exact: false,
        })
    }
}

fn independent_bb(adj: &[u64], cand: u64, current: u64, best: &mut u64) {
    if cand == 0 {
        if current.count_ones() > best.count_ones() {
            *best = current;
        }
        return;
    }
    if current.count_ones() + cand.count_ones() <= best.count_ones() {
        return;
    }
    let mut pick = None;
    let mut max_deg = (0usize, 0u32);
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let deg = (adj[v] & cand).count_ones();
        // a vertex with at most one neighbour lies in some maximum set
        if deg <= 1 {
            pick = Some(v);
            break;
        }
        if deg > max_deg.1 {
            max_deg = (v, deg);
        }
    }
    if let Some(v) = pick {
        let bit = 1u64 << v;
        independent_bb(adj, cand & !bit & !adj[v], current | bit, best);
        return;
    }
    let v = max_deg.0;
    let bit = 1u64 << v;
    independent_bb(adj, cand & !bit & !adj[v], current | bit, best);
    independent_bb(adj, cand & !bit, current, best);
}
