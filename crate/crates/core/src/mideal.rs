//! M-ideal machinery in finite sup-norm models.
//!
//! A model is a finite set of sites with the sup norm; `E₀` is modeled either
//! by a coordinate support (sequence model) or by an image of little
//! Lipschitz functions (de Leeuw model, see [`DeLeeuwOracle`]). The witness
//! construction averages `r > 1/ε` approximants of `f` chosen against a
//! growing chain of "compact" site sets, which bounds
//! `max_i ‖f + g_i − g‖` by `1 + 3ε`.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::approx::{little_lip_approximant, truncation_oracle};
use crate::embed::PairSpace;
use crate::error::{param, Error, Result};
use crate::lip::LipFunction;
use crate::math::{abs, compensated_sum};
use crate::metric::Enumeration;

/// Slack for every norm comparison in this module.
pub const SLACK: f64 = 1e-12;

/// A subset of the sites of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "Vec<usize>", from = "SiteSetRepr"))]
pub struct SiteSet {
    mask: Vec<bool>,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct SiteSetRepr(Vec<usize>);

#[cfg(feature = "serde")]
impl From<SiteSetRepr> for SiteSet {
    fn from(r: SiteSetRepr) -> Self {
        let n = r.0.iter().max().map_or(0, |m| m + 1);
        SiteSet::from_indices(n, &r.0)
    }
}

#[cfg(feature = "serde")]
impl From<SiteSet> for Vec<usize> {
    fn from(s: SiteSet) -> Self {
        s.indices()
    }
}

impl SiteSet {
    pub fn empty(sites: usize) -> Self {
        Self {
            mask: vec![false; sites],
        }
    }

    pub fn full(sites: usize) -> Self {
        Self {
            mask: vec![true; sites],
        }
    }

    /// Indices beyond `sites` are ignored.
    pub fn from_indices(sites: usize, indices: &[usize]) -> Self {
        let mut s = Self::empty(sites);
        for &i in indices {
            if i < sites {
                s.mask[i] = true;
            }
        }
        s
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn sites(&self) -> usize {
        self.mask.len()
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, i: usize) {
        self.mask[i] = true;
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn is_superset(&self, other: &Self) -> bool {
        other
            .mask
            .iter()
            .enumerate()
            .all(|(i, &b)| !b || self.contains(i))
    }

    pub fn union(&self, other: &Self) -> Self {
        let n = self.mask.len().max(other.mask.len());
        Self {
            mask: (0..n).map(|i| self.contains(i) || other.contains(i)).collect(),
        }
    }
}

/// `max |v(t)|` over `t ∈ set` (0 on an empty set).
pub fn sup_on(v: &[f64], set: &SiteSet) -> f64 {
    v.iter()
        .enumerate()
        .filter(|(i, _)| set.contains(*i))
        .fold(0.0, |m, (_, x)| m.max(abs(*x)))
}

/// `max |v(t)|` over `t ∉ set`.
pub fn sup_off(v: &[f64], set: &SiteSet) -> f64 {
    v.iter()
        .enumerate()
        .filter(|(i, _)| !set.contains(*i))
        .fold(0.0, |m, (_, x)| m.max(abs(*x)))
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(abs(*x)))
}

/// Finite sup-norm model: `E` is all of `ℝ^sites`, and `E₀` the vectors
/// vanishing off `e0_support`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SupModel {
    pub sites: usize,
    pub e0_support: SiteSet,
}

impl SupModel {
    pub fn new(sites: usize, support: &[usize]) -> Result<Self> {
        if let Some(&bad) = support.iter().find(|&&i| i >= sites) {
            return Err(param(
                "support",
                format!("site {bad} out of range for {sites} sites"),
            ));
        }
        Ok(Self {
            sites,
            e0_support: SiteSet::from_indices(sites, support),
        })
    }

    /// `E₀` supported on the first `m` sites.
    pub fn prefix(sites: usize, m: usize) -> Result<Self> {
        Self::new(sites, &(0..m.min(sites)).collect::<Vec<_>>())
    }

    /// Every site is in the support; membership in `E₀` is then decided by
    /// the density oracle.
    pub fn full(sites: usize) -> Self {
        Self {
            sites,
            e0_support: SiteSet::full(sites),
        }
    }

    /// First site where `v` is nonzero off the support.
    pub fn outside_support(&self, v: &[f64]) -> Option<usize> {
        (0..v.len()).find(|&i| !self.e0_support.contains(i) && v[i] != 0.0)
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.sites {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.sites,
                found: v.len(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LProjection {
    /// `‖x*‖₁`.
    pub lhs: f64,
    /// `‖P x*‖₁ + ‖x* − P x*‖₁`.
    pub rhs: f64,
    pub ok: bool,
}

/// Checks `‖x*‖ = ‖P x*‖ + ‖x* − P x*‖` for the ℓ¹ dual of the sup-norm
/// model with `P` the restriction to the support.
pub fn l_projection_check(xstar: &[f64], support: &SiteSet) -> Result<LProjection> {
    if let Some(i) = xstar.iter().position(|x| !x.is_finite()) {
        return Err(param("xstar", format!("non-finite entry at {i}")));
    }
    let lhs = compensated_sum(xstar.iter().map(|x| abs(*x)));
    let projected =
        compensated_sum(
            xstar
                .iter()
                .enumerate()
                .map(|(i, x)| if support.contains(i) { abs(*x) } else { 0.0 }),
        );
    let remainder =
        compensated_sum(
            xstar
                .iter()
                .enumerate()
                .map(|(i, x)| if support.contains(i) { 0.0 } else { abs(*x) }),
        );
    let rhs = projected + remainder;
    Ok(LProjection {
        lhs,
        rhs,
        ok: abs(lhs - rhs) <= SLACK * lhs.max(rhs),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThreeBallOptimum {
    /// `min_{y ∈ E₀} max_i ‖f + g_i − y‖`.
    pub value: f64,
    pub center: Vec<f64>,
}

/// Exact minimizer of `max_i ‖f + g_i − y‖` over `y` supported on the model's
/// `E₀` support: per site the Chebyshev center of the three values.
pub fn three_ball_oracle(f: &[f64], g: [&[f64]; 3], model: &SupModel) -> Result<ThreeBallOptimum> {
    check_three_ball_inputs(f, g, model)?;
    let mut center = vec![0.0; model.sites];
    let mut value = 0.0f64;
    for t in 0..model.sites {
        let v = [f[t] + g[0][t], f[t] + g[1][t], f[t] + g[2][t]];
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let local = if model.e0_support.contains(t) {
            center[t] = 0.5 * (hi + lo);
            0.5 * (hi - lo)
        } else {
            abs(hi).max(abs(lo))
        };
        value = value.max(local);
    }
    Ok(ThreeBallOptimum { value, center })
}

fn check_three_ball_inputs(f: &[f64], g: [&[f64]; 3], model: &SupModel) -> Result<()> {
    model.check_len(f)?;
    let nf = sup_norm(f);
    if nf > 1.0 + SLACK {
        return Err(Error::NormExceeded { what: "f", value: nf });
    }
    const NAMES: [&str; 3] = ["g1", "g2", "g3"];
    for (gi, name) in g.iter().zip(NAMES) {
        model.check_len(gi)?;
        let n = sup_norm(gi);
        if n > 1.0 + SLACK {
            return Err(Error::NormExceeded { what: name, value: n });
        }
        if let Some(site) = model.outside_support(gi) {
            return Err(Error::OutsideSupport { what: name, site });
        }
    }
    Ok(())
}

/// Supplies elements of the `E₀` ball approximating a target on a compact
/// set, and compact sets outside of which a given element is small.
pub trait DensityOracle {
    /// `h` with `‖h‖ ≤ 1`, `h ∈ E₀` and `‖f − h‖` on `k` at most `eps`.
    fn approximate(&mut self, f: &[f64], k: &SiteSet, eps: f64) -> Result<Vec<f64>>;

    /// `k' ⊇ k` with `‖h‖` off `k'` at most `eps`.
    fn enlarge(&mut self, k: &SiteSet, h: &[f64], eps: f64) -> Result<SiteSet>;
}

/// Density oracle of the sequence model: truncation of `f` to the smallest
/// prefix covering the compact set, restricted to the `E₀` support.
#[derive(Debug, Clone)]
pub struct TruncationOracle {
    support: SiteSet,
}

impl TruncationOracle {
    pub fn new(model: &SupModel) -> Self {
        Self {
            support: model.e0_support.clone(),
        }
    }
}

impl DensityOracle for TruncationOracle {
    fn approximate(&mut self, f: &[f64], k: &SiteSet, eps: f64) -> Result<Vec<f64>> {
        if !self.support.is_superset(k) {
            return Err(param("k", "compact set leaves the ideal support"));
        }
        let mut h = truncation_oracle(f, &k.indices(), eps)?;
        for (i, v) in h.iter_mut().enumerate() {
            if !self.support.contains(i) {
                *v = 0.0;
            }
        }
        Ok(h)
    }

    fn enlarge(&mut self, k: &SiteSet, h: &[f64], eps: f64) -> Result<SiteSet> {
        let mut out = k.clone();
        for (i, v) in h.iter().enumerate() {
            if abs(*v) > eps {
                out.insert(i);
            }
        }
        Ok(out)
    }
}

/// Density oracle of the de Leeuw model over a snowflaked space `M^α`: the
/// target is `ΦF`, approximants are `Φf_n` for the pipeline steps
/// `n = 1, 2, 4, ...`, and compact sets are `{pairs with d ≥ δ}`.
#[derive(Debug, Clone)]
pub struct DeLeeuwOracle<'a> {
    target: LipFunction<'a>,
    alpha: f64,
    enumeration: Enumeration,
    pairs: PairSpace,
    max_step: usize,
    /// Pipeline step used for each approximant, in call order.
    pub steps_used: Vec<usize>,
}

impl<'a> DeLeeuwOracle<'a> {
    pub fn new(target: LipFunction<'a>, alpha: f64, enumeration: Enumeration) -> Self {
        let pairs = PairSpace::new(target.space());
        Self {
            target,
            alpha,
            enumeration,
            pairs,
            max_step: 1 << 24,
            steps_used: Vec::new(),
        }
    }

    pub fn pair_space(&self) -> &PairSpace {
        &self.pairs
    }

    fn image(&self, values: &[f64]) -> Vec<f64> {
        self.pairs
            .pairs()
            .iter()
            .zip(self.pairs.pair_dist())
            .map(|(&(i, j), &d)| (values[i] - values[j]) / d)
            .collect()
    }
}

impl DensityOracle for DeLeeuwOracle<'_> {
    fn approximate(&mut self, f: &[f64], k: &SiteSet, eps: f64) -> Result<Vec<f64>> {
        let target = self.image(self.target.values());
        if f.len() != target.len()
            || f.iter()
                .zip(&target)
                .any(|(a, b)| abs(a - b) > SLACK * abs(*b).max(1.0))
        {
            return Err(param("f", "de Leeuw oracle called with a foreign target"));
        }
        let mut n = 1;
        while n <= self.max_step {
            let step = little_lip_approximant(&self.target, self.alpha, n, &self.enumeration)?;
            let h = self.image(&step.f_n);
            let miss = f
                .iter()
                .zip(&h)
                .enumerate()
                .filter(|(t, _)| k.contains(*t))
                .fold(0.0f64, |m, (_, (a, b))| m.max(abs(a - b)));
            if miss <= eps {
                self.steps_used.push(n);
                return Ok(h);
            }
            n *= 2;
        }
        Err(param(
            "eps",
            format!("no approximant within {eps} up to step {}", self.max_step),
        ))
    }

    fn enlarge(&mut self, k: &SiteSet, h: &[f64], eps: f64) -> Result<SiteSet> {
        // δ = smallest distance carrying a value above eps; pairs closer than δ are small
        let delta = self
            .pairs
            .pair_dist()
            .iter()
            .zip(h)
            .filter(|(_, v)| abs(**v) > eps)
            .map(|(&d, _)| d)
            .reduce(f64::min);
        let mut out = k.clone();
        if let Some(delta) = delta {
            for (t, &d) in self.pairs.pair_dist().iter().enumerate() {
                if d >= delta {
                    out.insert(t);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", content = "u", rename_all = "snake_case")
)]
pub enum Region {
    /// `K₀`.
    Core,
    /// `K_u \ K_{u−1}`, `1 ≤ u ≤ r − 1`.
    Shell(usize),
    /// Complement of `K_{r−1}`.
    Tail,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionBound {
    pub region: Region,
    pub sites: usize,
    /// `max_i max_t |f + g_i − g|` over the region, `None` when empty.
    pub empirical: Option<f64>,
    /// `1 + ε`, `1 + 2ε` or `1 + 3ε`.
    pub cap: f64,
    /// For shells, `(u + 1)/r + ((r − 1)/r + 1) ε`; equals `cap` elsewhere.
    pub sharp_cap: f64,
}

impl RegionBound {
    pub fn holds(&self) -> bool {
        self.empirical
            .is_none_or(|e| e <= self.cap + SLACK && e <= self.sharp_cap + SLACK)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThreeBallWitness {
    pub eps: f64,
    pub r: usize,
    pub f: Vec<f64>,
    pub g_targets: [Vec<f64>; 3],
    /// `h_1, ..., h_r`.
    pub h_list: Vec<Vec<f64>>,
    /// `K_0 ⊆ K_1 ⊆ ... ⊆ K_{r−1}`.
    pub k_chain: Vec<SiteSet>,
    /// `(1/r) Σ h_j`.
    pub g: Vec<f64>,
    pub achieved: f64,
    pub bound: f64,
    pub regions: Vec<RegionBound>,
}

/// Smallest admissible averaging count, `⌊1/ε⌋ + 1`.
pub fn default_r(eps: f64) -> usize {
    (1.0 / eps) as usize + 1
}

/// Builds `g ∈ B_{E₀}` with `‖f + g_i − g‖ ≤ 1 + 3ε` by averaging `r`
/// oracle approximants over a nested chain of compact site sets.
pub fn three_ball_witness(
    f: &[f64],
    g: [&[f64]; 3],
    eps: f64,
    oracle: &mut dyn DensityOracle,
    model: &SupModel,
    r: Option<usize>,
) -> Result<ThreeBallWitness> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(param("eps", format!("{eps} must be positive")));
    }
    let r = r.unwrap_or_else(|| default_r(eps));
    if !(r as f64 * eps > 1.0) {
        return Err(param("r", format!("{r} does not exceed 1/eps")));
    }
    check_three_ball_inputs(f, g, model)?;

    let mut calls = 0usize;
    let enlarge = |oracle: &mut dyn DensityOracle, k: &SiteSet, h: &[f64], calls: &mut usize| {
        *calls += 1;
        let next = oracle.enlarge(k, h, eps)?;
        if next.sites() != model.sites || !next.is_superset(k) {
            return Err(contract(
                *calls,
                String::from("enlarged set does not contain the previous one"),
            ));
        }
        let off = sup_off(h, &next);
        if off > eps + SLACK {
            return Err(contract(*calls, format!("element is {off} off the enlarged set")));
        }
        Ok(next)
    };

    let mut k0 = SiteSet::empty(model.sites);
    for gi in g {
        k0 = enlarge(oracle, &k0, gi, &mut calls)?;
    }
    let mut chain = vec![k0];
    let mut h_list = Vec::with_capacity(r);
    for j in 1..=r {
        calls += 1;
        let k = &chain[j - 1];
        let h = oracle.approximate(f, k, eps)?;
        if h.len() != model.sites {
            return Err(contract(calls, format!("approximant has {} sites", h.len())));
        }
        let norm = sup_norm(&h);
        if norm > 1.0 + SLACK {
            return Err(contract(calls, format!("approximant has norm {norm}")));
        }
        if let Some(site) = model.outside_support(&h) {
            return Err(contract(
                calls,
                format!("approximant is nonzero at site {site} off the support"),
            ));
        }
        let miss = sup_on(&diff(f, &h), k);
        if miss > eps + SLACK {
            return Err(contract(
                calls,
                format!("approximant misses f by {miss} on K_{}", j - 1),
            ));
        }
        if j < r {
            let next = enlarge(oracle, k, &h, &mut calls)?;
            chain.push(next);
        }
        h_list.push(h);
    }

    let mut avg = vec![0.0; model.sites];
    for h in &h_list {
        for (a, v) in avg.iter_mut().zip(h) {
            *a += v;
        }
    }
    avg.iter_mut().for_each(|a| *a /= r as f64);

    let residual = |t: usize| g.iter().map(|gi| abs(f[t] + gi[t] - avg[t])).fold(0.0, f64::max);
    let achieved = (0..model.sites).map(residual).fold(0.0, f64::max);
    let regions = regions(&chain, r, eps, model.sites, residual);

    Ok(ThreeBallWitness {
        eps,
        r,
        f: f.to_vec(),
        g_targets: [g[0].to_vec(), g[1].to_vec(), g[2].to_vec()],
        h_list,
        k_chain: chain,
        g: avg,
        achieved,
        bound: 1.0 + 3.0 * eps,
        regions,
    })
}

fn contract(call: usize, detail: String) -> Error {
    Error::OracleContract { call, detail }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn regions(
    chain: &[SiteSet],
    r: usize,
    eps: f64,
    sites: usize,
    residual: impl Fn(usize) -> f64,
) -> Vec<RegionBound> {
    let rf = r as f64;
    let mut out = Vec::with_capacity(r + 1);
    let mut collect = |region: Region, member: &dyn Fn(usize) -> bool, cap: f64, sharp_cap: f64| {
        let members: Vec<usize> = (0..sites).filter(|&t| member(t)).collect();
        let empirical = members.iter().map(|&t| residual(t)).reduce(f64::max);
        out.push(RegionBound {
            region,
            sites: members.len(),
            empirical,
            cap,
            sharp_cap,
        });
    };
    let core_cap = 1.0 + eps;
    collect(Region::Core, &|t| chain[0].contains(t), core_cap, core_cap);
    for u in 1..chain.len() {
        let sharp = (u as f64 + 1.0) / rf + ((rf - 1.0) / rf + 1.0) * eps;
        collect(
            Region::Shell(u),
            &|t| chain[u].contains(t) && !chain[u - 1].contains(t),
            1.0 + 2.0 * eps,
            sharp,
        );
    }
    let last = chain.len() - 1;
    let tail_cap = 1.0 + 3.0 * eps;
    collect(Region::Tail, &|t| !chain[last].contains(t), tail_cap, tail_cap);
    out
}

/// Per-region maxima of the witness residual against the case-analysis caps.
pub fn region_report(w: &ThreeBallWitness) -> Vec<RegionBound> {
    let residual = |t: usize| {
        w.g_targets
            .iter()
            .map(|gi| abs(w.f[t] + gi[t] - w.g[t]))
            .fold(0.0, f64::max)
    };
    regions(&w.k_chain, w.r, w.eps, w.f.len(), residual)
}

/// Invariants of a witness that fail, as human-readable descriptions.
pub fn witness_violations(w: &ThreeBallWitness) -> Vec<String> {
    let mut out = Vec::new();
    let eps = w.eps;
    if !(w.r as f64 * eps > 1.0) {
        out.push(format!("r = {} does not exceed 1/eps", w.r));
    }
    if w.h_list.len() != w.r || w.k_chain.len() != w.r {
        out.push(format!("expected {} approximants and sets", w.r));
        return out;
    }
    for k in w.k_chain.windows(2) {
        if !k[1].is_superset(&k[0]) {
            out.push(String::from("compact chain is not nested"));
        }
    }
    for t in 0..w.g.len() {
        let mean = w.h_list.iter().map(|h| h[t]).sum::<f64>() / w.r as f64;
        if abs(mean - w.g[t]) > SLACK {
            out.push(format!("g differs from the average at site {t}"));
            break;
        }
    }
    // h_j is indexed from 1: h_list[j - 1]
    for (u, k) in w.k_chain.iter().enumerate() {
        for j in 1..=w.r {
            let h = &w.h_list[j - 1];
            if j > u {
                let miss = sup_on(&diff(&w.f, h), k);
                if miss > eps + SLACK {
                    out.push(format!("‖f − h_{j}‖ on K_{u} = {miss} > eps"));
                }
            } else {
                let off = sup_off(h, k);
                if off > eps + SLACK {
                    out.push(format!("‖h_{j}‖ off K_{u} = {off} > eps"));
                }
            }
        }
    }
    for gi in &w.g_targets {
        if sup_off(gi, &w.k_chain[0]) > eps + SLACK {
            out.push(String::from("some g_i exceeds eps off K_0"));
        }
    }
    if w.achieved > w.bound + SLACK {
        out.push(format!("achieved {} exceeds {}", w.achieved, w.bound));
    }
    for rb in region_report(w) {
        if !rb.holds() {
            out.push(format!("{:?} exceeds its cap", rb.region));
        }
    }
    out
}
