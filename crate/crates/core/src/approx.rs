//! Approximation of Hölder functions by functions of a strictly better
//! Hölder class, and the truncation oracle for the sequence model.
//!
//! The pipeline for step `n`: restrict `F` to the first `n` enumerated
//! points, pick an exponent `β_n ∈ (α, 1)` for which the restriction is
//! still almost contractive, extend it to the whole space by McShane's
//! formula for the metric `d^β_n`, and shrink by `(1 + 1/n)²`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::lip::{extend, holder_constant, lip_norm, quotient_sup, Extension, LipFunction};
use crate::math::{abs, pow};
use crate::metric::{Enumeration, PointedMetricSpace};

/// Resolution of the exponent search.
pub const BETA_TOLERANCE: f64 = 1e-9;

/// Slack used when re-checking certificate inequalities.
pub const CERT_SLACK: f64 = 1e-12;

/// The inequalities behind `‖f_n‖ ≤ 1`, evaluated for the normalized input.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    /// `1 + 1/n`.
    pub bound: f64,
    /// Norm of the restriction `g_n` for the metric `d^β_n`.
    pub restriction_norm: f64,
    pub restriction_ok: bool,
    /// `(diam M)^(β_n - α)`.
    pub diameter_factor: f64,
    pub diameter_ok: bool,
    /// Norm of the extension `G_n` for `d^β_n` over the whole space.
    pub extension_norm: f64,
    /// `‖G_n‖_β / (1 + 1/n)² · (diam M)^(β_n - α)`.
    pub chain_bound: f64,
    /// Norm of `f_n` for `d^α`.
    pub result_norm: f64,
    pub chain_ok: bool,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.restriction_ok && self.diameter_ok && self.chain_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ApproxStep {
    pub n: usize,
    pub alpha: f64,
    pub beta_n: f64,
    /// The enumerated points `P_n`.
    pub points: Vec<usize>,
    /// `g_n = F` on `P_n`.
    pub g_n: Vec<f64>,
    pub big_g_n: Vec<f64>,
    pub f_n: Vec<f64>,
    /// Factor the input was divided by before running (1 when `‖F‖ ≤ 1`);
    /// `g_n`, `G_n` and `f_n` are reported in the original units.
    pub normalization: f64,
    pub cert: Certificate,
}

/// Largest `β ∈ (α, 1)` on a bisection grid with
/// `‖g‖_{d^β on P_n} ≤ 1 + 1/n` and `(diam M)^(β - α) ≤ 1 + 1/n`.
///
/// `space` carries the snowflaked metric `d^α`; `known` lists `(point, value)`.
pub fn holder_bump_exponent(
    space: &PointedMetricSpace,
    alpha: f64,
    known: &[(usize, f64)],
    n: usize,
) -> Result<f64> {
    check_open_exponent(alpha)?;
    if n == 0 {
        return Err(param("n", "step index starts at 1"));
    }
    let (norm, pair) = restricted_norm(space, known, 1.0);
    if norm > 1.0 + CERT_SLACK {
        let (i, j) = pair.unwrap_or((0, 0));
        return Err(Error::LipschitzBound {
            i,
            j,
            quotient: norm,
            bound: 1.0,
        });
    }
    let bound = 1.0 + 1.0 / n as f64;
    let diam = space.diameter();
    let feasible = |beta: f64| {
        restricted_norm(space, known, beta / alpha).0 <= bound && diameter_factor(diam, alpha, beta) <= bound
    };
    let top = 1.0 - BETA_TOLERANCE;
    if top > alpha && feasible(top) {
        return Ok(top);
    }
    let (mut lo, mut hi) = (alpha, top);
    while hi - lo > BETA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        // the full norm is re-evaluated at every probe, no monotonicity assumed
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= alpha {
        return Err(Error::Infeasible { alpha, n });
    }
    Ok(lo)
}

fn check_open_exponent(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(param("alpha", format!("{alpha} is outside (0, 1)")))
    }
}

/// `(diam_{d^α})^((β - α)/α)`, i.e. `(diam_d)^(β - α)`.
fn diameter_factor(diam_alpha: f64, alpha: f64, beta: f64) -> f64 {
    pow(diam_alpha, (beta - alpha) / alpha)
}

fn restricted_norm(
    space: &PointedMetricSpace,
    known: &[(usize, f64)],
    exponent: f64,
) -> (f64, Option<(usize, usize)>) {
    let mut values = alloc::vec![0.0; space.len()];
    for &(p, v) in known {
        values[p] = v;
    }
    let pairs = (0..known.len()).flat_map(|a| ((a + 1)..known.len()).map(move |b| (known[a].0, known[b].0)));
    quotient_sup(space, &values, pairs, exponent)
}

/// Runs one step of the approximation pipeline for `F` on the snowflaked
/// space `M^α` (the space `f` lives on carries the metric `d^α`).
pub fn little_lip_approximant(
    f: &LipFunction<'_>,
    alpha: f64,
    n: usize,
    enumeration: &Enumeration,
) -> Result<ApproxStep> {
    check_open_exponent(alpha)?;
    if n == 0 {
        return Err(param("n", "step index starts at 1"));
    }
    let space = f.space();
    if enumeration.len() != space.len() || enumeration.as_slice()[0] != space.base() {
        return Err(param("enumeration", "must list every point, base point first"));
    }
    let norm = lip_norm(f);
    let normalization = norm.max(1.0);
    let values: Vec<f64> = f.values().iter().map(|v| v / normalization).collect();

    let points = enumeration.prefix(n).to_vec();
    let known: Vec<(usize, f64)> = points.iter().map(|&p| (p, values[p])).collect();
    let beta_n = holder_bump_exponent(space, alpha, &known, n)?;

    // d^β = (d^α)^(β/α) is a metric because β ≤ 1
    let coarse = space.powered(beta_n / alpha);
    let bound = 1.0 + 1.0 / n as f64;
    let restriction_norm = restricted_norm(space, &known, beta_n / alpha).0;
    let big_g = extend(&coarse, &known, restriction_norm, Extension::McShane)?;
    let shrink = bound * bound;
    let small_f: Vec<f64> = big_g.iter().map(|v| v / shrink).collect();

    let diameter_factor = diameter_factor(space.diameter(), alpha, beta_n);
    let extension_norm = holder_constant(space, &big_g, beta_n / alpha);
    let result_norm = holder_constant(space, &small_f, 1.0);
    let chain_bound = extension_norm / shrink * diameter_factor;
    let slack = 1.0 + CERT_SLACK;
    let cert = Certificate {
        bound,
        restriction_norm,
        restriction_ok: restriction_norm <= bound * slack,
        diameter_factor,
        diameter_ok: diameter_factor <= bound * slack,
        extension_norm,
        chain_bound,
        result_norm,
        chain_ok: result_norm <= chain_bound * slack && chain_bound <= slack,
    };

    let rescale = |v: Vec<f64>| -> Vec<f64> {
        if normalization == 1.0 {
            v
        } else {
            v.into_iter().map(|x| x * normalization).collect()
        }
    };
    Ok(ApproxStep {
        n,
        alpha,
        beta_n,
        g_n: known.iter().map(|&(p, _)| f.values()[p]).collect(),
        points,
        big_g_n: rescale(big_g),
        f_n: rescale(small_f),
        normalization,
        cert,
    })
}

/// `h = f · 1_{K'}` where `K' = {0, ..., max K}` is the smallest prefix
/// containing `k`; `h = 0` for empty `k`.
pub fn truncation_oracle(f: &[f64], k: &[usize], _eps: f64) -> Result<Vec<f64>> {
    let norm = f.iter().fold(0.0f64, |m, v| m.max(abs(*v)));
    if norm > 1.0 {
        return Err(Error::NormExceeded {
            what: "f",
            value: norm,
        });
    }
    if let Some(&bad) = k.iter().find(|&&i| i >= f.len()) {
        return Err(param(
            "k",
            format!("index {bad} out of range for length {}", f.len()),
        ));
    }
    let end = k.iter().max().map_or(0, |m| m + 1);
    Ok(f.iter()
        .enumerate()
        .map(|(i, &v)| if i < end { v } else { 0.0 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::interval_space;

    #[test]
    fn bump_exponent_on_unit_distance_pair() {
        let s = interval_space(2, 0.5).unwrap();
        let beta = holder_bump_exponent(&s, 0.5, &[(0, 0.0), (1, 1.0)], 2).unwrap();
        assert_eq!(beta, 1.0 - BETA_TOLERANCE);
    }

    #[test]
    fn bump_exponent_zero_function_hits_top() {
        let s = interval_space(9, 0.5).unwrap();
        let known: Vec<_> = (0..9).map(|p| (p, 0.0)).collect();
        assert_eq!(
            holder_bump_exponent(&s, 0.5, &known, 3).unwrap(),
            1.0 - BETA_TOLERANCE
        );
    }

    #[test]
    fn bump_exponent_with_large_diameter_is_norm_limited() {
        // points 0, 0.01, 2 on the line: diameter 2, snowflaked by 1/2
        let d = PointedMetricSpace::new(
            vec![vec![0.0, 0.01, 2.0], vec![0.01, 0.0, 1.99], vec![2.0, 1.99, 0.0]],
            0,
        )
        .unwrap();
        let s = crate::metric::snowflake(&d, 0.5).unwrap();
        // 2^(β - 1/2) ≤ 2 holds for every β < 1; the close pair binds:
        // 0.1 / 0.01^β ≤ 2  ⇔  β ≤ ln(0.05) / ln(0.01)
        let known = [(0, 0.0), (1, 0.1)];
        let beta = holder_bump_exponent(&s, 0.5, &known, 1).unwrap();
        let exact = 0.05f64.ln() / 0.01f64.ln();
        assert!(
            beta <= exact && exact - beta <= 2.0 * BETA_TOLERANCE,
            "{beta} {exact}"
        );
    }

    #[test]
    fn bump_exponent_binds_on_norm() {
        let s = interval_space(5, 0.5).unwrap();
        // quotient at the close pair (0, 1/4): v / (1/4)^{β}; with v = 0.5 the
        // α-norm is 1 and 0.5 / 0.25^β ≤ 1 + 1/n  ⇔  β ≤ ln(0.5/(1+1/n)) / ln(0.25)
        let known = [(0, 0.0), (1, 0.5)];
        for n in [1usize, 2, 4, 8] {
            let beta = holder_bump_exponent(&s, 0.5, &known, n).unwrap();
            let exact = (0.5 / (1.0 + 1.0 / n as f64)).ln() / 0.25f64.ln();
            assert!(
                beta <= exact && exact - beta <= 2.0 * BETA_TOLERANCE,
                "n={n} {beta} {exact}"
            );
        }
    }

    #[test]
    fn bump_exponent_rejects_steep_input() {
        let s = interval_space(5, 0.5).unwrap();
        let err = holder_bump_exponent(&s, 0.5, &[(0, 0.0), (1, 0.9)], 1).unwrap_err();
        assert!(matches!(err, Error::LipschitzBound { i: 0, j: 1, .. }));
        assert!(holder_bump_exponent(&s, 1.0, &[(0, 0.0)], 1).is_err());
    }

    #[test]
    fn approximant_of_power_function() {
        let s = interval_space(33, 0.5).unwrap();
        let f = LipFunction::from_fn(&s, |k| (k as f64 / 32.0).powf(0.75)).unwrap();
        let e = Enumeration::dyadic(&s).unwrap();
        let step = little_lip_approximant(&f, 0.5, 4, &e).unwrap();
        assert!(step.cert.holds(), "{:?}", step.cert);
        assert_eq!(step.normalization, 1.0);
        assert!(step.beta_n > 0.5 && step.beta_n < 1.0);
        let max_f = step
            .points
            .iter()
            .map(|&p| f.values()[p].abs())
            .fold(0.0, f64::max);
        let err = step
            .points
            .iter()
            .map(|&p| (step.f_n[p] - f.values()[p]).abs())
            .fold(0.0, f64::max);
        assert!((err - 0.36 * max_f).abs() < 1e-12);
        assert!(holder_constant(&s, &step.f_n, 1.0) <= 1.0 + 1e-12);
    }

    #[test]
    fn approximant_of_zero() {
        let s = interval_space(9, 0.5).unwrap();
        let step = little_lip_approximant(&LipFunction::zero(&s), 0.5, 3, &Enumeration::dyadic(&s).unwrap())
            .unwrap();
        assert!(step.f_n.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn approximant_normalizes_large_input() {
        let s = interval_space(9, 0.5).unwrap();
        let f = LipFunction::from_fn(&s, |k| 3.0 * k as f64 / 8.0).unwrap();
        let step = little_lip_approximant(&f, 0.5, 5, &Enumeration::dyadic(&s).unwrap()).unwrap();
        assert!(step.normalization > 1.0);
        assert!(step.cert.holds());
        let norm = holder_constant(&s, &step.f_n, 1.0);
        assert!(norm <= step.normalization * (1.0 + 1e-12));
        for &p in &step.points {
            assert!((step.f_n[p] - f.values()[p] / (1.2f64 * 1.2)).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_examples() {
        let f = vec![1.0; 8];
        assert_eq!(
            truncation_oracle(&f, &[0, 1, 2], 0.1).unwrap(),
            vec![1., 1., 1., 0., 0., 0., 0., 0.]
        );
        let all: Vec<usize> = (0..8).collect();
        assert_eq!(truncation_oracle(&f, &all, 0.1).unwrap(), f);
        assert_eq!(truncation_oracle(&f, &[], 0.1).unwrap(), vec![0.0; 8]);
        assert!(truncation_oracle(&[2.0], &[0], 0.1).is_err());
        let g = vec![0.5, -0.25, 0.75, 1.0];
        let h = truncation_oracle(&g, &[2, 0], 0.1).unwrap();
        assert_eq!(&h[..3], &g[..3]);
        assert_eq!(h[3], 0.0);
    }
}
