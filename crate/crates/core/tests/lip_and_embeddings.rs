mod common;

use lipideal_core::embed::{
    c0_profile, deleeuw_map, functional_sup, sequence_embed, GeometricWeights, PairSpace,
};
use lipideal_core::lip::{
    extend, lip_constant, lip_norm, mcshane_extend, scale_lip_constant, scale_profile, sup_norm, Extension,
};
use lipideal_core::metric::{interval_space, Enumeration};
use lipideal_core::LipFunction;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Independent Lipschitz constant: every ordered pair, no shared helpers.
fn brute_lip(space: &lipideal_core::PointedMetricSpace, v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in 0..v.len() {
            if i != j {
                best = best.max((v[i] - v[j]).abs() / space.dist(i, j));
            }
        }
    }
    best
}

fn log_deltas(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| hi * (lo / hi).powf(k as f64 / (count - 1) as f64))
        .collect()
}

#[test]
fn squared_grid_function_brute_force() {
    let s = interval_space(5, 1.0).unwrap();
    let v: Vec<f64> = (0..5).map(|k| (k as f64 / 4.0).powi(2)).collect();
    // sup of (s + t) over distinct grid points is 0.75 + 1
    assert_eq!(brute_lip(&s, &v), 1.75);
    assert_eq!(lip_norm(&LipFunction::new(&s, v).unwrap()), 1.75);
}

#[test]
fn power_function_slope_matches_exponent_ratio() {
    for (beta, alpha) in [(1.0, 0.5), (0.75, 0.5), (0.9, 0.3)] {
        let s = interval_space(201, alpha).unwrap();
        let f = LipFunction::from_fn(&s, |k| (k as f64 / 200.0).powf(beta)).unwrap();
        // scales from half the interval down to ten grid steps
        let p = scale_profile(&f, &log_deltas(0.5f64.powf(alpha), 0.05f64.powf(alpha), 14)).unwrap();
        let slope = p.slope_estimate.unwrap();
        let expected = (beta - alpha) / alpha;
        assert!(
            (slope - expected).abs() <= 0.1,
            "beta {beta} alpha {alpha}: {slope} vs {expected}"
        );
        assert!(p.constants.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn mcshane_tight_constant_is_preserved() {
    let mut rng = common::rng(5);
    for _ in 0..50 {
        let n = rng.gen_range(2..25);
        let s = common::random_space(&mut rng, n);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        idx.truncate(rng.gen_range(1..=n));
        let known: Vec<(usize, f64)> = idx.iter().map(|&p| (p, rng.gen_range(-1.0..1.0))).collect();
        let mut partial = vec![0.0; n];
        let mut tight = 0.0f64;
        for &(p, v) in &known {
            partial[p] = v;
        }
        for &(p, _) in &known {
            for &(q, _) in &known {
                if p != q {
                    tight = tight.max((partial[p] - partial[q]).abs() / s.dist(p, q));
                }
            }
        }
        for kind in [Extension::McShane, Extension::Whitney, Extension::Midpoint] {
            let g = extend(&s, &known, tight, kind).unwrap();
            for &(p, v) in &known {
                assert_eq!(g[p], v);
            }
            let c = brute_lip(&s, &g);
            assert!(c <= tight * (1.0 + 1e-12));
            assert!(c >= tight * (1.0 - 1e-12));
        }
    }
}

#[test]
fn c0_profile_agrees_with_scale_constants() {
    let mut rng = common::rng(9);
    for _ in 0..20 {
        let n = rng.gen_range(2..30);
        let s = common::random_space(&mut rng, n);
        let f = LipFunction::new(&s, common::random_values(&mut rng, &s, 1.0)).unwrap();
        let ps = PairSpace::new(&s);
        let phi = deleeuw_map(&ps, &f).unwrap();
        let deltas = log_deltas(2.0 * s.diameter(), 0.5 * s.min_positive_distance().unwrap(), 9);
        let c0 = c0_profile(&phi, &deltas).unwrap();
        for (d, c) in deltas.iter().zip(&c0) {
            assert_eq!(*c, scale_lip_constant(&f, *d).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scale_constant_bounded_by_norm(seed in any::<u64>(), delta in 0.001f64..3.0) {
        let mut rng = common::rng(seed);
        let s = common::random_space(&mut rng, 15);
        let f = LipFunction::new(&s, common::random_values(&mut rng, &s, 2.0)).unwrap();
        let c = scale_lip_constant(&f, delta).unwrap();
        prop_assert!(c <= lip_norm(&f));
        prop_assert_eq!(scale_lip_constant(&f, s.diameter() * 1.0001).unwrap(), lip_norm(&f));
        prop_assert_eq!(lip_norm(&f), brute_lip(&s, f.values()));
    }

    #[test]
    fn norm_is_a_seminorm(seed in any::<u64>(), a in -3.0f64..3.0) {
        let mut rng = common::rng(seed);
        let s = common::random_space(&mut rng, 12);
        let f = LipFunction::new(&s, common::random_values(&mut rng, &s, 1.0)).unwrap();
        let g = LipFunction::new(&s, common::random_values(&mut rng, &s, 1.0)).unwrap();
        let sum = f.axpy(a, &g).unwrap();
        let tol = 1e-12 * (1.0 + lip_norm(&f) * a.abs() + lip_norm(&g));
        prop_assert!(lip_norm(&sum) <= a.abs() * lip_norm(&f) + lip_norm(&g) + tol);
        let scaled = lip_norm(&f.scaled(a));
        prop_assert!((scaled - a.abs() * lip_norm(&f)).abs() <= tol);
    }

    #[test]
    fn deleeuw_is_linear_isometric_antisymmetric(seed in any::<u64>(), a in -2.0f64..2.0) {
        let mut rng = common::rng(seed);
        let s = common::random_space(&mut rng, 10);
        let ps = PairSpace::new(&s);
        let f = LipFunction::new(&s, common::random_values(&mut rng, &s, 1.0)).unwrap();
        let g = LipFunction::new(&s, common::random_values(&mut rng, &s, 1.0)).unwrap();
        let (pf, pg) = (deleeuw_map(&ps, &f).unwrap(), deleeuw_map(&ps, &g).unwrap());
        let combo = deleeuw_map(&ps, &f.axpy(a, &g).unwrap()).unwrap();
        for k in 0..ps.len() {
            let expect = a * pf.values()[k] + pg.values()[k];
            prop_assert!((combo.values()[k] - expect).abs() <= 1e-12 * (1.0 + expect.abs()) * 8.0 / ps.pair_dist()[k].min(1.0));
        }
        prop_assert_eq!(pf.sup_norm(), lip_norm(&f));
        prop_assert!(pf.is_antisymmetric());
    }

    #[test]
    fn functional_sup_equals_norm(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::random_space(&mut rng, 11);
        let f = LipFunction::new(&s, common::random_values(&mut rng, &s, 1.0)).unwrap();
        let mut order: Vec<usize> = (0..11).filter(|&i| i != s.base()).collect();
        order.shuffle(&mut rng);
        order.insert(0, s.base());
        let e = Enumeration::new(&s, order).unwrap();
        prop_assert_eq!(functional_sup(&f, &e).unwrap(), lip_norm(&f));
    }

    #[test]
    fn sequence_embedding_is_dominated_by_sup_norm(seed in any::<u64>(), ratio in 0.01f64..0.99) {
        let mut rng = common::rng(seed);
        let s = common::random_space(&mut rng, 16);
        let e = Enumeration::base_first(&s);
        let w = GeometricWeights::new(ratio).unwrap();
        let f = LipFunction::new(&s, common::random_values(&mut rng, &s, 1.0)).unwrap();
        let g = LipFunction::new(&s, common::random_values(&mut rng, &s, 1.0)).unwrap();
        let (xf, xg) = (sequence_embed(&f, &e, w).unwrap(), sequence_embed(&g, &e, w).unwrap());
        let diff = f.axpy(-1.0, &g).unwrap();
        prop_assert!(xf.distance(&xg).unwrap() <= sup_norm(&diff) * (1.0 + 1e-12));
        prop_assert!(xf.norm() <= sup_norm(&f) * (1.0 + 1e-12));
        prop_assert_eq!(xf.entries[0], 0.0);
    }

    #[test]
    fn mcshane_single_anchor_is_a_cone(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::random_space(&mut rng, 9);
        let q = rng.gen_range(0..9);
        let g = mcshane_extend(&s, &[(q, 0.0)], 1.0).unwrap();
        for (x, gx) in g.iter().enumerate() {
            prop_assert_eq!(*gx, s.dist(x, q));
        }
        prop_assert!(lip_constant(&s, &g) <= 1.0 + 1e-12);
    }
}
