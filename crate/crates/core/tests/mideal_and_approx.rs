#![allow(clippy::needless_range_loop)]

mod common;

use lipideal_core::approx::little_lip_approximant;
use lipideal_core::embed::{deleeuw_map, PairSpace};
use lipideal_core::lip::{holder_constant, scale_profile};
use lipideal_core::metric::{interval_space, Enumeration};
use lipideal_core::mideal::{
    l_projection_check, region_report, three_ball_oracle, three_ball_witness, witness_violations,
    DeLeeuwOracle, Region, SiteSet, SupModel, TruncationOracle,
};
use lipideal_core::LipFunction;
use rand::Rng;

/// Exhaustive search of max_i ‖f + g_i − y‖ over y on a grid with the given
/// step in [−2, 2] at every support site (zero elsewhere).
fn grid_search(f: &[f64], g: [&[f64]; 3], support: &[usize], step: f64) -> f64 {
    let steps = (4.0 / step).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| -2.0 + k as f64 * step).collect();
    let site_cost = |t: usize, y: f64| g.iter().map(|gi| (f[t] + gi[t] - y).abs()).fold(0.0, f64::max);
    let off: f64 = (0..f.len())
        .filter(|t| !support.contains(t))
        .map(|t| site_cost(t, 0.0))
        .fold(0.0, f64::max);
    fn rec(
        level: usize,
        partial: f64,
        support: &[usize],
        grid: &[f64],
        cost: &dyn Fn(usize, f64) -> f64,
        best: &mut f64,
    ) {
        if partial >= *best {
            return;
        }
        if level == support.len() {
            *best = partial;
            return;
        }
        for &y in grid {
            rec(
                level + 1,
                partial.max(cost(support[level], y)),
                support,
                grid,
                cost,
                best,
            );
        }
    }
    let mut best = f64::INFINITY;
    rec(0, off, support, &grid, &site_cost, &mut best);
    best
}

#[test]
fn oracle_matches_grid_search_on_sign_patterns() {
    let f = [1.0; 6];
    let support = [0, 1, 2, 3];
    let model = SupModel::new(6, &support).unwrap();
    let mut g = [[0.0; 6]; 3];
    for t in 0..4 {
        g[0][t] = if t % 2 == 0 { 1.0 } else { -1.0 };
        g[1][t] = if t < 2 { 1.0 } else { -1.0 };
        g[2][t] = -1.0;
    }
    let gs = [&g[0][..], &g[1][..], &g[2][..]];
    let opt = three_ball_oracle(&f, gs, &model).unwrap();
    let brute = grid_search(&f, gs, &support, 0.1);
    assert!(brute >= opt.value - 1e-12);
    assert!(brute - opt.value <= 0.1);
    assert_eq!(opt.value, 1.0);
}

#[test]
fn oracle_matches_grid_search_on_random_instances() {
    let mut rng = common::rng(21);
    for _ in 0..10 {
        let sites = rng.gen_range(2..7);
        let m = rng.gen_range(1..=sites.min(4));
        let support: Vec<usize> = (0..m).collect();
        let model = SupModel::new(sites, &support).unwrap();
        let f: Vec<f64> = (0..sites).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                (0..sites)
                    .map(|t| if t < m { rng.gen_range(-1.0..1.0) } else { 0.0 })
                    .collect()
            })
            .collect();
        let gs = [&g[0][..], &g[1][..], &g[2][..]];
        let opt = three_ball_oracle(&f, gs, &model).unwrap();
        let brute = grid_search(&f, gs, &support, 0.05);
        assert!(
            brute >= opt.value - 1e-12 && brute - opt.value <= 0.05,
            "{brute} vs {}",
            opt.value
        );
    }
}

#[test]
fn l_projection_identity_on_random_vectors() {
    let mut rng = common::rng(2);
    for _ in 0..1000 {
        let n = rng.gen_range(1..40);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let support: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let p = l_projection_check(&x, &SiteSet::from_indices(n, &support)).unwrap();
        assert!(p.ok, "{p:?}");
    }
}

#[test]
fn sequence_witnesses_respect_invariants() {
    let mut rng = common::rng(13);
    for trial in 0..40 {
        let eps = [0.5, 0.25, 0.1][trial % 3];
        let sites = rng.gen_range(8..80);
        let m = rng.gen_range(1..sites);
        let model = SupModel::prefix(sites, m).unwrap();
        let f: Vec<f64> = (0..sites).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                (0..sites)
                    .map(|t| {
                        if t < m && rng.gen_bool(0.6) {
                            rng.gen_range(-1.0..1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let gs = [&g[0][..], &g[1][..], &g[2][..]];
        let mut oracle = TruncationOracle::new(&model);
        let w = three_ball_witness(&f, gs, eps, &mut oracle, &model, None).unwrap();
        assert!(witness_violations(&w).is_empty(), "{:?}", witness_violations(&w));
        let opt = three_ball_oracle(&f, gs, &model).unwrap();
        assert!(opt.value <= w.achieved + 1e-12);
        assert!(opt.value <= 1.0 + eps);
    }
}

#[test]
fn larger_r_does_not_break_the_bound() {
    let model = SupModel::prefix(40, 30).unwrap();
    let f: Vec<f64> = (0..40).map(|t| ((t * 13 % 7) as f64 / 3.5) - 1.0).collect();
    let g: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..40)
                .map(|t| {
                    if t < 30 {
                        (((t + i) * 5 % 9) as f64 / 4.5) - 1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let gs = [&g[0][..], &g[1][..], &g[2][..]];
    for r in [11, 20, 50] {
        let mut oracle = TruncationOracle::new(&model);
        let w = three_ball_witness(&f, gs, 0.1, &mut oracle, &model, Some(r)).unwrap();
        assert!(w.achieved <= 1.3 + 1e-12);
        assert!(region_report(&w).iter().all(|b| b.holds()));
    }
}

#[test]
fn non_coordinate_subspace_fails_the_three_ball_test() {
    // E = ℓ∞², E₀ = span{(1, 1)}: x = (1, −1), y₁ = (1, 1), y₂ = −(1, 1), y₃ = 0
    let x = [1.0, -1.0];
    let ys = [[1.0, 1.0], [-1.0, -1.0], [0.0, 0.0]];
    let cost = |c: f64| {
        ys.iter()
            .map(|y| (0..2).map(|t| (x[t] + y[t] - c).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    };
    let best = (-400..=400)
        .map(|k| cost(k as f64 * 0.01))
        .fold(f64::INFINITY, f64::min);
    assert_eq!(best, 2.0);
    assert!(best > 1.0 + 0.5);
}

#[test]
fn deleeuw_model_end_to_end() {
    let alpha = 0.5;
    let space = interval_space(9, alpha).unwrap();
    let e = Enumeration::dyadic(&space).unwrap();
    let ps = PairSpace::new(&space);
    let target = LipFunction::from_fn(&space, |k| (k as f64 / 8.0).powf(0.75)).unwrap();
    let f = deleeuw_map(&ps, &target).unwrap().into_values();
    let g: Vec<Vec<f64>> = [0.6, 0.9, 1.0]
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let fi =
                LipFunction::from_fn(&space, |k| (-1f64).powi(i as i32) * (k as f64 / 8.0).powf(b)).unwrap();
            let step = little_lip_approximant(&fi, alpha, 3 + i, &e).unwrap();
            let h = LipFunction::new(&space, step.f_n).unwrap();
            deleeuw_map(&ps, &h).unwrap().into_values()
        })
        .collect();
    let gs = [&g[0][..], &g[1][..], &g[2][..]];
    let model = SupModel::full(ps.len());
    for eps in [0.5, 0.25, 0.1] {
        let mut oracle = DeLeeuwOracle::new(target.clone(), alpha, e.clone());
        let w = three_ball_witness(&f, gs, eps, &mut oracle, &model, None).unwrap();
        assert!(w.achieved <= 1.0 + 3.0 * eps + 1e-12);
        assert!(witness_violations(&w).is_empty(), "{:?}", witness_violations(&w));
        let opt = three_ball_oracle(&f, gs, &model).unwrap();
        assert!(opt.value <= w.achieved + 1e-12);
        let report = region_report(&w);
        assert!(matches!(report[0].region, Region::Core));
        assert!(report.iter().all(|b| b.holds()));
    }
}

#[test]
fn approximants_converge_pointwise_on_the_enumeration() {
    let space = interval_space(33, 0.5).unwrap();
    let f = LipFunction::from_fn(&space, |k| (k as f64 / 32.0).powf(0.75)).unwrap();
    let e = Enumeration::dyadic(&space).unwrap();
    let j = 5;
    let pj = e.as_slice()[j - 1];
    let mut last = f64::INFINITY;
    for n in j..40 {
        let step = little_lip_approximant(&f, 0.5, n, &e).unwrap();
        let gap = (step.f_n[pj] - f.values()[pj]).abs();
        let shrink = 1.0 + 1.0 / n as f64;
        let expect = (1.0 - 1.0 / (shrink * shrink)) * f.values()[pj].abs();
        assert!((gap - expect).abs() <= 1e-12);
        assert!(gap <= last);
        last = gap;
    }
}

#[test]
fn approximants_decay_at_small_scales() {
    for n_grid in [129usize, 257] {
        let alpha = 0.5;
        let space = interval_space(n_grid, alpha).unwrap();
        let f = LipFunction::from_fn(&space, |k| (k as f64 / (n_grid - 1) as f64).powf(0.75)).unwrap();
        let e = Enumeration::dyadic(&space).unwrap();
        for n in [2, 4, 8] {
            let step = little_lip_approximant(&f, alpha, n, &e).unwrap();
            let fn_ = LipFunction::new(&space, step.f_n.clone()).unwrap();
            assert!(holder_constant(&space, &step.f_n, 1.0) <= 1.0 + 1e-12);
            let hi = 0.5f64.powf(alpha);
            let lo = (10.0 / (n_grid - 1) as f64).powf(alpha);
            let deltas: Vec<f64> = (0..10).map(|k| hi * (lo / hi).powf(k as f64 / 9.0)).collect();
            let slope = scale_profile(&fn_, &deltas).unwrap().slope_estimate.unwrap();
            let expected = (step.beta_n - alpha) / alpha;
            assert!(
                slope >= expected - 0.15,
                "grid {n_grid} n {n}: slope {slope} < {expected} - 0.15"
            );
        }
    }
}
