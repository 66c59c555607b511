#![allow(dead_code)]

use lipideal_core::metric::{PNorm, PointedMetricSpace};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random point cloud in [0, 1]^k under a random p-norm, random base point.
pub fn random_space(rng: &mut impl Rng, n: usize) -> PointedMetricSpace {
    let k = rng.gen_range(1..=3);
    let norm = [PNorm::L1, PNorm::L2, PNorm::LInf][rng.gen_range(0..3)];
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..k).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let base = rng.gen_range(0..n);
    PointedMetricSpace::from_points(&points, norm, base).expect("random points are distinct")
}

pub fn random_values(rng: &mut impl Rng, space: &PointedMetricSpace, scale: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..space.len())
        .map(|_| scale * (2.0 * rng.gen::<f64>() - 1.0))
        .collect();
    v[space.base()] = 0.0;
    v
}
