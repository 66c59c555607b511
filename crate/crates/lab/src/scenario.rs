//! Seeded random inputs for property trials and the `threeball` command.

use lipideal_core::approx::little_lip_approximant;
use lipideal_core::embed::{deleeuw_map, PairSpace};
use lipideal_core::metric::{interval_space, Enumeration, PNorm};
use lipideal_core::mideal::SupModel;
use lipideal_core::{LipFunction, PointedMetricSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::LabError;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points of the unit cube in dimension 1 to 3 under a random p-norm.
pub fn random_space(rng: &mut impl Rng, n: usize) -> PointedMetricSpace {
    let k = rng.gen_range(1..=3);
    let norm = [PNorm::L1, PNorm::L2, PNorm::LInf][rng.gen_range(0..3)];
    let points: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.gen()).collect()).collect();
    let base = rng.gen_range(0..n);
    PointedMetricSpace::from_points(&points, norm, base).expect("random points are distinct")
}

/// Uniform values in `[-scale, scale]`, zero at the base point.
pub fn random_values(rng: &mut impl Rng, space: &PointedMetricSpace, scale: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..space.len()).map(|_| rng.gen_range(-scale..=scale)).collect();
    v[space.base()] = 0.0;
    v
}

/// `f, g_1, g_2, g_3` over a sup-normed site set with coordinate ideal.
#[derive(Debug, Clone)]
pub struct SequenceScenario {
    pub f: Vec<f64>,
    pub g: [Vec<f64>; 3],
    pub model: SupModel,
}

impl SequenceScenario {
    pub fn g_refs(&self) -> [&[f64]; 3] {
        [&self.g[0], &self.g[1], &self.g[2]]
    }
}

/// Random `f` in the unit ball, `g_i` in the unit ball of the prefix ideal.
/// With `constant_f`, `f ≡ 1`.
pub fn sequence_scenario(
    rng: &mut impl Rng,
    sites: usize,
    support: usize,
    constant_f: bool,
) -> Result<SequenceScenario, LabError> {
    let model = SupModel::prefix(sites, support)?;
    let f = (0..sites)
        .map(|_| {
            if constant_f {
                1.0
            } else {
                rng.gen_range(-1.0..=1.0)
            }
        })
        .collect();
    let g = [0, 1, 2].map(|_| {
        (0..sites)
            .map(|t| {
                if t < support {
                    rng.gen_range(-1.0..=1.0)
                } else {
                    0.0
                }
            })
            .collect()
    });
    Ok(SequenceScenario { f, g, model })
}

/// Power functions on a snowflaked grid, pushed through the de Leeuw map.
#[derive(Debug, Clone)]
pub struct DeLeeuwScenario {
    pub space: PointedMetricSpace,
    pub alpha: f64,
    pub enumeration: Enumeration,
    /// `F` on the grid, `‖F‖ ≤ 1` under `d^α`.
    pub target: Vec<f64>,
    /// `Φ f_{n_i}` for pipeline approximants of random power functions.
    pub g: [Vec<f64>; 3],
}

impl DeLeeuwScenario {
    pub fn pair_space(&self) -> PairSpace {
        PairSpace::new(&self.space)
    }

    pub fn target(&self) -> LipFunction<'_> {
        LipFunction::new(&self.space, self.target.clone()).expect("target vanishes at the base point")
    }

    pub fn f_image(&self) -> Vec<f64> {
        deleeuw_map(&self.pair_space(), &self.target())
            .expect("same space")
            .into_values()
    }

    pub fn g_refs(&self) -> [&[f64]; 3] {
        [&self.g[0], &self.g[1], &self.g[2]]
    }
}

fn power(rng: &mut impl Rng, space: &PointedMetricSpace, alpha: f64) -> Vec<f64> {
    let beta = rng.gen_range(alpha..=1.0);
    let scale = rng.gen_range(0.5..=1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let last = (space.len() - 1) as f64;
    (0..space.len())
        .map(|k| scale * (k as f64 / last).powf(beta))
        .collect()
}

pub fn deleeuw_scenario(rng: &mut impl Rng, grid: usize, alpha: f64) -> Result<DeLeeuwScenario, LabError> {
    let space = interval_space(grid, alpha)?;
    let enumeration = Enumeration::dyadic(&space)?;
    let target = power(rng, &space, alpha);
    let ps = PairSpace::new(&space);
    let mut g: [Vec<f64>; 3] = Default::default();
    for gi in &mut g {
        let values = power(rng, &space, alpha);
        let fi = LipFunction::new(&space, values)?;
        let n = rng.gen_range(1..=8);
        let step = little_lip_approximant(&fi, alpha, n, &enumeration)?;
        *gi = deleeuw_map(&ps, &LipFunction::new(&space, step.f_n)?)?.into_values();
    }
    Ok(DeLeeuwScenario {
        space,
        alpha,
        enumeration,
        target,
        g,
    })
}
