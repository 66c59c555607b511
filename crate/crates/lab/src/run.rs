//! Batch runner: one command per invocation, a JSON report or a CSV table out.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use lipideal_core::approx::little_lip_approximant;
use lipideal_core::embed::{
    c0_membership_bound, c0_profile, deleeuw_map, functional_sup, sequence_embed, GeometricWeights, PairSpace,
};
use lipideal_core::lip::{
    extend, lip_constant, lip_norm, scale_profile, sup_norm, Extension, LIP_BOUND_SLACK,
};
use lipideal_core::metric::{interval_space, snowflake, validate_metric, Enumeration, PNorm};
use lipideal_core::mideal::{
    l_projection_check, region_report, three_ball_oracle, three_ball_witness, witness_violations,
    DeLeeuwOracle, SiteSet, SupModel, ThreeBallWitness, TruncationOracle,
};
use lipideal_core::{LipFunction, PointedMetricSpace};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::formats::{self, fmt17, labels_of, RawSpace, Table};
use crate::scenario;
use crate::{Check, ErrorBody, ErrorReport, LabError, Report, SCHEMA_VERSION};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Check the metric axioms of a distance matrix.
    Validate,
    /// Lipschitz and sup norms of a function.
    Norm,
    /// Re-metrize a space with d^alpha.
    Snowflake,
    /// Scale-local Lipschitz constants and their log-log slope.
    Profile,
    /// Extend values given on a subset with the same Lipschitz constant.
    Mcshane,
    /// Difference quotients on the pair space.
    Deleeuw,
    /// Weighted sequence embedding and the functional identity.
    Embed,
    /// One step of the little-Lipschitz approximation pipeline.
    Approx,
    /// Three-ball witness against the exact optimum.
    Threeball,
    /// L-projection identity for dual vectors.
    Lproj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum NormArg {
    #[value(name = "1")]
    L1,
    #[value(name = "2")]
    L2,
    #[value(name = "inf")]
    Inf,
}

impl From<NormArg> for PNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => PNorm::L1,
            NormArg::L2 => PNorm::L2,
            NormArg::Inf => PNorm::LInf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionArg {
    #[default]
    Mcshane,
    Whitney,
    Midpoint,
}

impl From<ExtensionArg> for Extension {
    fn from(e: ExtensionArg) -> Self {
        match e {
            ExtensionArg::Mcshane => Extension::McShane,
            ExtensionArg::Whitney => Extension::Whitney,
            ExtensionArg::Midpoint => Extension::Midpoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    #[default]
    Sequence,
    Deleeuw,
}

/// Everything one run needs. Spaces come from `--input` or `--grid`; the
/// working metric is always `d^alpha` (alpha = 1 when not given).
#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "lipideal",
    version,
    about = "Lipschitz-space experiments on finite metric spaces"
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Space file (.csv distance matrix or point cloud, .json), or scenario JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Function file (.csv `label,value` or .json object).
    #[arg(long)]
    pub function: Option<PathBuf>,
    /// Base point name, overriding the file and its sidecar.
    #[arg(long)]
    pub base: Option<String>,
    /// Read a CSV input as a point cloud under this norm.
    #[arg(long, value_enum)]
    pub pnorm: Option<NormArg>,
    /// Use the uniform grid on [0, 1] with this many points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// On a grid, the function s^power.
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Hölder exponent of the input; profile checks the slope (beta - alpha)/alpha.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Pipeline step.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated, strictly decreasing scales.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Geometric weight ratio of the sequence embedding.
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    /// Lipschitz bound for the extension (default: tight).
    #[arg(long)]
    pub lip: Option<f64>,
    #[arg(long, value_enum, default_value_t = ExtensionArg::Mcshane)]
    pub extension: ExtensionArg,
    #[arg(long, value_enum, default_value_t = ModelArg::Sequence)]
    pub model: ModelArg,
    /// Averaging count of the witness (default floor(1/eps) + 1).
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub sites: usize,
    /// Size of the ideal's support prefix (default 3/4 of the sites).
    #[arg(long)]
    pub support: Option<usize>,
    /// Draw f at random instead of f = 1.
    #[arg(long)]
    pub random_f: bool,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

/// A finished command: the report plus its tabular form, if any.
#[derive(Debug, Clone)]
pub struct Output {
    pub report: Report,
    pub table: Option<Table>,
}

fn input(msg: impl Into<String>) -> LabError {
    LabError::Input(msg.into())
}

fn raw_space(cfg: &RunConfig) -> Result<RawSpace, LabError> {
    match (&cfg.input, cfg.grid) {
        (Some(_), Some(_)) => Err(input("give either --input or --grid, not both")),
        (Some(path), None) => formats::load_raw_space(path, cfg.base.as_deref(), cfg.pnorm.map(Into::into)),
        (None, Some(n)) => Ok(RawSpace::from_space(&interval_space(n, 1.0)?)),
        (None, None) => Err(input("a space is required: --input or --grid")),
    }
}

/// The working space `(M, d^alpha)`.
fn space(cfg: &RunConfig) -> Result<PointedMetricSpace, LabError> {
    let alpha = cfg.alpha.unwrap_or(1.0);
    if let (None, Some(n)) = (&cfg.input, cfg.grid) {
        let labels = (0..n).map(|i| i.to_string()).collect();
        return Ok(interval_space(n, alpha)?.with_labels(labels)?);
    }
    Ok(snowflake(&raw_space(cfg)?.build()?, alpha)?)
}

fn partial_function(cfg: &RunConfig, space: &PointedMetricSpace) -> Result<Vec<(usize, f64)>, LabError> {
    match (&cfg.function, cfg.power) {
        (Some(_), Some(_)) => Err(input("give either --function or --power, not both")),
        (Some(path), None) => formats::load_partial_function(path, &labels_of(space)),
        (None, Some(p)) => {
            let n = cfg
                .grid
                .filter(|_| cfg.input.is_none())
                .ok_or_else(|| input("--power needs --grid"))?;
            if p.is_nan() || p <= 0.0 {
                return Err(input("--power must be positive"));
            }
            let m = (n - 1) as f64;
            Ok((0..n).map(|k| (k, (k as f64 / m).powf(p))).collect())
        }
        (None, None) => Err(input("a function is required: --function or --power")),
    }
}

fn function<'a>(cfg: &RunConfig, space: &'a PointedMetricSpace) -> Result<LipFunction<'a>, LabError> {
    let partial = partial_function(cfg, space)?;
    if partial.len() != space.len() {
        return Err(input(format!(
            "{} of {} points have values",
            partial.len(),
            space.len()
        )));
    }
    Ok(LipFunction::new(
        space,
        partial.into_iter().map(|(_, v)| v).collect(),
    )?)
}

fn enumeration(cfg: &RunConfig, space: &PointedMetricSpace) -> Result<Enumeration, LabError> {
    if cfg.input.is_none() && cfg.grid.is_some() {
        Ok(Enumeration::dyadic(space)?)
    } else {
        Ok(Enumeration::base_first(space))
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * b.abs().max(1.0)
}

fn default_deltas(space: &PointedMetricSpace) -> Result<Vec<f64>, LabError> {
    let hi = space.diameter() / 2.0;
    let min = space
        .min_positive_distance()
        .ok_or_else(|| input("space has a single point"))?;
    let lo = (10.0 * min).min(hi / 4.0).max(min);
    let k = 12;
    let mut out: Vec<f64> = (0..k)
        .map(|i| hi * (lo / hi).powf(i as f64 / (k - 1) as f64))
        .collect();
    out.dedup_by(|a, b| a >= b);
    Ok(out)
}

fn key_value_table(pairs: &[(&str, f64)]) -> Table {
    let mut t = Table::new(&["key", "value"]);
    for (k, v) in pairs {
        t.rows.push(vec![k.to_string(), fmt17(*v)]);
    }
    t
}

type Body = (Vec<Check>, Value, Option<Table>);

fn cmd_validate(cfg: &RunConfig) -> Result<Body, LabError> {
    let raw = raw_space(cfg)?;
    let dist = match cfg.alpha {
        Some(a) if a != 1.0 => {
            if !(a > 0.0 && a <= 1.0) {
                return Err(input("--alpha must lie in (0, 1]"));
            }
            raw.dist
                .iter()
                .map(|r| r.iter().map(|d| d.powf(a)).collect())
                .collect()
        }
        _ => raw.dist.clone(),
    };
    let report = validate_metric(&dist)?;
    let mut t = Table::new(&["violation"]);
    for v in &report.violations {
        t.rows.push(vec![serde_json::to_string(v).expect("plain data")]);
    }
    let checks = vec![Check::new(
        "metric_axioms",
        report.ok,
        format!("{} violation(s)", report.total),
    )];
    let result = json!({
        "points": raw.labels.len(),
        "base": raw.labels.get(raw.base),
        "report": report,
    });
    Ok((checks, result, Some(t)))
}

fn cmd_norm(cfg: &RunConfig) -> Result<Body, LabError> {
    let space = space(cfg)?;
    let f = function(cfg, &space)?;
    let lip = lip_norm(&f);
    let sup = sup_norm(&f);
    let checks = vec![Check::new(
        "finite",
        lip.is_finite() && sup.is_finite(),
        "norms are finite",
    )];
    let result = json!({ "lip_norm": lip, "sup_norm": sup, "points": space.len() });
    Ok((
        checks,
        result,
        Some(key_value_table(&[("lip_norm", lip), ("sup_norm", sup)])),
    ))
}

fn cmd_snowflake(cfg: &RunConfig) -> Result<Body, LabError> {
    let alpha = cfg.alpha.ok_or_else(|| input("snowflake needs --alpha"))?;
    let raw = raw_space(cfg)?;
    let labels = raw.labels.clone();
    let flaked = snowflake(&raw.build()?, alpha)?.with_labels(labels)?;
    let out = RawSpace::from_space(&flaked);
    let report = out.validate()?;
    let checks = vec![Check::new(
        "metric_axioms",
        report.ok,
        format!("{} violation(s) after snowflaking", report.total),
    )];
    let table = formats::matrix_table(&out);
    Ok((
        checks,
        json!({ "alpha": alpha, "space": out.to_file() }),
        Some(table),
    ))
}

fn cmd_profile(cfg: &RunConfig) -> Result<Body, LabError> {
    let space = space(cfg)?;
    let f = function(cfg, &space)?;
    let deltas = match &cfg.deltas {
        Some(d) => d.clone(),
        None => default_deltas(&space)?,
    };
    let profile = scale_profile(&f, &deltas)?;
    let lip = lip_norm(&f);
    let mut checks = vec![
        Check::new(
            "bounded_by_norm",
            profile.constants.iter().all(|c| *c <= lip * (1.0 + TOL)),
            format!("lip_norm = {lip}"),
        ),
        Check::new(
            "monotone",
            profile.constants.windows(2).all(|w| w[1] <= w[0]),
            "constants shrink with the scale",
        ),
    ];
    if let Some(beta) = cfg.beta {
        let alpha = cfg.alpha.unwrap_or(1.0);
        let expected = (beta - alpha) / alpha;
        let ok = profile
            .slope_estimate
            .is_some_and(|s| (s - expected).abs() <= 0.1);
        checks.push(Check::new(
            "slope",
            ok,
            format!("fitted {:?}, expected {expected} ± 0.1", profile.slope_estimate),
        ));
    }
    let table = formats::profile_table(&profile);
    Ok((
        checks,
        json!({ "lip_norm": lip, "profile": profile }),
        Some(table),
    ))
}

fn cmd_mcshane(cfg: &RunConfig) -> Result<Body, LabError> {
    let space = space(cfg)?;
    let known = partial_function(cfg, &space)?;
    let tight = lip_constant_on(&space, &known);
    let bound = cfg.lip.unwrap_or(tight);
    let values = extend(&space, &known, bound, cfg.extension.into())?;
    let achieved = lip_constant(&space, &values);
    let reproduces = known.iter().all(|&(p, v)| values[p] == v);
    let checks = vec![
        Check::new(
            "reproduces",
            reproduces,
            "extension equals the data on the subset",
        ),
        Check::new(
            "lipschitz_bound",
            achieved <= bound * (1.0 + LIP_BOUND_SLACK),
            format!("constant {achieved} against bound {bound}"),
        ),
        Check::new(
            "tight",
            achieved >= tight * (1.0 - LIP_BOUND_SLACK),
            format!("constant {achieved}, data constant {tight}"),
        ),
    ];
    let labels = labels_of(&space);
    let mut t = Table::new(&["label", "value"]);
    for (l, v) in labels.iter().zip(&values) {
        t.rows.push(vec![l.clone(), fmt17(*v)]);
    }
    let result = json!({
        "extension": cfg.extension,
        "bound": bound,
        "data_constant": tight,
        "lip_constant": achieved,
        "values": values,
    });
    Ok((checks, result, Some(t)))
}

fn lip_constant_on(space: &PointedMetricSpace, known: &[(usize, f64)]) -> f64 {
    let mut best = 0.0f64;
    for (a, &(p, gp)) in known.iter().enumerate() {
        for &(q, gq) in &known[a + 1..] {
            best = best.max((gp - gq).abs() / space.dist(p, q));
        }
    }
    best
}

fn cmd_deleeuw(cfg: &RunConfig) -> Result<Body, LabError> {
    let space = space(cfg)?;
    let f = function(cfg, &space)?;
    let ps = PairSpace::new(&space);
    let image = deleeuw_map(&ps, &f)?;
    let lip = lip_norm(&f);
    let sup = image.sup_norm();
    let mut checks = vec![
        Check::new("isometry", rel_close(sup, lip), format!("sup {sup}, lip {lip}")),
        Check::new(
            "antisymmetric",
            image.is_antisymmetric(),
            "value(i, j) = -value(j, i)",
        ),
    ];
    let mut result = json!({ "lip_norm": lip, "sup_norm": sup, "pairs": ps.len() });
    if let Some(deltas) = &cfg.deltas {
        let c0 = c0_profile(&image, deltas)?;
        let direct = scale_profile(&f, deltas)?;
        checks.push(Check::new(
            "c0_profile",
            c0 == direct.constants,
            "pair-space profile equals the scale profile",
        ));
        result["c0_profile"] = json!({ "deltas": deltas, "constants": c0 });
    }
    let table = formats::pair_function_table(&image);
    result["values"] = json!(image.values());
    Ok((checks, result, Some(table)))
}

fn cmd_embed(cfg: &RunConfig) -> Result<Body, LabError> {
    let space = space(cfg)?;
    let f = function(cfg, &space)?;
    let e = enumeration(cfg, &space)?;
    let x = sequence_embed(&f, &e, GeometricWeights::new(cfg.ratio)?)?;
    let lip = lip_norm(&f);
    let fsup = functional_sup(&f, &e)?;
    let sup = sup_norm(&f);
    let norm = x.norm();
    let mut checks = vec![
        Check::new(
            "functional_identity",
            rel_close(fsup, lip),
            format!("sup {fsup}, lip {lip}"),
        ),
        Check::new(
            "norm_below_sup",
            norm <= sup * (1.0 + TOL),
            format!("{norm} <= {sup}"),
        ),
    ];
    let mut result = json!({
        "lip_norm": lip,
        "functional_sup": fsup,
        "sup_norm": sup,
        "norm": norm,
        "ratio": cfg.ratio,
        "enumeration": e.as_slice(),
        "entries": x.entries,
        "weights": x.weights,
    });
    if let Some(eps) = cfg.eps {
        let bound = c0_membership_bound(&f, eps)?;
        checks.push(Check::new(
            "c0_bound",
            bound.consistent,
            "exceptional pairs are separated",
        ));
        result["c0_bound"] = json!(bound);
    }
    let labels = labels_of(&space);
    let mut t = Table::new(&["position", "point", "entry", "weight"]);
    for (k, ((p, v), w)) in e.as_slice().iter().zip(&x.entries).zip(&x.weights).enumerate() {
        t.rows.push(vec![
            (k + 1).to_string(),
            labels[*p].clone(),
            fmt17(*v),
            fmt17(*w),
        ]);
    }
    Ok((checks, result, Some(t)))
}

fn cmd_approx(cfg: &RunConfig) -> Result<Body, LabError> {
    let alpha = cfg.alpha.ok_or_else(|| input("approx needs --alpha"))?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(input("--alpha must lie in (0, 1)"));
    }
    let n = cfg.n.unwrap_or(1);
    let mut cfg = cfg.clone();
    if cfg.power.is_none() && cfg.function.is_none() {
        cfg.power = cfg.beta;
    }
    let space = space(&cfg)?;
    let f = function(&cfg, &space)?;
    let e = enumeration(&cfg, &space)?;
    let step = little_lip_approximant(&f, alpha, n, &e)?;
    let result_norm = lip_constant(&space, &step.f_n);
    let shrink = (1.0 + 1.0 / n as f64).powi(2);
    let max_f = step
        .points
        .iter()
        .map(|&p| f.values()[p].abs())
        .fold(0.0, f64::max);
    let expected_gap = (1.0 - 1.0 / shrink) * max_f;
    let gap = step
        .points
        .iter()
        .map(|&p| (step.f_n[p] - f.values()[p]).abs())
        .fold(0.0, f64::max);
    let checks = vec![
        Check::new(
            "certificate",
            step.cert.holds(),
            "restriction, diameter and chain bounds",
        ),
        Check::new(
            "unit_ball",
            result_norm <= step.normalization * (1.0 + TOL),
            format!("lip_norm(f_n) = {result_norm}"),
        ),
        Check::new(
            "pointwise_gap",
            (gap - expected_gap).abs() <= TOL * expected_gap.max(1.0),
            format!("{gap} against {expected_gap}"),
        ),
    ];
    let labels = labels_of(&space);
    let mut t = Table::new(&["point", "label", "in_prefix", "f", "big_g_n", "f_n"]);
    for (p, label) in labels.iter().enumerate() {
        t.rows.push(vec![
            p.to_string(),
            label.clone(),
            step.points.contains(&p).to_string(),
            fmt17(f.values()[p]),
            fmt17(step.big_g_n[p]),
            fmt17(step.f_n[p]),
        ]);
    }
    let result = json!({ "step": step, "lip_norm_f_n": result_norm, "prefix_gap": gap });
    Ok((checks, result, Some(t)))
}

/// Scenario JSON for the sequence model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThreeBallInput {
    pub f: Vec<f64>,
    pub g: [Vec<f64>; 3],
    pub support: Vec<usize>,
}

/// Scenario JSON for `lproj`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LProjInput {
    pub xstar: Vec<f64>,
    pub support: Vec<usize>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn witness_checks(w: &ThreeBallWitness, oracle: f64, coordinate: bool) -> Vec<Check> {
    let violations = witness_violations(w);
    let regions = region_report(w);
    let mut checks = vec![
        Check::new("invariants", violations.is_empty(), violations.join("; ")),
        Check::new(
            "achieved_bound",
            w.achieved <= w.bound + TOL,
            format!("{} <= {}", w.achieved, w.bound),
        ),
        Check::new(
            "regions",
            regions.iter().all(|b| b.holds()),
            "empirical within caps",
        ),
        Check::new(
            "oracle_dominance",
            oracle <= w.achieved + TOL,
            format!("optimum {oracle} <= achieved {}", w.achieved),
        ),
    ];
    if coordinate {
        checks.push(Check::new(
            "optimum_within_eps",
            oracle <= 1.0 + w.eps + TOL,
            format!("optimum {oracle} <= {}", 1.0 + w.eps),
        ));
    }
    checks
}

fn cmd_threeball(cfg: &RunConfig) -> Result<Body, LabError> {
    let eps = cfg.eps.unwrap_or(0.25);
    let (w, opt, coordinate) = match cfg.model {
        ModelArg::Sequence => {
            let sc = match &cfg.input {
                Some(path) => {
                    let inp: ThreeBallInput = read_json(path)?;
                    scenario::SequenceScenario {
                        model: SupModel::new(inp.f.len(), &inp.support)?,
                        f: inp.f,
                        g: inp.g,
                    }
                }
                None => {
                    let support = cfg.support.unwrap_or(cfg.sites * 3 / 4);
                    let mut rng = scenario::rng(cfg.seed);
                    scenario::sequence_scenario(&mut rng, cfg.sites, support, !cfg.random_f)?
                }
            };
            let opt = three_ball_oracle(&sc.f, sc.g_refs(), &sc.model)?;
            let mut oracle = TruncationOracle::new(&sc.model);
            let w = three_ball_witness(&sc.f, sc.g_refs(), eps, &mut oracle, &sc.model, cfg.r)?;
            (w, opt, true)
        }
        ModelArg::Deleeuw => {
            let mut rng = scenario::rng(cfg.seed);
            let sc = scenario::deleeuw_scenario(&mut rng, cfg.grid.unwrap_or(17), cfg.alpha.unwrap_or(0.5))?;
            let f = sc.f_image();
            let model = SupModel::full(f.len());
            let opt = three_ball_oracle(&f, sc.g_refs(), &model)?;
            let mut oracle = DeLeeuwOracle::new(sc.target(), sc.alpha, sc.enumeration.clone());
            let w = three_ball_witness(&f, sc.g_refs(), eps, &mut oracle, &model, cfg.r)?;
            (w, opt, false)
        }
    };
    let checks = witness_checks(&w, opt.value, coordinate);
    let regions = region_report(&w);
    let table = formats::region_table(&regions);
    let result = json!({
        "model": cfg.model,
        "optimum": opt,
        "witness": w,
        "region_report": regions,
    });
    Ok((checks, result, Some(table)))
}

fn cmd_lproj(cfg: &RunConfig) -> Result<Body, LabError> {
    let cases: Vec<LProjInput> = match &cfg.input {
        Some(path) => vec![read_json(path)?],
        None => {
            let mut rng = scenario::rng(cfg.seed);
            (0..cfg.trials)
                .map(|_| {
                    let n = rng.gen_range(1..=cfg.sites.max(1));
                    LProjInput {
                        xstar: (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect(),
                        support: (0..n).filter(|_| rng.gen_bool(0.5)).collect(),
                    }
                })
                .collect()
        }
    };
    let mut t = Table::new(&["trial", "lhs", "rhs", "ok"]);
    let mut results = Vec::with_capacity(cases.len());
    for (k, c) in cases.iter().enumerate() {
        if let Some(&bad) = c.support.iter().find(|&&i| i >= c.xstar.len()) {
            return Err(input(format!("support index {bad} out of range")));
        }
        let p = l_projection_check(&c.xstar, &SiteSet::from_indices(c.xstar.len(), &c.support))?;
        t.rows
            .push(vec![k.to_string(), fmt17(p.lhs), fmt17(p.rhs), p.ok.to_string()]);
        results.push(p);
    }
    let failed = results.iter().filter(|p| !p.ok).count();
    let checks = vec![Check::new(
        "l_projection",
        failed == 0,
        format!("{failed} of {} trials unequal", results.len()),
    )];
    let result = if results.len() == 1 {
        json!(results[0])
    } else {
        json!({ "trials": results.len(), "failed": failed })
    };
    Ok((checks, result, Some(t)))
}

/// Runs the command and assembles its report.
pub fn execute(cfg: &RunConfig) -> Result<Output, LabError> {
    let (checks, result, table) = match cfg.command {
        Command::Validate => cmd_validate(cfg),
        Command::Norm => cmd_norm(cfg),
        Command::Snowflake => cmd_snowflake(cfg),
        Command::Profile => cmd_profile(cfg),
        Command::Mcshane => cmd_mcshane(cfg),
        Command::Deleeuw => cmd_deleeuw(cfg),
        Command::Embed => cmd_embed(cfg),
        Command::Approx => cmd_approx(cfg),
        Command::Threeball => cmd_threeball(cfg),
        Command::Lproj => cmd_lproj(cfg),
    }?;
    let pass = checks.iter().all(|c| c.pass);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: command_name(cfg.command),
        params: serde_json::to_value(cfg).expect("config is plain data"),
        checks,
        pass,
        result,
    };
    Ok(Output { report, table })
}

fn command_name(c: Command) -> String {
    serde_json::to_value(c)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Executes, writes the report and returns the exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let (text, code) = match execute(cfg) {
        Ok(out) => {
            let code = if out.report.pass { 0 } else { 1 };
            match cfg.format {
                Format::Json => (Ok(pretty(&out.report)), code),
                Format::Csv => match out.table {
                    Some(t) => (t.to_csv(), code),
                    None => (Err(input("no CSV form for this command")), 2),
                },
            }
        }
        Err(e) => (Err(e), 0),
    };
    let (text, code) = match text {
        Ok(t) => (t, code),
        Err(e) => {
            let code = e.exit_code();
            let body = ErrorReport {
                schema_version: SCHEMA_VERSION,
                command: command_name(cfg.command),
                pass: false,
                error: ErrorBody {
                    kind: e.kind().to_string(),
                    message: e.to_string(),
                },
            };
            eprintln!("lipideal: {e}");
            (pretty(&body), code)
        }
    };
    match formats::emit(cfg.out.as_deref(), &text) {
        Ok(()) => code,
        Err(e) => {
            eprintln!("lipideal: {e}");
            2
        }
    }
}
