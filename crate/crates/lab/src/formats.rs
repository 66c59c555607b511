//! Readers and writers for spaces, functions and reports.
//!
//! Spaces come from a CSV distance matrix (header row of point names, base
//! point from `--base` or a `<file>.base` sidecar), a JSON document
//! `{points, dist, base}`, or a point-cloud CSV (`label,x1,...,xk`) with a
//! declared p-norm. Functions are `label,value` CSV or a JSON object mapping
//! labels to values.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lipideal_core::embed::PairFunction;
use lipideal_core::lip::ScaleProfile;
use lipideal_core::metric::{validate_metric, MetricValidationReport, PNorm};
use lipideal_core::mideal::{Region, RegionBound};
use lipideal_core::PointedMetricSpace;
use serde::{Deserialize, Serialize};

use crate::LabError;

/// JSON layout of a metric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub points: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    pub base: String,
}

/// A distance matrix as read from disk, not yet validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSpace {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    pub base: usize,
}

impl RawSpace {
    pub fn validate(&self) -> Result<MetricValidationReport, LabError> {
        Ok(validate_metric(&self.dist)?)
    }

    pub fn build(self) -> Result<PointedMetricSpace, LabError> {
        Ok(PointedMetricSpace::new(self.dist, self.base)?.with_labels(self.labels)?)
    }

    pub fn from_space(space: &PointedMetricSpace) -> Self {
        Self {
            labels: labels_of(space),
            dist: space.matrix(),
            base: space.base(),
        }
    }

    pub fn to_file(&self) -> SpaceFile {
        SpaceFile {
            points: self.labels.clone(),
            dist: self.dist.clone(),
            base: self.labels[self.base].clone(),
        }
    }
}

/// Labels of a space, falling back to point indices.
pub fn labels_of(space: &PointedMetricSpace) -> Vec<String> {
    match space.labels() {
        Some(l) => l.to_vec(),
        None => (0..space.len()).map(|i| i.to_string()).collect(),
    }
}

fn input_err(path: &Path, msg: impl std::fmt::Display) -> LabError {
    LabError::Input(format!("{}: {msg}", path.display()))
}

fn read(path: &Path) -> Result<String, LabError> {
    fs::read_to_string(path).map_err(|e| input_err(path, e))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn parse_f64(path: &Path, field: &str) -> Result<f64, LabError> {
    field
        .trim()
        .parse()
        .map_err(|_| input_err(path, format!("`{field}` is not a number")))
}

fn find_base(path: &Path, labels: &[String], base: Option<&str>) -> Result<usize, LabError> {
    let sidecar = PathBuf::from(format!("{}.base", path.display()));
    let name = match base {
        Some(b) => Some(b.to_string()),
        None if sidecar.exists() => Some(read(&sidecar)?.trim().to_string()),
        None => None,
    };
    match name {
        None => Ok(0),
        Some(n) => labels
            .iter()
            .position(|l| *l == n)
            .ok_or_else(|| input_err(path, format!("base point `{n}` is not a point name"))),
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

/// Loads a space. `pnorm` selects the point-cloud reading of a CSV file.
pub fn load_raw_space(path: &Path, base: Option<&str>, pnorm: Option<PNorm>) -> Result<RawSpace, LabError> {
    let text = read(path)?;
    if is_json(path) {
        let file: SpaceFile = serde_json::from_str(&text).map_err(|e| input_err(path, e))?;
        let base = find_base(path, &file.points, base.or(Some(file.base.as_str())))?;
        if file.points.len() != file.dist.len() {
            return Err(input_err(path, "`points` and `dist` differ in length"));
        }
        return Ok(RawSpace {
            labels: file.points,
            dist: file.dist,
            base,
        });
    }
    let mut rdr = csv_reader(&text);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| input_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| input_err(path, e))?;
        rows.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    match pnorm {
        Some(norm) => {
            if header.len() < 2 {
                return Err(input_err(
                    path,
                    "point cloud needs a label column and coordinates",
                ));
            }
            let mut labels = Vec::new();
            let mut coords = Vec::new();
            for row in &rows {
                if row.len() != header.len() {
                    return Err(input_err(
                        path,
                        format!("row `{}` has {} fields", row[0], row.len()),
                    ));
                }
                labels.push(row[0].clone());
                coords.push(
                    row[1..]
                        .iter()
                        .map(|c| parse_f64(path, c))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            let dist = coords
                .iter()
                .map(|a| coords.iter().map(|b| norm.distance(a, b)).collect())
                .collect();
            let base = find_base(path, &labels, base)?;
            Ok(RawSpace { labels, dist, base })
        }
        None => {
            let n = header.len();
            let mut dist = Vec::with_capacity(rows.len());
            for row in &rows {
                // an optional leading label column is allowed
                let cells = if row.len() == n + 1 { &row[1..] } else { &row[..] };
                dist.push(
                    cells
                        .iter()
                        .map(|c| parse_f64(path, c))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            if dist.len() != n {
                return Err(input_err(path, format!("{n} names but {} rows", dist.len())));
            }
            let base = find_base(path, &header, base)?;
            Ok(RawSpace {
                labels: header,
                dist,
                base,
            })
        }
    }
}

/// Loads `(label, value)` pairs; labels must name points of the space.
pub fn load_partial_function(path: &Path, labels: &[String]) -> Result<Vec<(usize, f64)>, LabError> {
    let text = read(path)?;
    let entries: Vec<(String, f64)> = if is_json(path) {
        let map: BTreeMap<String, f64> = serde_json::from_str(&text).map_err(|e| input_err(path, e))?;
        map.into_iter().collect()
    } else {
        let mut out = Vec::new();
        for rec in csv_reader(&text).records() {
            let rec = rec.map_err(|e| input_err(path, e))?;
            if rec.len() != 2 {
                return Err(input_err(path, "expected `label,value` rows"));
            }
            out.push((rec[0].to_string(), parse_f64(path, &rec[1])?));
        }
        out
    };
    let mut seen = vec![false; labels.len()];
    let mut out = Vec::with_capacity(entries.len());
    for (label, v) in entries {
        let i = labels
            .iter()
            .position(|l| *l == label)
            .ok_or_else(|| input_err(path, format!("`{label}` is not a point of the space")))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(input_err(path, format!("`{label}` is listed twice")));
        }
        out.push((i, v));
    }
    out.sort_by_key(|e| e.0);
    Ok(out)
}

/// Loads a function defined at every point.
pub fn load_function(path: &Path, labels: &[String]) -> Result<Vec<f64>, LabError> {
    let partial = load_partial_function(path, labels)?;
    if partial.len() != labels.len() {
        return Err(input_err(
            path,
            format!("{} of {} points have values", partial.len(), labels.len()),
        ));
    }
    Ok(partial.into_iter().map(|(_, v)| v).collect())
}

/// 17 significant digits, round-trip exact.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus string rows, written as CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String, LabError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(io_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(io_err)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| LabError::Io(e.to_string()))
    }
}

fn io_err(e: csv::Error) -> LabError {
    LabError::Io(e.to_string())
}

pub fn profile_table(p: &ScaleProfile) -> Table {
    let mut t = Table::new(&["delta", "constant"]);
    for (d, c) in p.deltas.iter().zip(&p.constants) {
        t.rows.push(vec![fmt17(*d), fmt17(*c)]);
    }
    t
}

pub fn pair_function_table(f: &PairFunction<'_>) -> Table {
    let ps = f.pair_space();
    let mut t = Table::new(&["i", "j", "d", "value"]);
    for ((&(i, j), d), v) in ps.pairs().iter().zip(ps.pair_dist()).zip(f.values()) {
        t.rows
            .push(vec![i.to_string(), j.to_string(), fmt17(*d), fmt17(*v)]);
    }
    t
}

pub fn matrix_table(raw: &RawSpace) -> Table {
    let mut t = Table {
        header: raw.labels.clone(),
        rows: Vec::new(),
    };
    for row in &raw.dist {
        t.rows.push(row.iter().map(|d| fmt17(*d)).collect());
    }
    t
}

pub fn region_table(regions: &[RegionBound]) -> Table {
    let mut t = Table::new(&["region", "u", "sites", "empirical", "cap", "sharp_cap", "holds"]);
    for b in regions {
        let (name, u) = match b.region {
            Region::Core => ("core", String::new()),
            Region::Shell(u) => ("shell", u.to_string()),
            Region::Tail => ("tail", String::new()),
        };
        t.rows.push(vec![
            name.to_string(),
            u,
            b.sites.to_string(),
            b.empirical.map(fmt17).unwrap_or_default(),
            fmt17(b.cap),
            fmt17(b.sharp_cap),
            b.holds().to_string(),
        ]);
    }
    t
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), LabError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| LabError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| LabError::Io(e.to_string()))
        }
    }
}
