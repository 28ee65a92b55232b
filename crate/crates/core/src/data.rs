//! Synthetic datasets, file loaders and run persistence.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{gaussian_matrix, orthonormalize};
use crate::optimizer::{RunRecord, TelemetryRow};
use crate::problems::{AnyProblem, LrmcProblem, PcaProblem, SqrtAbsSphereProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    /// Rows drawn uniformly from the unit sphere.
    SphereUniform,
    /// `X = G Bᵀ + noise·E` with a rank-`r_true` factor `B`.
    GaussianLowRank,
    /// `Z = B Aᵀ + noise·E`, observed through a Bernoulli mask.
    MaskedLowRank,
    /// One sample per line, comma separated.
    DenseCsv,
    /// `row,col,value` lines.
    TripletFile,
}

fn default_density() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    /// Number of samples (columns for matrix completion).
    #[serde(rename = "N", default)]
    pub num_samples: usize,
    /// Ambient dimension (rows for matrix completion).
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub r_true: usize,
    #[serde(default)]
    pub noise: f64,
    #[serde(default = "default_density")]
    pub mask_density: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Min-max normalize loaded values to `[0, 1]`.
    #[serde(default)]
    pub normalize: bool,
}

impl DatasetSpec {
    pub fn synthetic(kind: DatasetKind, num_samples: usize, n: usize, r_true: usize, seed: u64) -> Self {
        DatasetSpec {
            kind,
            num_samples,
            n,
            r_true,
            noise: 0.0,
            mask_density: 1.0,
            seed,
            path: None,
            normalize: false,
        }
    }
}

/// Raw data before it is bound to an objective.
#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    /// `N × n`, one sample per row.
    Dense(DMatrix<f64>),
    /// Observed entries of an `n × N` matrix.
    Masked { n: usize, num_cols: usize, entries: Vec<(usize, usize, f64)> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedData {
    pub data: Dataset,
    /// Orthonormal basis of the planted subspace, when there is one.
    pub truth: Option<DMatrix<f64>>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Pca,
    Lrmc,
    SqrtAbs,
}

impl DatasetKind {
    /// The objective each dataset kind feeds by default.
    pub fn default_problem(self) -> ProblemKind {
        match self {
            DatasetKind::SphereUniform => ProblemKind::SqrtAbs,
            DatasetKind::GaussianLowRank | DatasetKind::DenseCsv => ProblemKind::Pca,
            DatasetKind::MaskedLowRank | DatasetKind::TripletFile => ProblemKind::Lrmc,
        }
    }
}

/// Planted rank-`r` factor `Q·diag(s)` with `s_k² = r + 1 − k`, plus `Q`.
fn planted_factor(rng: &mut ChaCha8Rng, n: usize, r: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let q = orthonormalize(gaussian_matrix(rng, n, r))?;
    let mut b = q.clone();
    for k in 0..r {
        let s = ((r - k) as f64).sqrt();
        b.column_mut(k).scale_mut(s);
    }
    Ok((q, b))
}

fn check_synthetic(spec: &DatasetSpec) -> Result<()> {
    if spec.num_samples == 0 || spec.n == 0 {
        return Err(Error::invalid("synthetic datasets need N >= 1 and n >= 1"));
    }
    if !(spec.noise >= 0.0) || !spec.noise.is_finite() {
        return Err(Error::invalid(format!("noise must be nonnegative, got {}", spec.noise)));
    }
    Ok(())
}

fn check_rank(spec: &DatasetSpec) -> Result<()> {
    if spec.r_true == 0 || spec.r_true > spec.n {
        return Err(Error::invalid(format!(
            "r_true must lie in [1, n = {}], got {}",
            spec.n, spec.r_true
        )));
    }
    Ok(())
}

/// Generates or loads the dataset described by `spec`. Synthetic data is a
/// deterministic function of the spec, seed included.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<GeneratedData> {
    let mut warnings = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        DatasetKind::SphereUniform => {
            check_synthetic(spec)?;
            if spec.n < 2 {
                return Err(Error::invalid("the sphere needs n >= 2"));
            }
            let mut x = gaussian_matrix(&mut rng, spec.num_samples, spec.n);
            for mut row in x.row_iter_mut() {
                let norm = row.norm();
                row /= norm;
            }
            Ok(GeneratedData { data: Dataset::Dense(x), truth: None, warnings })
        }
        DatasetKind::GaussianLowRank => {
            check_synthetic(spec)?;
            check_rank(spec)?;
            let (q, b) = planted_factor(&mut rng, spec.n, spec.r_true)?;
            let g = gaussian_matrix(&mut rng, spec.num_samples, spec.r_true);
            let mut x = g * b.transpose();
            if spec.noise > 0.0 {
                x += gaussian_matrix(&mut rng, spec.num_samples, spec.n) * spec.noise;
            }
            Ok(GeneratedData { data: Dataset::Dense(x), truth: Some(q), warnings })
        }
        DatasetKind::MaskedLowRank => {
            check_synthetic(spec)?;
            check_rank(spec)?;
            let d = spec.mask_density;
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::invalid(format!("mask_density must lie in (0, 1], got {d}")));
            }
            if d * (spec.n as f64) < spec.r_true as f64 {
                warnings.push(format!(
                    "mask_density * n = {} is below r_true = {}; many columns will be under-observed",
                    d * spec.n as f64,
                    spec.r_true
                ));
            }
            let (q, b) = planted_factor(&mut rng, spec.n, spec.r_true)?;
            let a = gaussian_matrix(&mut rng, spec.num_samples, spec.r_true);
            let mut z = b * a.transpose();
            if spec.noise > 0.0 {
                z += gaussian_matrix(&mut rng, spec.n, spec.num_samples) * spec.noise;
            }
            let mut entries = Vec::new();
            for j in 0..spec.num_samples {
                for i in 0..spec.n {
                    if d >= 1.0 || rng.random::<f64>() < d {
                        entries.push((i, j, z[(i, j)]));
                    }
                }
            }
            Ok(GeneratedData {
                data: Dataset::Masked { n: spec.n, num_cols: spec.num_samples, entries },
                truth: Some(q),
                warnings,
            })
        }
        DatasetKind::DenseCsv => {
            let path = spec.path.as_deref().ok_or_else(|| Error::invalid("dense_csv needs a path"))?;
            let mut x = load_dense_csv(path)?;
            if spec.normalize {
                min_max_normalize(x.as_mut_slice());
            }
            Ok(GeneratedData { data: Dataset::Dense(x), truth: None, warnings })
        }
        DatasetKind::TripletFile => {
            let path = spec.path.as_deref().ok_or_else(|| Error::invalid("triplet_file needs a path"))?;
            let loaded = load_triplets(path)?;
            warnings.extend(loaded.warnings);
            let mut entries = loaded.entries;
            if spec.normalize {
                let mut values: Vec<f64> = entries.iter().map(|e| e.2).collect();
                min_max_normalize(&mut values);
                for (e, v) in entries.iter_mut().zip(values) {
                    e.2 = v;
                }
            }
            let n = if spec.n > 0 { spec.n } else { loaded.n };
            let num_cols = if spec.num_samples > 0 { spec.num_samples } else { loaded.num_cols };
            Ok(GeneratedData { data: Dataset::Masked { n, num_cols, entries }, truth: None, warnings })
        }
    }
}

/// Binds a dataset to an objective with `r` columns.
pub fn build_problem(data: &Dataset, kind: ProblemKind, r: usize) -> Result<AnyProblem> {
    match (data, kind) {
        (Dataset::Dense(x), ProblemKind::Pca) => Ok(AnyProblem::Pca(PcaProblem::new(x, r)?)),
        (Dataset::Dense(x), ProblemKind::SqrtAbs) => {
            if r != 1 {
                return Err(Error::invalid(format!("the sqrt-abs problem needs r = 1, got {r}")));
            }
            Ok(AnyProblem::SqrtAbs(SqrtAbsSphereProblem::new(x)?))
        }
        (Dataset::Masked { n, num_cols, entries }, ProblemKind::Lrmc) => {
            Ok(AnyProblem::Lrmc(LrmcProblem::new(*n, *num_cols, r, entries)?))
        }
        (Dataset::Dense(_), ProblemKind::Lrmc) => {
            Err(Error::invalid("matrix completion needs masked (triplet) data"))
        }
        (Dataset::Masked { .. }, _) => Err(Error::invalid("masked data only supports matrix completion")),
    }
}

/// Generates the dataset and binds it to the spec's default objective.
pub fn generate(spec: &DatasetSpec, r: usize) -> Result<AnyProblem> {
    let data = generate_dataset(spec)?;
    build_problem(&data.data, spec.kind.default_problem(), r)
}

fn read_nonempty(path: impl AsRef<Path>) -> Result<String> {
    let text = fs::read_to_string(path.as_ref())?;
    if text.trim().is_empty() {
        return Err(Error::invalid(format!("{} is empty", path.as_ref().display())));
    }
    Ok(text)
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse { line, message: format!("bad number {:?}: {e}", field.trim()) })
}

fn parse_usize(field: &str, line: usize) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|e| Error::Parse { line, message: format!("bad index {:?}: {e}", field.trim()) })
}

/// Reads a dense matrix with one sample per line. Blank lines are skipped.
pub fn load_dense_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let text = read_nonempty(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let row = raw.split(',').map(|f| parse_f64(f, line)).collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    let ncols = rows[0].len();
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedTriplets {
    pub entries: Vec<(usize, usize, f64)>,
    /// One past the largest row index.
    pub n: usize,
    /// One past the largest column index.
    pub num_cols: usize,
    pub warnings: Vec<String>,
}

/// Reads `row,col,value` lines. Repeated `(row, col)` pairs keep the last
/// value and produce a warning.
pub fn load_triplets(path: impl AsRef<Path>) -> Result<LoadedTriplets> {
    let text = read_nonempty(path)?;
    let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse { line, message: format!("expected row,col,value, found {raw:?}") });
        }
        let i = parse_usize(fields[0], line)?;
        let j = parse_usize(fields[1], line)?;
        let v = parse_f64(fields[2], line)?;
        if map.insert((i, j), v).is_some() {
            warnings.push(format!("line {line}: duplicate entry ({i}, {j}); keeping the last value"));
        }
    }
    let n = map.keys().map(|&(i, _)| i + 1).max().unwrap_or(0);
    let num_cols = map.keys().map(|&(_, j)| j + 1).max().unwrap_or(0);
    let entries = map.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    Ok(LoadedTriplets { entries, n, num_cols, warnings })
}

/// Affine map of `values` onto `[0, 1]` (constant input maps to 0).
pub fn min_max_normalize(values: &mut [f64]) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    for v in values.iter_mut() {
        *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes a dataset: dense rows as CSV, masked data as triplets.
pub fn dataset_to_string(data: &Dataset) -> String {
    let mut out = String::new();
    match data {
        Dataset::Dense(x) => {
            for row in x.row_iter() {
                let fields: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
        Dataset::Masked { entries, .. } => {
            for &(i, j, v) in entries {
                let _ = writeln!(out, "{i},{j},{}", fmt_f64(v));
            }
        }
    }
    out
}

pub fn write_dataset(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, dataset_to_string(data))?;
    Ok(())
}

pub const RUN_CSV_HEADER: &str = "iter,batch_size,lr,sfo_cum,grad_norm,loss,wall_ms";

pub fn run_csv_string(rows: &[TelemetryRow]) -> String {
    let mut out = String::from(RUN_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            r.batch_size,
            fmt_f64(r.lr),
            r.sfo_cum,
            fmt_f64(r.grad_norm),
            fmt_f64(r.loss),
            fmt_f64(r.wall_ms)
        );
    }
    out
}

pub fn write_run_csv(rows: &[TelemetryRow], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, run_csv_string(rows))?;
    Ok(())
}

pub fn read_run_csv(path: impl AsRef<Path>) -> Result<Vec<TelemetryRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == RUN_CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, message: "missing telemetry header".into() }),
    }
    let mut rows = Vec::new();
    for (k, raw) in lines {
        let line = k + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Parse { line, message: format!("expected 7 fields, found {}", f.len()) });
        }
        rows.push(TelemetryRow {
            iter: parse_usize(f[0], line)?,
            batch_size: parse_usize(f[1], line)? as u64,
            lr: parse_f64(f[2], line)?,
            sfo_cum: parse_usize(f[3], line)? as u64,
            grad_norm: parse_f64(f[4], line)?,
            loss: parse_f64(f[5], line)?,
            wall_ms: parse_f64(f[6], line)?,
        });
    }
    Ok(rows)
}

/// Per-run summary entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub min_grad_norm_sq: f64,
    pub total_sfo: u64,
    pub final_loss: Option<f64>,
    pub final_grad_norm: Option<f64>,
}

impl From<&RunRecord> for RunSummary {
    fn from(r: &RunRecord) -> Self {
        RunSummary {
            min_grad_norm_sq: r.min_grad_norm_sq,
            total_sfo: r.total_sfo,
            final_loss: r.rows.last().map(|row| row.loss),
            final_grad_norm: r.rows.last().map(|row| row.grad_norm),
        }
    }
}

/// Writes a JSON document keyed by run label. Labels are emitted in sorted
/// order so equal inputs give equal bytes.
pub fn write_summary<'a, I>(records: I, path: impl AsRef<Path>) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, &'a RunRecord)>,
{
    let map: BTreeMap<&str, RunSummary> = records.into_iter().map(|(k, r)| (k, RunSummary::from(r))).collect();
    let text = serde_json::to_string_pretty(&map).map_err(|e| Error::invalid(format!("summary encoding: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<BTreeMap<String, RunSummary>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
}

/// Sample mean of the rows of `x`.
pub fn row_mean(x: &DMatrix<f64>) -> DVector<f64> {
    let mut m = DVector::zeros(x.ncols());
    for row in x.row_iter() {
        m += row.transpose();
    }
    m / x.nrows().max(1) as f64
}
