//! End-to-end orchestration: files in, entropy tables and test reports out.
//!
//! Each input file is processed independently (optionally in parallel) and
//! results are always emitted in input order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::alpha::{alpha_complex, FilteredComplex};
use crate::delaunay::GeometryError;
use crate::entropy::{summarize_entropy, EntropyError, EntropySummary, InfinitePolicy};
use crate::geometry::{CloudError, PointCloud};
use crate::ingest::{compute_centroids, load_label_matrix, spiral_select, IngestError, LabelFormat, LabelMatrix};
use crate::par;
use crate::persistence::{compute_persistence, Barcode, PersistenceError};
use crate::stats::{
    dunn_test, five_number, kruskal_wallis, Adjustment, GroupSample, KruskalWallis, PairwiseComparison, StatsError,
    DEFAULT_ADJUSTMENT,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Persistence(#[from] PersistenceError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("summary table: {0}")]
    Table(String),
    #[error("point cloud has {0} points, need at least 3")]
    TooFewPoints(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot tell the input format of {0} (expected .pgm or .csv)")]
    UnknownFormat(String),
}

/// How to treat intervals that never die.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InfiniteMode {
    Drop,
    /// Cap at the largest filtration value of the sample's complex.
    Cap,
}

impl InfiniteMode {
    pub fn policy(&self, fc: &FilteredComplex) -> InfinitePolicy {
        match self {
            Self::Drop => InfinitePolicy::Drop,
            Self::Cap => InfinitePolicy::Cap(fc.max_value()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub n_cells: usize,
    pub log_base: f64,
    pub infinite: InfiniteMode,
    pub adjustment: Adjustment,
    pub alpha_threshold: f64,
    /// Spiral origin `(row, col)`; the matrix centre when `None`.
    pub start: Option<(usize, usize)>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_cells: 400,
            log_base: 2.0,
            infinite: InfiniteMode::Drop,
            adjustment: DEFAULT_ADJUSTMENT,
            alpha_threshold: 0.005,
            start: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.n_cells < 3 {
            return Err(PipelineError::Config(format!("cells must be at least 3, got {}", self.n_cells)));
        }
        if !(self.log_base > 1.0 && self.log_base.is_finite()) {
            return Err(PipelineError::Config(format!("log base must be > 1, got {}", self.log_base)));
        }
        if !(self.alpha_threshold > 0.0 && self.alpha_threshold < 1.0) {
            return Err(PipelineError::Config(format!("alpha must lie in (0, 1), got {}", self.alpha_threshold)));
        }
        Ok(())
    }
}

/// What a file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Labels(LabelFormat),
    Cloud,
}

/// `.pgm` is a label raster; `.csv` is a point cloud when its header is
/// `x,y` and a label raster otherwise.
pub fn detect_input(path: &Path, bytes: &[u8]) -> Result<InputKind, PipelineError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match LabelFormat::from_extension(ext) {
        Some(LabelFormat::Pgm) => Ok(InputKind::Labels(LabelFormat::Pgm)),
        Some(LabelFormat::Csv) => {
            let first = bytes.split(|&b| b == b'\n').next().unwrap_or(&[]);
            let header: String = String::from_utf8_lossy(first).chars().filter(|c| !c.is_whitespace()).collect();
            Ok(if header == "x,y" { InputKind::Cloud } else { InputKind::Labels(LabelFormat::Csv) })
        }
        None => Err(PipelineError::UnknownFormat(path.display().to_string())),
    }
}

/// Steps 1-2: select `n_cells` cells and return their centroids.
pub fn cloud_from_matrix(m: &LabelMatrix, cfg: &PipelineConfig) -> Result<PointCloud, PipelineError> {
    let cells = spiral_select(m, cfg.n_cells, cfg.start.unwrap_or_else(|| m.center()))?;
    Ok(compute_centroids(m, &cells)?)
}

/// Steps 3-4a: alpha complex and its barcode.
pub fn barcode_of_cloud(pc: &PointCloud) -> Result<(FilteredComplex, Barcode), PipelineError> {
    if pc.len() < 3 {
        return Err(PipelineError::TooFewPoints(pc.len()));
    }
    let fc = alpha_complex(pc)?;
    let b = compute_persistence(&fc)?;
    Ok((fc, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub image: String,
    pub group: String,
    pub n_cells: usize,
    pub summary: EntropySummary,
    pub barcode: Barcode,
}

/// Runs the full per-sample pipeline on a point cloud.
pub fn entropy_of_cloud(pc: &PointCloud, cfg: &PipelineConfig) -> Result<(EntropySummary, Barcode), PipelineError> {
    let (fc, b) = barcode_of_cloud(pc)?;
    let summary = summarize_entropy(&b, cfg.infinite.policy(&fc), cfg.log_base)?;
    Ok((summary, b))
}

/// Parses one file's content and runs the pipeline on it.
pub fn process_bytes(
    path: &Path,
    bytes: &[u8],
    group: &str,
    cfg: &PipelineConfig,
) -> Result<SampleResult, PipelineError> {
    let pc = match detect_input(path, bytes)? {
        InputKind::Cloud => PointCloud::from_csv(&String::from_utf8_lossy(bytes))?,
        InputKind::Labels(fmt) => cloud_from_matrix(&load_label_matrix(bytes, fmt)?, cfg)?,
    };
    let (summary, barcode) = entropy_of_cloud(&pc, cfg)?;
    Ok(SampleResult {
        image: path.display().to_string(),
        group: group.to_string(),
        n_cells: pc.len(),
        summary,
        barcode,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyInput {
    pub path: PathBuf,
    pub group: String,
}

impl EntropyInput {
    /// Group defaults to the name of the parent directory.
    pub fn new(path: impl Into<PathBuf>, group: Option<&str>) -> Self {
        let path = path.into();
        let group = group.map(str::to_string).unwrap_or_else(|| {
            path.parent().and_then(Path::file_name).map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        });
        Self { path, group }
    }
}

/// Processes every input; result `i` belongs to input `i`.
pub fn run_entropy_batch(inputs: &[EntropyInput], cfg: &PipelineConfig) -> Vec<Result<SampleResult, PipelineError>> {
    par::map(inputs, |inp| {
        let bytes = std::fs::read(&inp.path)
            .map_err(|source| PipelineError::Io { path: inp.path.display().to_string(), source })?;
        process_bytes(&inp.path, &bytes, &inp.group, cfg)
    })
}

pub const ENTROPY_HEADER: &str = "image,group,n_cells,pe0,pe1,pe_all";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Entropy summary CSV, one row per successful sample.
pub fn entropy_csv<'a>(rows: impl IntoIterator<Item = &'a SampleResult>) -> String {
    let mut out = format!("{ENTROPY_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.image),
            csv_field(&r.group),
            r.n_cells,
            r.summary.pe0,
            r.summary.pe1,
            r.summary.pe_all
        );
    }
    out
}

#[derive(Serialize)]
struct EntropyJsonRow<'a> {
    image: &'a str,
    group: &'a str,
    n_cells: usize,
    #[serde(flatten)]
    summary: &'a EntropySummary,
}

#[derive(Serialize)]
struct EntropyJson<'a> {
    log_base: f64,
    infinite_policy: InfiniteMode,
    samples: Vec<EntropyJsonRow<'a>>,
}

/// JSON mirror of [`entropy_csv`] with interval counts, total lengths and
/// the policy used.
pub fn entropy_json<'a>(rows: impl IntoIterator<Item = &'a SampleResult>, cfg: &PipelineConfig) -> String {
    let doc = EntropyJson {
        log_base: cfg.log_base,
        infinite_policy: cfg.infinite,
        samples: rows
            .into_iter()
            .map(|r| EntropyJsonRow { image: &r.image, group: &r.group, n_cells: r.n_cells, summary: &r.summary })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub const VARIABLES: [&str; 3] = ["pe0", "pe1", "pe_all"];

/// Rows of an entropy table, with groups in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<(String, [f64; 3])>,
}

impl SummaryTable {
    /// Accepts any CSV with `group`, `pe0`, `pe1` and `pe_all` columns.
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| PipelineError::Table(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| PipelineError::Table(format!("missing column {name:?}")))
        };
        let g = col("group")?;
        let idx = [col(VARIABLES[0])?, col(VARIABLES[1])?, col(VARIABLES[2])?];
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| PipelineError::Table(e.to_string()))?;
            let mut vals = [0.0; 3];
            for (v, &i) in vals.iter_mut().zip(&idx) {
                let field = rec.get(i).unwrap_or("");
                *v = field
                    .parse()
                    .map_err(|_| PipelineError::Table(format!("row {}: bad number {field:?}", line + 2)))?;
            }
            rows.push((rec.get(g).unwrap_or("").to_string(), vals));
        }
        Ok(Self { rows })
    }

    pub fn group_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for (g, _) in &self.rows {
            if !names.contains(g) {
                names.push(g.clone());
            }
        }
        names
    }

    /// Observations of one variable (`0` = pe0, `1` = pe1, `2` = pe_all).
    pub fn sample(&self, variable: usize) -> Result<GroupSample, StatsError> {
        let groups = self
            .group_names()
            .into_iter()
            .map(|name| {
                let vals = self.rows.iter().filter(|(g, _)| *g == name).map(|(_, v)| v[variable]).collect();
                (name, vals)
            })
            .collect();
        GroupSample::new(groups)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerVariable<T> {
    pub pe0: T,
    pub pe1: T,
    pub pe_all: T,
}

impl<T> PerVariable<T> {
    pub fn get(&self, variable: &str) -> Option<&T> {
        match variable {
            "pe0" => Some(&self.pe0),
            "pe1" => Some(&self.pe1),
            "pe_all" => Some(&self.pe_all),
            _ => None,
        }
    }

    fn try_build<E>(mut f: impl FnMut(usize) -> Result<T, E>) -> Result<Self, E> {
        Ok(Self { pe0: f(0)?, pe1: f(1)?, pe_all: f(2)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupInfo {
    pub name: String,
    pub n: usize,
}

/// Output of the group comparison, serialized as the stats JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub kruskal_wallis: PerVariable<KruskalWallis>,
    pub dunn: PerVariable<Vec<PairwiseComparison>>,
    pub adjustment: Adjustment,
    pub alpha: f64,
    pub groups: Vec<GroupInfo>,
}

impl CompareReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Kruskal-Wallis and Dunn on each entropy variable.
pub fn compare(table: &SummaryTable, cfg: &PipelineConfig) -> Result<CompareReport, PipelineError> {
    let names = table.group_names();
    if names.len() < 2 {
        return Err(StatsError::TooFewGroups(names.len()).into());
    }
    let samples = PerVariable::try_build(|v| table.sample(v))?;
    let kruskal_wallis = PerVariable::try_build(|v| kruskal_wallis(sample_of(&samples, v)))?;
    let dunn = PerVariable::try_build(|v| dunn_test(sample_of(&samples, v), cfg.adjustment).map(|d| d.comparisons))?;
    let groups = names
        .into_iter()
        .map(|name| {
            let n = table.rows.iter().filter(|(g, _)| *g == name).count();
            GroupInfo { name, n }
        })
        .collect();
    Ok(CompareReport { kruskal_wallis, dunn, adjustment: cfg.adjustment, alpha: cfg.alpha_threshold, groups })
}

fn sample_of(s: &PerVariable<GroupSample>, v: usize) -> &GroupSample {
    [&s.pe0, &s.pe1, &s.pe_all][v]
}

/// Scatter data: `group,pe0,pe1,pe_all` per row, in input order.
pub fn scatter_csv(table: &SummaryTable) -> String {
    let mut out = String::from("group,pe0,pe1,pe_all\n");
    for (g, v) in &table.rows {
        let _ = writeln!(out, "{},{},{},{}", csv_field(g), v[0], v[1], v[2]);
    }
    out
}

/// Boxplot data: five-number summary per group and variable.
pub fn boxstats_csv(table: &SummaryTable) -> String {
    let mut out = String::from("group,variable,min,q1,median,q3,max\n");
    for g in table.group_names() {
        for (vi, var) in VARIABLES.iter().enumerate() {
            let vals: Vec<f64> = table.rows.iter().filter(|(n, _)| *n == g).map(|(_, v)| v[vi]).collect();
            if let Some([a, b, c, d, e]) = five_number(&vals) {
                let _ = writeln!(out, "{},{var},{a},{b},{c},{d},{e}", csv_field(&g));
            }
        }
    }
    out
}
