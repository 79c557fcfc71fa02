//! Labeled segmentation rasters: parsing, spiral cell selection and
//! centroid extraction.
//!
//! A label matrix stores one non-negative integer per pixel; `0` marks cell
//! boundaries and every positive value identifies one cell.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::geometry::{Point, PointCloud};

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("n must be at least 1")]
    ZeroCells,
    #[error("start pixel ({row}, {col}) lies outside a {rows}x{cols} matrix")]
    StartOutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
    #[error("insufficient cells: found {found} of {requested}")]
    InsufficientCells { found: usize, requested: usize },
    #[error("cell id {0} does not occur in the matrix")]
    MissingCell(u32),
}

fn parse_err(offset: usize, msg: impl Into<String>) -> IngestError {
    IngestError::Parse { offset, msg: msg.into() }
}

/// On-disk encodings accepted by [`load_label_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelFormat {
    /// Netpbm graymap, ASCII (`P2`) or binary (`P5`), maxval up to 65535.
    Pgm,
    /// Comma-separated integers, one raster row per line.
    Csv,
}

impl LabelFormat {
    /// Guesses the format from a file extension (`pgm` or `csv`).
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "pgm" => Some(Self::Pgm),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    rows: usize,
    cols: usize,
    labels: Vec<u32>,
}

impl LabelMatrix {
    /// Builds a matrix from row-major labels. Panics if the length is not
    /// `rows * cols` or either dimension is zero.
    pub fn new(rows: usize, cols: usize, labels: Vec<u32>) -> Self {
        assert!(rows >= 1 && cols >= 1, "label matrix must be non-empty");
        assert_eq!(labels.len(), rows * cols, "label count does not match dimensions");
        Self { rows, cols, labels }
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.cols + col]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Distinct nonzero labels, ascending.
    pub fn distinct_labels(&self) -> Vec<u32> {
        let mut v: Vec<u32> =
            self.labels.iter().copied().filter(|&l| l != 0).collect::<HashSet<_>>().into_iter().collect();
        v.sort_unstable();
        v
    }

    /// Default spiral origin: the centre pixel under integer division.
    pub fn center(&self) -> (usize, usize) {
        (self.rows / 2, self.cols / 2)
    }

    /// Encodes as binary PGM (`P5`, 16-bit big-endian when any label > 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let maxval = self.labels.iter().copied().max().unwrap_or(0).clamp(1, 65535);
        let mut out = format!("P5\n{} {}\n{}\n", self.cols, self.rows, maxval).into_bytes();
        for &l in &self.labels {
            let l = l.min(65535);
            if maxval > 255 {
                out.extend_from_slice(&(l as u16).to_be_bytes());
            } else {
                out.push(l as u8);
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.labels.len() * 4);
        for r in 0..self.rows {
            let row = &self.labels[r * self.cols..(r + 1) * self.cols];
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parses a label matrix from raw file content.
pub fn load_label_matrix(bytes: &[u8], format: LabelFormat) -> Result<LabelMatrix, IngestError> {
    match format {
        LabelFormat::Pgm => parse_pgm(bytes),
        LabelFormat::Csv => parse_csv(bytes),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments.
    fn skip_ws(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn uint(&mut self, what: &str) -> Result<u64, IngestError> {
        self.skip_ws();
        let start = self.pos;
        let mut v: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(b - b'0')))
                .ok_or_else(|| parse_err(start, format!("{what} overflows")))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(parse_err(start, format!("expected {what}")));
        }
        match self.bytes.get(self.pos) {
            None => Ok(v),
            Some(b) if b.is_ascii_whitespace() || *b == b'#' => Ok(v),
            Some(_) => Err(parse_err(self.pos, format!("unexpected byte in {what}"))),
        }
    }
}

fn parse_pgm(bytes: &[u8]) -> Result<LabelMatrix, IngestError> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(parse_err(0, "expected magic P2 or P5")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.uint("width")? as usize;
    let height = cur.uint("height")? as usize;
    let maxval_at = cur.pos;
    let maxval = cur.uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(parse_err(maxval_at, "zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(parse_err(maxval_at, format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width.checked_mul(height).ok_or_else(|| parse_err(maxval_at, "dimensions overflow"))?;
    let mut labels = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(parse_err(cur.pos, "missing whitespace after maxval")),
        }
        let wide = maxval > 255;
        let sample = if wide { 2 } else { 1 };
        let body = &bytes[cur.pos..];
        if body.len() < count * sample {
            return Err(parse_err(
                bytes.len(),
                format!("raster truncated: need {} bytes, have {}", count * sample, body.len()),
            ));
        }
        for i in 0..count {
            let offset = cur.pos + i * sample;
            let v =
                if wide { u32::from(u16::from_be_bytes([body[2 * i], body[2 * i + 1]])) } else { u32::from(body[i]) };
            if u64::from(v) > maxval {
                return Err(parse_err(offset, format!("value {v} exceeds maxval {maxval}")));
            }
            labels.push(v);
        }
    } else {
        for _ in 0..count {
            cur.skip_ws();
            let at = cur.pos;
            if at >= bytes.len() {
                return Err(parse_err(at, format!("raster truncated: expected {count} values")));
            }
            let v = cur.uint("sample")?;
            if v > maxval {
                return Err(parse_err(at, format!("value {v} exceeds maxval {maxval}")));
            }
            labels.push(v as u32);
        }
        cur.skip_ws();
        if cur.pos < bytes.len() {
            return Err(parse_err(cur.pos, "trailing data after raster"));
        }
    }
    Ok(LabelMatrix::new(height, width, labels))
}

fn parse_csv(bytes: &[u8]) -> Result<LabelMatrix, IngestError> {
    let mut labels = Vec::new();
    let mut rows = 0usize;
    let mut cols: Option<usize> = None;
    let mut line_start = 0usize;
    for line in bytes.split(|&b| b == b'\n') {
        let offset = line_start;
        line_start += line.len() + 1;
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let mut n = 0usize;
        let mut field_start = offset;
        for field in line.split(|&b| b == b',') {
            let at = field_start;
            field_start += field.len() + 1;
            let text = std::str::from_utf8(field).map_err(|_| parse_err(at, "non-UTF-8 field"))?.trim();
            if text.starts_with('-') {
                return Err(parse_err(at, format!("negative label {text}")));
            }
            let v: u32 = text.parse().map_err(|e: std::num::ParseIntError| {
                let msg = match e.kind() {
                    std::num::IntErrorKind::PosOverflow => format!("label {text} overflows"),
                    _ => format!("invalid label {text:?}"),
                };
                parse_err(at, msg)
            })?;
            labels.push(v);
            n += 1;
        }
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                return Err(parse_err(offset, format!("row {} has {n} columns, expected {c}", rows + 1)))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err(0, "empty matrix"))?;
    Ok(LabelMatrix::new(rows, cols, labels))
}

/// Cell ids in order of discovery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    ids: Vec<u32>,
}

impl CellSet {
    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Collects the first `n` distinct nonzero labels met along a square spiral
/// that starts at `start = (row, col)`.
///
/// The walk alternates a run along columns (direction `(-1)^(i+1)`) and a run
/// along rows (direction `(-1)^i`), both of length `i`, for `i = 1, 2, ...`.
/// Positions outside the matrix are skipped and the walk continues.
pub fn spiral_select(m: &LabelMatrix, n: usize, start: (usize, usize)) -> Result<CellSet, IngestError> {
    if n == 0 {
        return Err(IngestError::ZeroCells);
    }
    let (row0, col0) = start;
    if row0 >= m.rows || col0 >= m.cols {
        return Err(IngestError::StartOutOfBounds { row: row0, col: col0, rows: m.rows, cols: m.cols });
    }
    let total = m.rows * m.cols;
    let diag = ((m.rows as f64).hypot(m.cols as f64)).ceil() as i64;
    let max_run = 2 * diag;

    let mut ids = Vec::with_capacity(n);
    let mut seen = HashSet::with_capacity(n);
    let mut visited = 0usize;
    let mut visit = |r: i64, c: i64, ids: &mut Vec<u32>, visited: &mut usize| {
        if r < 0 || c < 0 || r >= m.rows as i64 || c >= m.cols as i64 {
            return;
        }
        *visited += 1;
        let label = m.get(r as usize, c as usize);
        if label != 0 && seen.insert(label) {
            ids.push(label);
        }
    };

    let (mut r, mut c) = (row0 as i64, col0 as i64);
    visit(r, c, &mut ids, &mut visited);
    let mut i: i64 = 0;
    while ids.len() < n {
        i += 1;
        // every pixel has been seen, or the window exceeded twice the diagonal
        if visited >= total || i > max_run {
            break;
        }
        let col_step = if i % 2 == 1 { 1 } else { -1 };
        for _ in 0..i {
            if ids.len() >= n {
                break;
            }
            c += col_step;
            visit(r, c, &mut ids, &mut visited);
        }
        for _ in 0..i {
            if ids.len() >= n {
                break;
            }
            r -= col_step;
            visit(r, c, &mut ids, &mut visited);
        }
    }
    if ids.len() < n {
        return Err(IngestError::InsufficientCells { found: ids.len(), requested: n });
    }
    Ok(CellSet { ids })
}

/// Centroid of each selected cell: mean `(col, row)` over all its pixels.
///
/// Output order follows `cells`; the returned cloud carries the ids.
pub fn compute_centroids(m: &LabelMatrix, cells: &CellSet) -> Result<PointCloud, IngestError> {
    let slot: HashMap<u32, usize> = cells.ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut acc = vec![(0.0f64, 0.0f64, 0u64); cells.ids.len()];
    for (k, &label) in m.labels.iter().enumerate() {
        if let Some(&s) = slot.get(&label) {
            let a = &mut acc[s];
            a.0 += (k % m.cols) as f64;
            a.1 += (k / m.cols) as f64;
            a.2 += 1;
        }
    }
    let mut points = Vec::with_capacity(acc.len());
    for (&id, &(sx, sy, count)) in cells.ids.iter().zip(&acc) {
        if count == 0 {
            return Err(IngestError::MissingCell(id));
        }
        points.push(Point::new(sx / count as f64, sy / count as f64));
    }
    Ok(PointCloud::with_ids(points, cells.ids.clone()).expect("cell ids are distinct and centroids finite"))
}

impl CellSet {
    /// Wraps ids that are already known to be distinct and nonzero.
    pub fn from_ids(ids: Vec<u32>) -> Option<Self> {
        let mut seen = HashSet::new();
        if ids.iter().all(|&id| id != 0 && seen.insert(id)) {
            Some(Self { ids })
        } else {
            None
        }
    }
}
