//! Point and point-cloud types, plus the `x,y` point-cloud CSV format.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CloudError {
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("source_ids has {ids} entries for {points} points")]
    LengthMismatch { points: usize, ids: usize },
    #[error("duplicate source id {0}")]
    DuplicateId(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Ordered 2D points, optionally tagged with the cell id each came from.
///
/// Coordinates are in pixel units with `x` = column and `y` = row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point>,
    source_ids: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self, CloudError> {
        if let Some(index) = points.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(CloudError::NonFinite { index });
        }
        Ok(Self { points, source_ids: None })
    }

    pub fn with_ids(points: Vec<Point>, ids: Vec<u32>) -> Result<Self, CloudError> {
        if ids.len() != points.len() {
            return Err(CloudError::LengthMismatch { points: points.len(), ids: ids.len() });
        }
        let mut seen = std::collections::HashSet::with_capacity(ids.len());
        for &id in &ids {
            if !seen.insert(id) {
                return Err(CloudError::DuplicateId(id));
            }
        }
        let mut pc = Self::new(points)?;
        pc.source_ids = Some(ids);
        Ok(pc)
    }

    pub fn from_xy(xy: &[(f64, f64)]) -> Result<Self, CloudError> {
        Self::new(xy.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn source_ids(&self) -> Option<&[u32]> {
        self.source_ids.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Serializes as CSV with header `x,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.x, p.y);
        }
        out
    }

    /// Parses the `x,y` CSV format. Blank lines are ignored.
    pub fn from_csv(text: &str) -> Result<Self, CloudError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim().replace(' ', "") == "x,y" => {}
            _ => return Err(CloudError::Parse { line: 1, msg: "expected header \"x,y\"".into() }),
        }
        let mut points = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| CloudError::Parse { line: i + 1, msg: msg.to_string() };
            let (xs, ys) = line.split_once(',').ok_or_else(|| err("expected two fields"))?;
            let x: f64 = xs.trim().parse().map_err(|_| err("bad x"))?;
            let y: f64 = ys.trim().parse().map_err(|_| err("bad y"))?;
            points.push(Point::new(x, y));
        }
        Self::new(points)
    }
}
