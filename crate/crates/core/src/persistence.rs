//! Persistence barcodes in dimensions 0 and 1 over Z/2.
//!
//! [`compute_persistence`] runs the standard column reduction of the
//! boundary matrix. [`dim0_union_find`] recomputes the dimension-0 part with
//! a union-find under the elder rule and serves as an independent check.
//! Both order simplices by `(value, dim, vertices)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::alpha::{FilteredComplex, FilteredSimplex, Simplex};

#[derive(Debug, Error, PartialEq)]
pub enum PersistenceError {
    #[error("simplex {simplex:?} is listed twice")]
    Duplicate { simplex: Vec<usize> },
    #[error("simplex {simplex:?} has non-finite value")]
    NonFinite { simplex: Vec<usize> },
    #[error("face {face:?} of {coface:?} is missing")]
    MissingFace { face: Vec<usize>, coface: Vec<usize> },
    #[error("face {face:?} (value {face_value}) enters after coface {coface:?} (value {coface_value})")]
    NonMonotone { face: Vec<usize>, face_value: f64, coface: Vec<usize>, coface_value: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for classes that never die.
    pub death: f64,
}

impl Interval {
    pub fn new(dim: usize, birth: f64, death: f64) -> Self {
        Self { dim, birth, death }
    }

    pub fn length(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }
}

/// Multiset of persistence intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    intervals: Vec<Interval>,
}

impl Barcode {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self { intervals }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Interval> + '_ {
        self.intervals.iter().filter(move |i| i.dim == dim)
    }

    /// Restriction to one dimension.
    pub fn dim(&self, dim: usize) -> Barcode {
        Barcode::new(self.in_dim(dim).copied().collect())
    }

    /// Intervals sorted by `(dim, birth, death)`; equal multisets give equal
    /// canonical forms.
    pub fn canonical(&self) -> Barcode {
        let mut v = self.intervals.clone();
        v.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death)));
        Barcode::new(v)
    }

    pub fn same_multiset(&self, other: &Barcode) -> bool {
        self.canonical() == other.canonical()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth_simplex: Simplex,
    pub death_simplex: Option<Simplex>,
    pub birth: f64,
    pub death: f64,
}

fn vlist(s: &Simplex) -> Vec<usize> {
    s.vertices().to_vec()
}

/// Sorts the complex into filtration order after checking that it is closed
/// under faces and monotone.
fn ordered(fc: &FilteredComplex) -> Result<Vec<FilteredSimplex>, PersistenceError> {
    let mut value: HashMap<Simplex, f64> = HashMap::with_capacity(fc.simplices().len());
    for s in fc.simplices() {
        if !s.value.is_finite() {
            return Err(PersistenceError::NonFinite { simplex: vlist(&s.simplex) });
        }
        if value.insert(s.simplex, s.value).is_some() {
            return Err(PersistenceError::Duplicate { simplex: vlist(&s.simplex) });
        }
    }
    for s in fc.simplices() {
        for f in s.simplex.facets() {
            match value.get(&f) {
                None => return Err(PersistenceError::MissingFace { face: vlist(&f), coface: vlist(&s.simplex) }),
                Some(&fv) if fv > s.value => {
                    return Err(PersistenceError::NonMonotone {
                        face: vlist(&f),
                        face_value: fv,
                        coface: vlist(&s.simplex),
                        coface_value: s.value,
                    })
                }
                _ => {}
            }
        }
    }
    let mut order = fc.simplices().to_vec();
    order.sort_by(FilteredSimplex::filtration_cmp);
    Ok(order)
}

/// XOR of two ascending index lists.
fn add_mod2(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Every birth/death pairing, zero-length ones included.
pub fn persistence_pairs(fc: &FilteredComplex) -> Result<Vec<PersistencePair>, PersistenceError> {
    let order = ordered(fc)?;
    let index: HashMap<Simplex, usize> = order.iter().enumerate().map(|(i, s)| (s.simplex, i)).collect();

    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(order.len());
    let mut pivot_col: Vec<Option<usize>> = vec![None; order.len()];
    for (j, s) in order.iter().enumerate() {
        let mut col: Vec<usize> = s.simplex.facets().iter().map(|f| index[f]).collect();
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match pivot_col[low] {
                Some(k) => col = add_mod2(&col, &columns[k]),
                None => {
                    pivot_col[low] = Some(j);
                    break;
                }
            }
        }
        columns.push(col);
    }

    let mut pairs = Vec::new();
    for (i, s) in order.iter().enumerate() {
        if !columns[i].is_empty() {
            continue; // negative simplex: it kills a class
        }
        let (death_simplex, death) = match pivot_col[i] {
            Some(j) => (Some(order[j].simplex), order[j].value),
            None => (None, f64::INFINITY),
        };
        pairs.push(PersistencePair {
            dim: s.simplex.dim(),
            birth_simplex: s.simplex,
            death_simplex,
            birth: s.value,
            death,
        });
    }
    Ok(pairs)
}

/// Barcode in dimensions 0 and 1 with zero-length intervals removed.
pub fn compute_persistence(fc: &FilteredComplex) -> Result<Barcode, PersistenceError> {
    let pairs = persistence_pairs(fc)?;
    Ok(Barcode::new(
        pairs
            .iter()
            .filter(|p| p.dim <= 1 && p.death > p.birth)
            .map(|p| Interval::new(p.dim, p.birth, p.death))
            .collect(),
    ))
}

/// Dimension-0 barcode via union-find with the elder rule.
pub fn dim0_union_find(fc: &FilteredComplex) -> Result<Barcode, PersistenceError> {
    let order = ordered(fc)?;
    // component root -> position of its oldest vertex in `order`
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut oldest: HashMap<usize, usize> = HashMap::new();
    fn find(parent: &mut HashMap<usize, usize>, v: usize) -> usize {
        let mut root = v;
        while parent[&root] != root {
            root = parent[&root];
        }
        let mut cur = v;
        while parent[&cur] != root {
            let next = parent[&cur];
            parent.insert(cur, root);
            cur = next;
        }
        root
    }

    let mut bars = Vec::new();
    for (pos, s) in order.iter().enumerate() {
        match *s.simplex.vertices() {
            [v] => {
                parent.insert(v, v);
                oldest.insert(v, pos);
            }
            [a, b] => {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    continue;
                }
                let (elder, younger) = if oldest[&ra] < oldest[&rb] { (ra, rb) } else { (rb, ra) };
                let birth = order[oldest[&younger]].value;
                if s.value > birth {
                    bars.push(Interval::new(0, birth, s.value));
                }
                parent.insert(younger, elder);
            }
            _ => {}
        }
    }
    let mut roots: Vec<usize> = parent.keys().copied().filter(|&v| parent[&v] == v).collect();
    roots.sort_by_key(|r| oldest[r]);
    bars.extend(roots.iter().map(|r| Interval::new(0, order[oldest[r]].value, f64::INFINITY)));
    Ok(Barcode::new(bars))
}

/// Serializes as CSV `dim,birth,death`; infinite deaths are written `inf`.
/// Values use the shortest representation that reads back exactly.
pub fn write_barcode(b: &Barcode) -> String {
    let mut out = String::from("dim,birth,death\n");
    for i in b.intervals() {
        let death = if i.death.is_infinite() { "inf".to_string() } else { i.death.to_string() };
        let _ = writeln!(out, "{},{},{}", i.dim, i.birth, death);
    }
    out
}

pub fn read_barcode(text: &str) -> Result<Barcode, PersistenceError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "dim,birth,death" => {}
        _ => return Err(PersistenceError::Parse { line: 1, msg: "expected header dim,birth,death".into() }),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| PersistenceError::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [d, b, x] = fields[..] else {
            return Err(err(format!("expected 3 fields, got {}", fields.len())));
        };
        let dim: usize = d.parse().map_err(|_| err(format!("bad dim {d:?}")))?;
        let birth: f64 = b.parse().map_err(|_| err(format!("bad birth {b:?}")))?;
        let death: f64 = if x.eq_ignore_ascii_case("inf") {
            f64::INFINITY
        } else {
            x.parse().map_err(|_| err(format!("bad death {x:?}")))?
        };
        if !birth.is_finite() || death.is_nan() || death < birth {
            return Err(err(format!("invalid interval ({birth}, {death})")));
        }
        out.push(Interval::new(dim, birth, death));
    }
    Ok(Barcode::new(out))
}
