//! Alpha filtration on a Delaunay triangulation.
//!
//! Values follow the squared-radius convention: a vertex enters at 0, a
//! triangle at its squared circumradius, and an edge at its squared
//! half-length when its diametral disk holds none of the opposite vertices
//! (Gabriel edge). A non-Gabriel edge enters with its cheapest incident
//! triangle. The Voronoi diagram is never built; these rules give the same
//! entry radii as intersecting the Voronoi-restricted balls.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use crate::delaunay::{delaunay_triangulate, GeometryError, Triangulation};
use crate::geometry::{Point, PointCloud};
use crate::predicates::diametral;

/// A vertex, edge or triangle given by ascending point indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    // field order gives the derived Ord: dimension first, then vertices
    len: u8,
    verts: [usize; 3],
}

impl Simplex {
    pub fn vertex(a: usize) -> Self {
        Self { len: 1, verts: [a, 0, 0] }
    }

    pub fn edge(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "edge endpoints must differ");
        Self { len: 2, verts: [a.min(b), a.max(b), 0] }
    }

    pub fn triangle(a: usize, b: usize, c: usize) -> Self {
        let mut v = [a, b, c];
        v.sort_unstable();
        assert!(v[0] != v[1] && v[1] != v[2], "triangle vertices must differ");
        Self { len: 3, verts: v }
    }

    /// Builds a simplex from 1 to 3 distinct indices in any order.
    pub fn from_vertices(v: &[usize]) -> Option<Self> {
        match *v {
            [a] => Some(Self::vertex(a)),
            [a, b] if a != b => Some(Self::edge(a, b)),
            [a, b, c] if a != b && b != c && a != c => Some(Self::triangle(a, b, c)),
            _ => None,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.verts[..self.len as usize]
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    /// Codimension-one faces, empty for a vertex.
    pub fn facets(&self) -> Vec<Simplex> {
        let [a, b, c] = self.verts;
        match self.len {
            2 => vec![Self::vertex(a), Self::vertex(b)],
            3 => vec![Self::edge(b, c), Self::edge(a, c), Self::edge(a, b)],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredSimplex {
    pub simplex: Simplex,
    pub value: f64,
}

impl FilteredSimplex {
    /// Filtration order: value, then dimension, then vertex list.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then_with(|| self.simplex.cmp(&other.simplex))
    }
}

/// Simplices of dimension at most 2, each with its entry value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilteredComplex {
    points: Vec<Point>,
    simplices: Vec<FilteredSimplex>,
}

impl FilteredComplex {
    /// Wraps simplices as given; [`crate::persistence`] validates closure
    /// and monotonicity before reducing.
    pub fn new(points: Vec<Point>, simplices: Vec<FilteredSimplex>) -> Self {
        Self { points, simplices }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn simplices(&self) -> &[FilteredSimplex] {
        &self.simplices
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.simplex.dim() == dim).count()
    }

    pub fn max_value(&self) -> f64 {
        self.simplices.iter().map(|s| s.value).fold(0.0, f64::max)
    }

    /// Same complex with every value replaced by `f(simplex, value)`.
    pub fn map_values(&self, mut f: impl FnMut(&Simplex, f64) -> f64) -> Self {
        Self {
            points: self.points.clone(),
            simplices: self
                .simplices
                .iter()
                .map(|s| FilteredSimplex { simplex: s.simplex, value: f(&s.simplex, s.value) })
                .collect(),
        }
    }

    /// Debug dump: `v i val`, `e i j val`, `t i j k val`, one per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let tag = ["v", "e", "t"][s.simplex.dim()];
            let verts: Vec<String> = s.simplex.vertices().iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{tag} {} {}", verts.join(" "), s.value);
        }
        out
    }
}

/// Squared circumradius of triangle `abc`, computed relative to `a`.
pub fn circumradius2(a: Point, b: Point, c: Point) -> f64 {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    ux * ux + uy * uy
}

/// Assigns alpha values to every simplex of `tri`.
pub fn alpha_filtration(tri: &Triangulation) -> FilteredComplex {
    let pts = tri.points();
    let tri_values: Vec<f64> = tri.triangles().iter().map(|&[a, b, c]| circumradius2(pts[a], pts[b], pts[c])).collect();

    // edge -> (triangle value, opposite vertex) for each incident triangle
    let mut cofaces: HashMap<[usize; 2], Vec<(f64, usize)>> = HashMap::with_capacity(tri.edges().len());
    for (&[a, b, c], &v) in tri.triangles().iter().zip(&tri_values) {
        cofaces.entry([a, b]).or_default().push((v, c));
        cofaces.entry([a, c]).or_default().push((v, b));
        cofaces.entry([b, c]).or_default().push((v, a));
    }

    let mut simplices = Vec::with_capacity(pts.len() + tri.edges().len() + tri.triangles().len());
    simplices.extend((0..pts.len()).map(|i| FilteredSimplex { simplex: Simplex::vertex(i), value: 0.0 }));
    for &[a, b] in tri.edges() {
        let inc = cofaces.get(&[a, b]).map(Vec::as_slice).unwrap_or(&[]);
        let cheapest = inc.iter().map(|&(v, _)| v).fold(f64::INFINITY, f64::min);
        let gabriel = inc.iter().all(|&(_, p)| diametral(pts[a], pts[b], pts[p]) != Ordering::Less);
        let value = if gabriel {
            // rounding can push a right-angle Gabriel edge a hair past its triangle
            (pts[a].dist2(pts[b]) / 4.0).min(cheapest)
        } else {
            cheapest
        };
        simplices.push(FilteredSimplex { simplex: Simplex::edge(a, b), value });
    }
    for (&[a, b, c], &value) in tri.triangles().iter().zip(&tri_values) {
        simplices.push(FilteredSimplex { simplex: Simplex::triangle(a, b, c), value });
    }
    FilteredComplex::new(pts.to_vec(), simplices)
}

/// Delaunay triangulation followed by [`alpha_filtration`].
pub fn alpha_complex(pc: &PointCloud) -> Result<FilteredComplex, GeometryError> {
    Ok(alpha_filtration(&delaunay_triangulate(pc)?))
}
