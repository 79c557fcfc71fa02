//! Planar Delaunay triangulation by lexicographic sweep plus edge flips.
//!
//! Points are inserted in `(x, y)` order, so each new point lies outside the
//! current convex hull and is joined to the hull edges it can see. Every
//! touched edge is then legalized with Lawson flips. All decisions go
//! through the exact predicates in [`crate::predicates`].
//!
//! Cocircular quadrilaterals have two valid diagonals; the one whose smaller
//! endpoint index is smaller wins. Each such flip strictly lowers the sum of
//! per-edge minimum indices while leaving the lifted volume unchanged, so
//! flipping still terminates.

use std::cmp::Ordering;
use std::collections::HashMap;

use thiserror::Error;

use crate::alpha::Simplex;
use crate::geometry::{Point, PointCloud};
use crate::predicates::{incircle, orient2d};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("duplicate points at indices {0} and {1}")]
    Duplicate(usize, usize),
}

/// A Delaunay triangulation in canonical form: triangle and edge vertex
/// lists ascending, both lists sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    points: Vec<Point>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// All vertices, edges and triangles, sorted by dimension then vertices.
    pub fn simplices(&self) -> Vec<Simplex> {
        let mut out: Vec<Simplex> = (0..self.points.len()).map(Simplex::vertex).collect();
        out.extend(self.edges.iter().map(|&[a, b]| Simplex::edge(a, b)));
        out.extend(self.triangles.iter().map(|&[a, b, c]| Simplex::triangle(a, b, c)));
        out
    }

    /// `|V| - |E| + |T|`.
    pub fn euler_characteristic(&self) -> i64 {
        self.points.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }
}

struct Mesh<'a> {
    pts: &'a [Point],
    tris: Vec<[usize; 3]>,
    // directed edge (a, b) -> triangle holding it in counter-clockwise order
    edge_tri: HashMap<(usize, usize), usize>,
}

impl<'a> Mesh<'a> {
    fn add(&mut self, t: [usize; 3]) -> usize {
        let id = self.tris.len();
        self.tris.push(t);
        self.link(id);
        id
    }

    fn link(&mut self, id: usize) {
        let [a, b, c] = self.tris[id];
        for e in [(a, b), (b, c), (c, a)] {
            self.edge_tri.insert(e, id);
        }
    }

    fn unlink(&mut self, id: usize) {
        let [a, b, c] = self.tris[id];
        for e in [(a, b), (b, c), (c, a)] {
            self.edge_tri.remove(&e);
        }
    }

    /// Vertex of triangle `id` opposite the directed edge `(a, b)`.
    fn apex(&self, id: usize, a: usize, b: usize) -> usize {
        let t = self.tris[id];
        *t.iter().find(|&&v| v != a && v != b).expect("triangle has three vertices")
    }

    fn legalize(&mut self, mut stack: Vec<(usize, usize)>) {
        while let Some((a, b)) = stack.pop() {
            let (Some(&t1), Some(&t2)) = (self.edge_tri.get(&(a, b)), self.edge_tri.get(&(b, a))) else {
                continue;
            };
            let p = self.apex(t1, a, b);
            let d = self.apex(t2, b, a);
            let flip = match incircle(self.pts[a], self.pts[b], self.pts[p], self.pts[d]) {
                Ordering::Greater => true,
                Ordering::Equal => p.min(d) < a.min(b),
                Ordering::Less => false,
            };
            if !flip {
                continue;
            }
            self.unlink(t1);
            self.unlink(t2);
            self.tris[t1] = [a, d, p];
            self.tris[t2] = [d, b, p];
            self.link(t1);
            self.link(t2);
            stack.extend([(a, d), (d, b), (b, p), (p, a)]);
        }
    }
}

/// Triangulates `pc`. Needs at least three points, not all collinear, with
/// no exact duplicates.
pub fn delaunay_triangulate(pc: &PointCloud) -> Result<Triangulation, GeometryError> {
    let pts = pc.points();
    if pts.len() < 3 {
        return Err(GeometryError::Degenerate("fewer than 3 points"));
    }
    let mut order: Vec<usize> = (0..pts.len()).collect();
    let lex = |&i: &usize, &j: &usize| pts[i].x.total_cmp(&pts[j].x).then(pts[i].y.total_cmp(&pts[j].y));
    order.sort_by(|i, j| lex(i, j).then(i.cmp(j)));
    for w in order.windows(2) {
        if pts[w[0]] == pts[w[1]] {
            return Err(GeometryError::Duplicate(w[0].min(w[1]), w[0].max(w[1])));
        }
    }

    let k = (2..order.len())
        .find(|&k| orient2d(pts[order[0]], pts[order[1]], pts[order[k]]) != Ordering::Equal)
        .ok_or(GeometryError::Degenerate("all points collinear"))?;

    let mut mesh = Mesh { pts, tris: Vec::with_capacity(2 * pts.len()), edge_tri: HashMap::new() };
    let apex = order[k];
    let left = orient2d(pts[order[0]], pts[order[1]], pts[apex]) == Ordering::Greater;
    let mut stack = Vec::new();
    for w in order[..k].windows(2) {
        let t = if left { [w[0], w[1], apex] } else { [w[1], w[0], apex] };
        mesh.add(t);
        stack.extend([(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]);
    }
    let mut hull: Vec<usize> = if left { order[..k].to_vec() } else { order[..k].iter().rev().copied().collect() };
    hull.push(apex);
    mesh.legalize(std::mem::take(&mut stack));

    for &p in &order[k + 1..] {
        let m = hull.len();
        let visible: Vec<bool> =
            (0..m).map(|i| orient2d(pts[hull[i]], pts[hull[(i + 1) % m]], pts[p]) == Ordering::Less).collect();
        let start = (0..m)
            .find(|&i| visible[i] && !visible[(i + m - 1) % m])
            .expect("a point outside the hull sees at least one hull edge");
        let run = (0..m).take_while(|&j| visible[(start + j) % m]).count();
        for j in 0..run {
            let a = hull[(start + j) % m];
            let b = hull[(start + j + 1) % m];
            let t = [b, a, p];
            mesh.add(t);
            stack.extend([(b, a), (a, p), (p, b)]);
        }
        hull.rotate_left(start);
        hull.splice(1..run, [p]);
        mesh.legalize(std::mem::take(&mut stack));
    }

    let mut triangles: Vec<[usize; 3]> = mesh
        .tris
        .iter()
        .map(|t| {
            let mut s = *t;
            s.sort_unstable();
            s
        })
        .collect();
    triangles.sort_unstable();
    let mut edges: Vec<[usize; 2]> = mesh.edge_tri.keys().map(|&(a, b)| [a.min(b), a.max(b)]).collect();
    edges.sort_unstable();
    edges.dedup();
    Ok(Triangulation { points: pts.to_vec(), edges, triangles })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(xy: &[(f64, f64)]) -> PointCloud {
        PointCloud::from_xy(xy).unwrap()
    }

    #[test]
    fn three_points() {
        let t = delaunay_triangulate(&cloud(&[(0.0, 0.0), (1.0, 0.0), (0.3, 2.0)])).unwrap();
        assert_eq!(t.triangles(), &[[0, 1, 2]]);
        assert_eq!(t.edges(), &[[0, 1], [0, 2], [1, 2]]);
        assert_eq!(t.simplices().len(), 7);
    }

    #[test]
    fn square_tie_break_prefers_lowest_index_diagonal() {
        let t = delaunay_triangulate(&cloud(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)])).unwrap();
        assert_eq!(t.edges().len(), 5);
        assert_eq!(t.triangles().len(), 2);
        assert!(t.edges().contains(&[0, 3]));
        assert_eq!(t.triangles(), &[[0, 1, 3], [0, 2, 3]]);
        // relabel so the other diagonal holds the smaller index
        let t = delaunay_triangulate(&cloud(&[(1.0, 0.0), (0.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        assert!(t.edges().contains(&[0, 3]));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(
            delaunay_triangulate(&cloud(&[(0.0, 0.0), (1.0, 1.0)])),
            Err(GeometryError::Degenerate("fewer than 3 points"))
        );
        assert_eq!(
            delaunay_triangulate(&cloud(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (5.0, 5.0)])),
            Err(GeometryError::Degenerate("all points collinear"))
        );
        assert_eq!(
            delaunay_triangulate(&cloud(&[(0.0, 0.0), (1.0, 0.0), (3.0, 3.0), (1.0, 0.0)])),
            Err(GeometryError::Duplicate(1, 3))
        );
    }

    #[test]
    fn collinear_prefix_then_apex() {
        let t = delaunay_triangulate(&cloud(&[(0.0, 0.0), (0.0, 1.0), (0.0, 2.0), (0.0, 3.0), (1.0, 1.5)])).unwrap();
        assert_eq!(t.triangles().len(), 3);
        assert_eq!(t.euler_characteristic(), 1);
    }

    #[test]
    fn regular_polygon_is_deterministic() {
        // eight cocircular points: any triangulation is Delaunay
        let xy: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let a = i as f64 * std::f64::consts::FRAC_PI_4;
                (a.cos(), a.sin())
            })
            .collect();
        let t1 = delaunay_triangulate(&cloud(&xy)).unwrap();
        let t2 = delaunay_triangulate(&cloud(&xy)).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.triangles().len(), 6);
        assert_eq!(t1.euler_characteristic(), 1);
    }

    #[test]
    fn integer_grid() {
        let xy: Vec<(f64, f64)> = (0..36).map(|i| ((i % 6) as f64, (i / 6) as f64)).collect();
        let t = delaunay_triangulate(&cloud(&xy)).unwrap();
        assert_eq!(t.triangles().len(), 50);
        assert_eq!(t.euler_characteristic(), 1);
    }
}
