//! Geometry and persistence checked against independent brute-force oracles.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pentropy::alpha::alpha_complex;
use pentropy::ingest::{compute_centroids, spiral_select, LabelMatrix};
use pentropy::persistence::persistence_pairs;
use pentropy::synth::{random_sites, voronoi_label_map};
use pentropy::{compute_persistence, delaunay_triangulate, dim0_union_find, Point, PointCloud, Simplex};

fn cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointCloud::new((0..n).map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>())).collect()).unwrap()
}

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn orient_exact(a: Point, b: Point, c: Point) -> BigRational {
    (q(b.x) - q(a.x)) * (q(c.y) - q(a.y)) - (q(b.y) - q(a.y)) * (q(c.x) - q(a.x))
}

/// Coordinates as exact integers after scaling everything by one power of two.
fn to_integers(p: &[Point]) -> Vec<(BigInt, BigInt)> {
    let shift = |x: f64| q(x).denom().bits();
    let k = p.iter().map(|p| shift(p.x).max(shift(p.y))).max().unwrap_or(0);
    let int = |x: f64| {
        let r = q(x) * BigRational::from_integer(BigInt::from(1) << k);
        assert!(r.is_integer());
        r.to_integer()
    };
    p.iter().map(|p| (int(p.x), int(p.y))).collect()
}

/// Positive when `d` is strictly inside the circle through CCW `a, b, c`.
fn incircle_exact(a: &(BigInt, BigInt), b: &(BigInt, BigInt), c: &(BigInt, BigInt), d: &(BigInt, BigInt)) -> BigInt {
    let row = |p: &(BigInt, BigInt)| {
        let (x, y) = (&p.0 - &d.0, &p.1 - &d.1);
        let w = &x * &x + &y * &y;
        (x, y, w)
    };
    let (ax, ay, aw) = row(a);
    let (bx, by, bw) = row(b);
    let (cx, cy, cw) = row(c);
    ax * (&by * &cw - &bw * &cy) - ay * (&bx * &cw - &bw * &cx) + aw * (bx * cy - by * cx)
}

#[test]
fn delaunay_circumcircles_are_empty() {
    for seed in 0..5 {
        let pc = cloud(50, seed);
        let tri = delaunay_triangulate(&pc).unwrap();
        let p = pc.points();
        let ip = to_integers(p);
        for t in tri.triangles() {
            let (mut a, mut b, c) = (t[0], t[1], t[2]);
            let o = orient_exact(p[a], p[b], p[c]);
            assert!(!o.is_zero(), "flat triangle {t:?}");
            if o < BigRational::zero() {
                std::mem::swap(&mut a, &mut b);
            }
            for k in 0..p.len() {
                if t.contains(&k) {
                    continue;
                }
                assert!(incircle_exact(&ip[a], &ip[b], &ip[c], &ip[k]) <= BigInt::zero(), "point {k} inside {t:?}");
            }
        }
    }
}

#[test]
fn delaunay_covers_the_convex_hull() {
    // triangle areas add up to the hull area (exactly, in rationals)
    let pc = cloud(50, 7);
    let tri = delaunay_triangulate(&pc).unwrap();
    let p = pc.points();
    let total: BigRational = tri
        .triangles()
        .iter()
        .map(|t| {
            let o = orient_exact(p[t[0]], p[t[1]], p[t[2]]);
            if o < BigRational::zero() {
                -o
            } else {
                o
            }
        })
        .fold(BigRational::zero(), |a, b| a + b);

    // gift wrapping
    let start = (0..p.len()).min_by(|&i, &j| p[i].x.total_cmp(&p[j].x)).unwrap();
    let mut hull = vec![start];
    loop {
        let cur = *hull.last().unwrap();
        let mut next = (cur + 1) % p.len();
        for k in 0..p.len() {
            if orient_exact(p[cur], p[next], p[k]) < BigRational::zero() {
                next = k;
            }
        }
        if next == start {
            break;
        }
        hull.push(next);
    }
    let mut hull_area = BigRational::zero();
    for w in 1..hull.len() - 1 {
        hull_area += orient_exact(p[hull[0]], p[hull[w]], p[hull[w + 1]]);
    }
    assert_eq!(total, hull_area);
    assert_eq!(tri.euler_characteristic(), 1);
}

fn values_by_simplex(pc: &PointCloud) -> HashMap<Simplex, f64> {
    alpha_complex(pc).unwrap().simplices().iter().map(|s| (s.simplex, s.value)).collect()
}

#[test]
fn filtration_is_invariant_under_rigid_motions() {
    let pc = cloud(60, 3);
    let base = values_by_simplex(&pc);
    let (s, c) = 0.7f64.sin_cos();
    let moved = PointCloud::new(
        pc.points().iter().map(|p| Point::new(c * p.x - s * p.y + 3.5, s * p.x + c * p.y - 1.25)).collect(),
    )
    .unwrap();
    let rot = values_by_simplex(&moved);
    assert_eq!(base.len(), rot.len());
    for (k, v) in &base {
        let w = rot[k];
        assert!((v - w).abs() <= 1e-9 * v.max(1e-3), "{k:?}: {v} vs {w}");
    }
}

#[test]
fn filtration_scales_quadratically() {
    // a power-of-two scale is exact in floating point
    let pc = cloud(60, 4);
    let base = values_by_simplex(&pc);
    let big = PointCloud::new(pc.points().iter().map(|p| Point::new(8.0 * p.x, 8.0 * p.y)).collect()).unwrap();
    for (k, v) in values_by_simplex(&big) {
        assert_eq!(v, 64.0 * base[&k]);
    }
}

/// Prim's algorithm on the complete graph.
fn mst_weights(p: &[Point]) -> Vec<f64> {
    let n = p.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut out = Vec::new();
    for _ in 0..n {
        let u = (0..n).filter(|&i| !in_tree[i]).min_by(|&i, &j| best[i].total_cmp(&best[j])).unwrap();
        in_tree[u] = true;
        if u != 0 {
            out.push(best[u]);
        }
        for v in 0..n {
            let d = (p[u].x - p[v].x).powi(2) + (p[u].y - p[v].y).powi(2);
            if !in_tree[v] && d < best[v] {
                best[v] = d;
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn dimension_zero_matches_union_find_and_mst() {
    for seed in 100..200 {
        let pc = cloud(50, seed);
        let fc = alpha_complex(&pc).unwrap();
        let b = compute_persistence(&fc).unwrap();
        let uf = dim0_union_find(&fc).unwrap();
        assert!(b.dim(0).same_multiset(&uf), "seed {seed}");

        let mut deaths: Vec<f64> = b.in_dim(0).filter(|i| i.is_finite()).map(|i| i.death).collect();
        deaths.sort_by(f64::total_cmp);
        let mst: Vec<f64> = mst_weights(pc.points()).into_iter().map(|w| w / 4.0).collect();
        assert_eq!(deaths.len(), 49);
        for (d, m) in deaths.iter().zip(&mst) {
            assert!((d - m).abs() <= 1e-12 * m.max(1e-6), "seed {seed}: {d} vs {m}");
        }
        assert_eq!(b.in_dim(0).filter(|i| !i.is_finite()).count(), 1);
    }
}

#[test]
fn every_simplex_is_paired_once() {
    for seed in 0..20 {
        let fc = alpha_complex(&cloud(40, seed)).unwrap();
        let pairs = persistence_pairs(&fc).unwrap();
        let mut used = HashSet::new();
        for p in &pairs {
            assert!(used.insert(p.birth_simplex));
            if let Some(d) = p.death_simplex {
                assert!(used.insert(d));
                assert_eq!(d.dim(), p.birth_simplex.dim() + 1);
                assert!(p.death >= p.birth);
            }
        }
        assert_eq!(used.len(), fc.simplices().len());
        // a full Delaunay complex is contractible: one essential class
        assert_eq!(pairs.iter().filter(|p| p.death_simplex.is_none()).count(), 1);
    }
}

/// Visit order of a square spiral: right 1, up 1, left 2, down 2, right 3, ...
fn oracle_spiral(m: &LabelMatrix, n: usize, start: (usize, usize)) -> Vec<u32> {
    let dirs = [(0i64, 1i64), (-1, 0), (0, -1), (1, 0)];
    let (mut r, mut c) = (start.0 as i64, start.1 as i64);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut take = |r: i64, c: i64, out: &mut Vec<u32>| {
        if (0..m.rows() as i64).contains(&r) && (0..m.cols() as i64).contains(&c) {
            let l = m.get(r as usize, c as usize);
            if l != 0 && seen.insert(l) {
                out.push(l);
            }
        }
    };
    take(r, c, &mut out);
    let mut leg = 0;
    while out.len() < n {
        let len = leg / 2 + 1;
        let (dr, dc) = dirs[leg % 4];
        for _ in 0..len {
            r += dr;
            c += dc;
            take(r, c, &mut out);
            if out.len() == n {
                break;
            }
        }
        leg += 1;
    }
    out
}

#[test]
fn spiral_on_large_voronoi_raster() {
    let m = voronoi_label_map(1024, &random_sites(1024, 520, 42));
    assert!(m.distinct_labels().len() >= 450);
    let start = m.center();
    assert_eq!(start, (512, 512));
    let cells = spiral_select(&m, 400, start).unwrap();
    assert_eq!(cells.ids(), oracle_spiral(&m, 400, start).as_slice());

    let pc = compute_centroids(&m, &cells).unwrap();
    assert_eq!(pc.len(), 400);
    for (k, &id) in cells.ids().iter().enumerate().step_by(37) {
        let (mut sx, mut sy, mut cnt) = (0u64, 0u64, 0u64);
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if m.get(r, c) == id {
                    sx += c as u64;
                    sy += r as u64;
                    cnt += 1;
                }
            }
        }
        let p = pc.points()[k];
        assert!((p.x - sx as f64 / cnt as f64).abs() < 1e-9);
        assert!((p.y - sy as f64 / cnt as f64).abs() < 1e-9);
    }
}
