//! Synthetic tessellations for desk-scale experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{Point, PointCloud};
use crate::ingest::LabelMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    /// Independent uniform points in the unit square.
    Uniform,
    /// Hexagonal lattice with Gaussian jitter of `sigma` lattice spacings.
    HexJitter { sigma: f64 },
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lattice spacing used by [`hex_lattice`] for `n` sites.
pub fn hex_spacing(n: usize) -> f64 {
    1.0 / hex_columns(n) as f64
}

fn hex_columns(n: usize) -> usize {
    // a square patch of a hex lattice holds about 2/sqrt(3) * cols^2 sites
    ((n as f64 * 3f64.sqrt() / 2.0).sqrt().ceil() as usize).max(1)
}

/// First `n` sites, row by row, of a hexagonal lattice whose rows fit the
/// unit width. Odd rows are shifted by half a spacing.
pub fn hex_lattice(n: usize) -> Vec<Point> {
    let cols = hex_columns(n);
    let s = 1.0 / cols as f64;
    let row_h = s * 3f64.sqrt() / 2.0;
    (0..n)
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            let shift = if r % 2 == 1 { 0.5 } else { 0.0 };
            Point::new((c as f64 + shift) * s, r as f64 * row_h)
        })
        .collect()
}

/// Generates `n` points. Identical `(kind, n, seed)` give identical output.
pub fn generate(kind: SynthKind, n: usize, seed: u64) -> PointCloud {
    let mut rng = rng(seed);
    let points = match kind {
        SynthKind::Uniform => (0..n).map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>())).collect(),
        SynthKind::HexJitter { sigma } => {
            let base = hex_lattice(n);
            if sigma == 0.0 {
                base
            } else {
                let noise = Normal::new(0.0, sigma * hex_spacing(n)).expect("sigma is finite and >= 0");
                base.into_iter()
                    .map(|p| Point::new(p.x + noise.sample(&mut rng), p.y + noise.sample(&mut rng)))
                    .collect()
            }
        }
    };
    PointCloud::new(points).expect("generated coordinates are finite")
}

/// Rasterizes the Voronoi diagram of `sites` (pixel coordinates, `x` =
/// column) into a `size x size` label matrix. Site `i` gets label `i + 1`;
/// pixels with a 4-neighbour of another label become boundary (0).
pub fn voronoi_label_map(size: usize, sites: &[Point]) -> LabelMatrix {
    assert!(!sites.is_empty() && size > 0);
    // bucket grid so that each pixel only scans nearby sites
    let buckets_per_side = ((sites.len() as f64).sqrt().ceil() as usize).max(1);
    let cell = size as f64 / buckets_per_side as f64;
    let bucket_of = |v: f64| ((v / cell).floor().max(0.0) as usize).min(buckets_per_side - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); buckets_per_side * buckets_per_side];
    for (i, s) in sites.iter().enumerate() {
        buckets[bucket_of(s.y) * buckets_per_side + bucket_of(s.x)].push(i);
    }
    let nearest = |p: Point| -> usize {
        let (br, bc) = (bucket_of(p.y) as isize, bucket_of(p.x) as isize);
        let mut best = (f64::INFINITY, usize::MAX);
        let mut ring = 0isize;
        loop {
            for r in br - ring..=br + ring {
                for c in bc - ring..=bc + ring {
                    let on_ring = (r - br).abs() == ring || (c - bc).abs() == ring;
                    if !on_ring || r < 0 || c < 0 || r >= buckets_per_side as isize || c >= buckets_per_side as isize {
                        continue;
                    }
                    for &i in &buckets[r as usize * buckets_per_side + c as usize] {
                        let d = p.dist2(sites[i]);
                        if d < best.0 || (d == best.0 && i < best.1) {
                            best = (d, i);
                        }
                    }
                }
            }
            // any site outside the scanned square is at least `ring * cell` away
            let reach = ring as f64 * cell;
            if best.1 != usize::MAX && best.0 <= reach * reach {
                return best.1;
            }
            if ring as usize > buckets_per_side {
                return best.1;
            }
            ring += 1;
        }
    };
    let mut labels = vec![0u32; size * size];
    for r in 0..size {
        for c in 0..size {
            labels[r * size + c] = nearest(Point::new(c as f64, r as f64)) as u32 + 1;
        }
    }
    let mut out = labels.clone();
    for r in 0..size {
        for c in 0..size {
            let l = labels[r * size + c];
            let differs = (r > 0 && labels[(r - 1) * size + c] != l) || (c > 0 && labels[r * size + c - 1] != l);
            if differs {
                out[r * size + c] = 0;
            }
        }
    }
    LabelMatrix::new(size, size, out)
}

/// Uniformly scattered sites for [`voronoi_label_map`].
pub fn random_sites(size: usize, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = rng(seed);
    (0..n).map(|_| Point::new(rng.random::<f64>() * size as f64, rng.random::<f64>() * size as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let a = generate(SynthKind::HexJitter { sigma: 0.2 }, 50, 7);
        assert_eq!(a, generate(SynthKind::HexJitter { sigma: 0.2 }, 50, 7));
        assert_ne!(a, generate(SynthKind::HexJitter { sigma: 0.2 }, 50, 8));
        let u = generate(SynthKind::Uniform, 3, 1);
        assert_eq!(u.len(), 3);
        assert!(u.points().iter().all(|p| (0.0..1.0).contains(&p.x) && (0.0..1.0).contains(&p.y)));
    }

    #[test]
    fn lattice_neighbours_are_one_spacing_apart() {
        let pts = hex_lattice(400);
        assert_eq!(pts.len(), 400);
        let s = hex_spacing(400);
        for (i, p) in pts.iter().enumerate() {
            let nn =
                pts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| p.dist2(*q)).fold(f64::INFINITY, f64::min);
            assert!((nn.sqrt() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn voronoi_map_matches_brute_force() {
        let sites = random_sites(64, 20, 3);
        let m = voronoi_label_map(64, &sites);
        for r in (0..64).step_by(5) {
            for c in (0..64).step_by(3) {
                let l = m.get(r, c);
                if l == 0 {
                    continue;
                }
                let p = Point::new(c as f64, r as f64);
                let best = (0..sites.len())
                    .min_by(|&a, &b| p.dist2(sites[a]).total_cmp(&p.dist2(sites[b])).then(a.cmp(&b)))
                    .unwrap();
                assert_eq!(l as usize, best + 1);
            }
        }
    }
}
