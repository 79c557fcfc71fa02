//! Persistent entropy of barcodes and its stability bound.
//!
//! For bar lengths `l_i` with total `L`, the entropy is
//! `-sum (l_i / L) log(l_i / L)`. It is 0 for a single bar and `log n` for
//! `n` bars of equal length.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::persistence::{Barcode, Interval};

#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("no intervals")]
    Empty,
    #[error("interval length {0} is not positive and finite")]
    BadLength(f64),
    #[error("log base {0} must be finite and > 1")]
    BadBase(f64),
    #[error("dimension {0} has no intervals after the infinite-bar policy")]
    EmptyDimension(usize),
    #[error("a dimension has {0} finite intervals, brute-force limit is {BOTTLENECK_LIMIT}")]
    TooLarge(usize),
}

/// What to do with intervals that never die.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum InfinitePolicy {
    Drop,
    /// Replace `+inf` with the given value (normally the largest filtration
    /// value of the complex).
    Cap(f64),
}

impl InfinitePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Drop => "drop",
            Self::Cap(_) => "cap",
        }
    }

    /// Finite positive lengths of `intervals` under this policy.
    fn lengths<'a>(&self, intervals: impl Iterator<Item = &'a Interval>) -> Vec<f64> {
        intervals
            .filter_map(|i| match (self, i.is_finite()) {
                (_, true) => Some(i.length()),
                (Self::Cap(v), false) => Some(v - i.birth),
                (Self::Drop, false) => None,
            })
            .filter(|&l| l > 0.0)
            .collect()
    }
}

/// Entropy of a list of bar lengths in the given log base.
pub fn persistent_entropy(lengths: &[f64], log_base: f64) -> Result<f64, EntropyError> {
    if !(log_base.is_finite() && log_base > 1.0) {
        return Err(EntropyError::BadBase(log_base));
    }
    if lengths.is_empty() {
        return Err(EntropyError::Empty);
    }
    if let Some(&bad) = lengths.iter().find(|&&l| !(l.is_finite() && l > 0.0)) {
        return Err(EntropyError::BadLength(bad));
    }
    let total: f64 = lengths.iter().sum();
    let h: f64 = lengths
        .iter()
        .map(|&l| {
            let p = l / total;
            -p * p.ln()
        })
        .sum();
    // a single bar (or rounding just below zero) is exactly 0
    Ok((h / log_base.ln()).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySummary {
    pub pe0: f64,
    pub pe1: f64,
    pub pe_all: f64,
    pub n0: usize,
    pub n1: usize,
    pub l0: f64,
    pub l1: f64,
    pub l_all: f64,
}

/// Entropy of the dimension-0 bars, dimension-1 bars and their union.
pub fn summarize_entropy(b: &Barcode, policy: InfinitePolicy, log_base: f64) -> Result<EntropySummary, EntropyError> {
    let l0 = policy.lengths(b.in_dim(0));
    let l1 = policy.lengths(b.in_dim(1));
    if l0.is_empty() {
        return Err(EntropyError::EmptyDimension(0));
    }
    if l1.is_empty() {
        return Err(EntropyError::EmptyDimension(1));
    }
    let all: Vec<f64> = l0.iter().chain(&l1).copied().collect();
    Ok(EntropySummary {
        pe0: persistent_entropy(&l0, log_base)?,
        pe1: persistent_entropy(&l1, log_base)?,
        pe_all: persistent_entropy(&all, log_base)?,
        n0: l0.len(),
        n1: l1.len(),
        l0: l0.iter().sum(),
        l1: l1.iter().sum(),
        l_all: all.iter().sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityBound {
    pub value: f64,
    /// Set when the bound is vacuous (`+inf`): the log argument fell outside
    /// `(0, n_max)` or an input was empty.
    pub trivial: bool,
}

/// Upper bound on `|E(B1) - E(B2)|` for filter functions within `delta` of
/// each other in sup norm:
/// `r (log n_max - log r)` with `r = 4 delta n_max / max(L1, L2)`.
///
/// Only finite intervals are counted.
pub fn stability_bound(b1: &Barcode, b2: &Barcode, delta: f64, log_base: f64) -> StabilityBound {
    let finite = |b: &Barcode| -> (usize, f64) {
        let ls: Vec<f64> = b.intervals().iter().filter(|i| i.is_finite()).map(Interval::length).collect();
        (ls.len(), ls.iter().sum())
    };
    let ((n1, s1), (n2, s2)) = (finite(b1), finite(b2));
    let n_max = n1.max(n2) as f64;
    let l_max = s1.max(s2);
    let vacuous = StabilityBound { value: f64::INFINITY, trivial: true };
    // NaN fails the positivity test
    let positive = |x: f64| x > 0.0;
    if !positive(delta) || n_max == 0.0 || !positive(l_max) {
        return vacuous;
    }
    let r = 4.0 * delta * n_max / l_max;
    if !(r > 0.0 && r < n_max) {
        return vacuous;
    }
    StabilityBound { value: r * (n_max.ln() - r.ln()) / log_base.ln(), trivial: false }
}

/// Largest admissible bottleneck distance in the stability hypothesis:
/// `max(L1, L2) / (8 n_max)` over finite intervals.
pub fn stability_hypothesis_radius(b1: &Barcode, b2: &Barcode) -> f64 {
    let stats = |b: &Barcode| {
        let ls: Vec<f64> = b.intervals().iter().filter(|i| i.is_finite()).map(Interval::length).collect();
        (ls.len(), ls.iter().sum::<f64>())
    };
    let ((n1, s1), (n2, s2)) = (stats(b1), stats(b2));
    let n_max = n1.max(n2);
    if n_max == 0 {
        return 0.0;
    }
    s1.max(s2) / (8.0 * n_max as f64)
}

/// Finite intervals per barcode and dimension allowed by [`bottleneck_bruteforce`].
pub const BOTTLENECK_LIMIT: usize = 12;

/// Exact bottleneck distance, taken as the maximum over dimensions.
///
/// Within a dimension, finite bars are matched to each other at L-inf cost
/// or sent to the diagonal at half their length; infinite bars are matched
/// by sorted birth (distance `+inf` if the counts differ). The optimum is
/// found by testing every candidate cost in increasing order for a perfect
/// matching.
pub fn bottleneck_bruteforce(b1: &Barcode, b2: &Barcode) -> Result<f64, EntropyError> {
    let mut dims: Vec<usize> = b1.intervals().iter().chain(b2.intervals()).map(|i| i.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    for &d in &dims {
        for b in [b1, b2] {
            let n = b.in_dim(d).filter(|i| i.is_finite()).count();
            if n > BOTTLENECK_LIMIT {
                return Err(EntropyError::TooLarge(n));
            }
        }
    }
    let mut worst: f64 = 0.0;
    for d in dims {
        let mut inf1: Vec<f64> = b1.in_dim(d).filter(|i| !i.is_finite()).map(|i| i.birth).collect();
        let mut inf2: Vec<f64> = b2.in_dim(d).filter(|i| !i.is_finite()).map(|i| i.birth).collect();
        if inf1.len() != inf2.len() {
            return Ok(f64::INFINITY);
        }
        inf1.sort_by(f64::total_cmp);
        inf2.sort_by(f64::total_cmp);
        for (a, b) in inf1.iter().zip(&inf2) {
            worst = worst.max((a - b).abs());
        }
        let f1: Vec<(f64, f64)> = b1.in_dim(d).filter(|i| i.is_finite()).map(|i| (i.birth, i.death)).collect();
        let f2: Vec<(f64, f64)> = b2.in_dim(d).filter(|i| i.is_finite()).map(|i| (i.birth, i.death)).collect();
        worst = worst.max(finite_bottleneck(&f1, &f2));
    }
    Ok(worst)
}

fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n + m == 0 {
        return 0.0;
    }
    let diag = |p: (f64, f64)| (p.1 - p.0) / 2.0;
    let pair = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).abs().max((p.1 - q.1).abs());
    // left: a_0..a_n, then m diagonal slots for b; right: b_0..b_m, then n slots for a
    let size = n + m;
    let cost = |i: usize, j: usize| -> f64 {
        match (i < n, j < m) {
            (true, true) => pair(a[i], b[j]),
            (true, false) => {
                if j - m == i {
                    diag(a[i])
                } else {
                    f64::INFINITY
                }
            }
            (false, true) => {
                if i - n == j {
                    diag(b[j])
                } else {
                    f64::INFINITY
                }
            }
            (false, false) => 0.0,
        }
    };
    let mut candidates: Vec<f64> = (0..size)
        .flat_map(|i| (0..size).map(move |j| (i, j)))
        .map(|(i, j)| cost(i, j))
        .filter(|c| c.is_finite())
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(size, |i, j| cost(i, j) <= candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Kuhn's augmenting-path bipartite matching on a dense `size x size` graph.
fn perfect_matching(size: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    fn augment(
        i: usize,
        size: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..size {
            if edge(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, size, edge, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; size];
    (0..size).all(|i| {
        let mut seen = vec![false; size];
        augment(i, size, &edge, &mut seen, &mut owner)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn extremes_and_hand_values() {
        assert!((persistent_entropy(&[0.3; 4], 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(persistent_entropy(&[7.0], 2.0).unwrap(), 0.0);
        // -(1/4 log 1/4 + 1/4 log 1/4 + 1/2 log 1/2) = 1/2 + 1/2 + 1/2
        assert!((persistent_entropy(&[1.0, 1.0, 2.0], 2.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((persistent_entropy(&[1.0, 1.0], std::f64::consts::E).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn entropy_errors() {
        assert_eq!(persistent_entropy(&[], 2.0), Err(EntropyError::Empty));
        assert_eq!(persistent_entropy(&[1.0, 0.0], 2.0), Err(EntropyError::BadLength(0.0)));
        assert_eq!(persistent_entropy(&[f64::INFINITY], 2.0), Err(EntropyError::BadLength(f64::INFINITY)));
        assert_eq!(persistent_entropy(&[1.0], 1.0), Err(EntropyError::BadBase(1.0)));
    }

    #[test]
    fn summary_with_policies() {
        let b = Barcode::new(vec![
            Interval::new(0, 0.0, 1.0),
            Interval::new(0, 0.0, 1.0),
            Interval::new(0, 0.0, f64::INFINITY),
            Interval::new(1, 0.5, 1.5),
        ]);
        let s = summarize_entropy(&b, InfinitePolicy::Drop, 2.0).unwrap();
        assert_eq!((s.pe0, s.n0, s.pe1, s.n1), (1.0, 2, 0.0, 1));
        assert!((s.pe_all - 3f64.log2()).abs() < 1e-15);
        let s = summarize_entropy(&b, InfinitePolicy::Cap(1.0), 2.0).unwrap();
        assert!((s.pe0 - 3f64.log2()).abs() < 1e-15);
        assert_eq!(s.n0, 3);
        let no_cycles = b.dim(0);
        assert_eq!(summarize_entropy(&no_cycles, InfinitePolicy::Drop, 2.0), Err(EntropyError::EmptyDimension(1)));
    }

    #[test]
    fn bound_formula() {
        let b = Barcode::new(vec![Interval::new(0, 0.0, 1.0), Interval::new(0, 0.0, 1.0)]);
        let s = stability_bound(&b, &b, 0.05, 2.0);
        // r = 4 * 0.05 * 2 / 2 = 0.2 ; 0.2 * (log2 2 - log2 0.2)
        let expected = 0.2 * (1.0 - 0.2f64.log2());
        assert!(!s.trivial);
        assert!((s.value - expected).abs() < 1e-14);
        assert!((s.value - 0.6644).abs() < 1e-4);
        assert!(stability_bound(&b, &b, 5.0, 2.0).trivial);
        assert!(stability_bound(&b, &b, 0.0, 2.0).trivial);
        assert_eq!(stability_hypothesis_radius(&b, &b), 2.0 / 16.0);
    }

    #[test]
    fn bottleneck_examples() {
        let b1 = Barcode::new(vec![Interval::new(0, 0.0, 4.0)]);
        assert_eq!(bottleneck_bruteforce(&b1, &b1).unwrap(), 0.0);
        assert_eq!(bottleneck_bruteforce(&b1, &Barcode::default()).unwrap(), 2.0);
        let b2 = Barcode::new(vec![Interval::new(0, 1.0, 5.0)]);
        assert_eq!(bottleneck_bruteforce(&b1, &b2).unwrap(), 1.0);
        // a short bar is cheaper to send to the diagonal
        let b3 = Barcode::new(vec![Interval::new(0, 0.0, 4.0), Interval::new(0, 1.0, 1.2)]);
        assert!((bottleneck_bruteforce(&b1, &b3).unwrap() - 0.1).abs() < 1e-15);
        // dimensions never mix
        let d1 = Barcode::new(vec![Interval::new(1, 0.0, 4.0)]);
        assert_eq!(bottleneck_bruteforce(&b1, &d1).unwrap(), 2.0);
        let inf = Barcode::new(vec![Interval::new(0, 0.5, f64::INFINITY)]);
        assert_eq!(bottleneck_bruteforce(&b1, &inf).unwrap(), f64::INFINITY);
        let big = Barcode::new(vec![Interval::new(0, 0.0, 1.0); 13]);
        assert_eq!(bottleneck_bruteforce(&big, &b1), Err(EntropyError::TooLarge(13)));
        let mut split = vec![Interval::new(0, 0.0, 1.0); 12];
        split.extend(vec![Interval::new(1, 0.0, 1.0); 12]);
        assert!(bottleneck_bruteforce(&Barcode::new(split), &b1).is_ok());
    }

    /// Exhaustive enumeration of partial matchings, for tiny inputs only.
    fn bottleneck_enumerate(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
        fn go(i: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, cur: f64, best: &mut f64) {
            if i == a.len() {
                let rest = b.iter().zip(used.iter()).filter(|(_, u)| !**u).map(|(q, _)| (q.1 - q.0) / 2.0);
                *best = best.min(rest.fold(cur, f64::max));
                return;
            }
            go(i + 1, a, b, used, cur.max((a[i].1 - a[i].0) / 2.0), best);
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    let c = (a[i].0 - b[j].0).abs().max((a[i].1 - b[j].1).abs());
                    go(i + 1, a, b, used, cur.max(c), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
        best
    }

    fn bars() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((0f64..5.0, 0.01f64..3.0).prop_map(|(b, l)| (b, b + l)), 0..5)
    }

    proptest! {
        #[test]
        fn matching_search_agrees_with_enumeration(a in bars(), b in bars()) {
            let to_bc = |v: &[(f64, f64)]| Barcode::new(v.iter().map(|&(x, y)| Interval::new(0, x, y)).collect());
            let fast = bottleneck_bruteforce(&to_bc(&a), &to_bc(&b)).unwrap();
            prop_assert_eq!(fast, bottleneck_enumerate(&a, &b));
        }

        #[test]
        fn entropy_is_scale_and_permutation_invariant(
            mut ls in proptest::collection::vec(1e-3f64..1e3, 1..40), c in 1e-3f64..1e3, rot in 0usize..40
        ) {
            let e = persistent_entropy(&ls, 2.0).unwrap();
            let scaled: Vec<f64> = ls.iter().map(|l| l * c).collect();
            prop_assert!((persistent_entropy(&scaled, 2.0).unwrap() - e).abs() < 1e-12);
            let k = rot % ls.len();
            ls.rotate_left(k);
            ls.reverse();
            prop_assert!((persistent_entropy(&ls, 2.0).unwrap() - e).abs() < 1e-12);
            prop_assert!(e >= 0.0 && e <= (ls.len() as f64).log2() + 1e-12);
        }
    }
}
