//! Rank-based comparison of groups: Kruskal-Wallis omnibus test and Dunn's
//! pairwise post-hoc test, both with tie correction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{chi2_sf, normal_sf};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0:?} is empty")]
    EmptyGroup(String),
    #[error("group {0:?} has a non-finite value")]
    NonFinite(String),
    #[error("need at least 3 observations, got {0}")]
    TooFewObservations(usize),
    #[error("degenerate sample: all observations are identical")]
    Degenerate,
    #[error("unknown adjustment {0:?} (expected none, bonferroni, holm or bh)")]
    UnknownAdjustment(String),
}

/// Named groups of observations, in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSample {
    groups: Vec<(String, Vec<f64>)>,
}

impl GroupSample {
    pub fn new(groups: Vec<(String, Vec<f64>)>) -> Result<Self, StatsError> {
        if groups.len() < 2 {
            return Err(StatsError::TooFewGroups(groups.len()));
        }
        for (name, values) in &groups {
            if values.is_empty() {
                return Err(StatsError::EmptyGroup(name.clone()));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite(name.clone()));
            }
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[(String, Vec<f64>)] {
        &self.groups
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|(_, v)| v.len()).sum()
    }

    fn pooled(&self) -> Vec<f64> {
        self.groups.iter().flat_map(|(_, v)| v.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranks {
    /// Mid-ranks (1-based), parallel to the input.
    pub ranks: Vec<f64>,
    /// Size of every tied block with at least two members.
    pub ties: Vec<usize>,
}

impl Ranks {
    /// `sum(t^3 - t)` over tied blocks.
    pub fn tie_sum(&self) -> f64 {
        self.ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum()
    }
}

pub fn rank_with_ties(values: &[f64]) -> Ranks {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // positions i..j share the mean of ranks i+1..=j
        let mid = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = mid;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    Ranks { ranks, ties }
}

struct RankSums {
    n_total: f64,
    sizes: Vec<f64>,
    mean_ranks: Vec<f64>,
    tie_sum: f64,
}

fn rank_sums(g: &GroupSample) -> Result<RankSums, StatsError> {
    let n = g.total();
    if n < 3 {
        return Err(StatsError::TooFewObservations(n));
    }
    let ranks = rank_with_ties(&g.pooled());
    let nf = n as f64;
    if ranks.ties.first() == Some(&n) {
        return Err(StatsError::Degenerate);
    }
    let mut offset = 0;
    let mut sizes = Vec::with_capacity(g.groups.len());
    let mut mean_ranks = Vec::with_capacity(g.groups.len());
    for (_, v) in &g.groups {
        let sum: f64 = ranks.ranks[offset..offset + v.len()].iter().sum();
        sizes.push(v.len() as f64);
        mean_ranks.push(sum / v.len() as f64);
        offset += v.len();
    }
    Ok(RankSums { n_total: nf, sizes, mean_ranks, tie_sum: ranks.tie_sum() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KruskalWallis {
    #[serde(rename = "H")]
    pub h: f64,
    pub df: usize,
    #[serde(rename = "p")]
    pub p_value: f64,
}

/// Tie-corrected Kruskal-Wallis H with a chi-square(k - 1) p-value.
pub fn kruskal_wallis(g: &GroupSample) -> Result<KruskalWallis, StatsError> {
    let rs = rank_sums(g)?;
    let n = rs.n_total;
    let between: f64 = rs.sizes.iter().zip(&rs.mean_ranks).map(|(&nj, &rbar)| nj * rbar * rbar).sum();
    let h_raw = 12.0 / (n * (n + 1.0)) * between - 3.0 * (n + 1.0);
    let correction = 1.0 - rs.tie_sum / (n * n * n - n);
    let h = (h_raw / correction).max(0.0);
    let df = g.groups.len() - 1;
    Ok(KruskalWallis { h, df, p_value: chi2_sf(h, df) })
}

/// Multiple-comparison adjustment for Dunn's p-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjustment {
    None,
    Bonferroni,
    Holm,
    /// Benjamini-Hochberg false discovery rate.
    Bh,
}

impl Adjustment {
    pub const ALL: [Adjustment; 4] = [Self::None, Self::Bonferroni, Self::Holm, Self::Bh];

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Bonferroni => "bonferroni",
            Self::Holm => "holm",
            Self::Bh => "bh",
        }
    }

    /// Adjusts `p` (one entry per comparison), clamping to 1.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let m = p.len() as f64;
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
        let mut out = vec![0.0; p.len()];
        match self {
            Self::None => out.copy_from_slice(p),
            Self::Bonferroni => {
                for (o, &v) in out.iter_mut().zip(p) {
                    *o = (v * m).min(1.0);
                }
            }
            Self::Holm => {
                let mut running: f64 = 0.0;
                for (rank, &i) in order.iter().enumerate() {
                    running = running.max(((m - rank as f64) * p[i]).min(1.0));
                    out[i] = running;
                }
            }
            Self::Bh => {
                let mut running: f64 = 1.0;
                for (rank, &i) in order.iter().enumerate().rev() {
                    running = running.min((m / (rank as f64 + 1.0) * p[i]).min(1.0));
                    out[i] = running;
                }
            }
        }
        out
    }
}

impl fmt::Display for Adjustment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Adjustment {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "bonferroni" => Ok(Self::Bonferroni),
            "holm" => Ok(Self::Holm),
            "bh" | "fdr" | "benjamini-hochberg" => Ok(Self::Bh),
            _ => Err(StatsError::UnknownAdjustment(s.to_string())),
        }
    }
}

/// Default adjustment: Benjamini-Hochberg, the method that reproduces the
/// published tissue comparison (see `README.md`, "Calibration").
pub const DEFAULT_ADJUSTMENT: Adjustment = Adjustment::Bh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub pair: String,
    pub group_a: String,
    pub group_b: String,
    pub z: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DunnTest {
    pub adjustment: Adjustment,
    /// Pairs `(i, j)` with `i < j` in group order.
    pub comparisons: Vec<PairwiseComparison>,
}

impl DunnTest {
    /// Comparison between two named groups, in either order.
    pub fn find(&self, a: &str, b: &str) -> Option<&PairwiseComparison> {
        self.comparisons.iter().find(|c| (c.group_a == a && c.group_b == b) || (c.group_a == b && c.group_b == a))
    }
}

/// Dunn's test: `z = (mean rank i - mean rank j) / se` with tie-corrected
/// variance, two-sided normal p-values, then the chosen adjustment.
pub fn dunn_test(g: &GroupSample, adjustment: Adjustment) -> Result<DunnTest, StatsError> {
    let rs = rank_sums(g)?;
    let n = rs.n_total;
    let var = n * (n + 1.0) / 12.0 - rs.tie_sum / (12.0 * (n - 1.0));
    let k = g.groups.len();
    let mut comparisons = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let se = (var * (1.0 / rs.sizes[i] + 1.0 / rs.sizes[j])).sqrt();
            let z = (rs.mean_ranks[i] - rs.mean_ranks[j]) / se;
            let (a, b) = (&g.groups[i].0, &g.groups[j].0);
            comparisons.push(PairwiseComparison {
                pair: format!("{a} - {b}"),
                group_a: a.clone(),
                group_b: b.clone(),
                z,
                p_raw: (2.0 * normal_sf(z.abs())).min(1.0),
                p_adjusted: 0.0,
            });
        }
    }
    let raw: Vec<f64> = comparisons.iter().map(|c| c.p_raw).collect();
    for (c, p) in comparisons.iter_mut().zip(adjustment.apply(&raw)) {
        c.p_adjusted = p;
    }
    Ok(DunnTest { adjustment, comparisons })
}

/// A published adjusted p-value for one variable and pair of groups.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceP {
    pub variable: String,
    pub group_a: String,
    pub group_b: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodFit {
    pub adjustment: Adjustment,
    /// `(reference, computed, relative error)` per entry.
    pub entries: Vec<(ReferenceP, f64, f64)>,
    pub matched: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub tolerance: f64,
    pub fits: Vec<MethodFit>,
    pub selected: Adjustment,
    /// Whether the selected method matches every reference entry.
    pub all_matched: bool,
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Dunn adjustment calibration (tolerance {:.0}% relative)", self.tolerance * 100.0)?;
        for fit in &self.fits {
            writeln!(
                f,
                "  {:<10} {}/{} within tolerance, max rel. error {:.4}",
                fit.adjustment.name(),
                fit.matched,
                fit.entries.len(),
                fit.max_rel_error
            )?;
        }
        write!(
            f,
            "  selected: {} ({})",
            self.selected,
            if self.all_matched { "all entries matched" } else { "best available; not all entries matched" }
        )
    }
}

/// Runs Dunn's test under every adjustment and picks the one agreeing with
/// `reference` best: most entries within `tolerance` relative error, then the
/// smallest worst-case error.
pub fn calibrate_adjustment(
    samples: &[(String, GroupSample)],
    reference: &[ReferenceP],
    tolerance: f64,
) -> Result<CalibrationReport, StatsError> {
    let mut fits = Vec::new();
    for adj in Adjustment::ALL {
        let mut entries = Vec::new();
        for r in reference {
            let Some((_, g)) = samples.iter().find(|(v, _)| *v == r.variable) else { continue };
            let dunn = dunn_test(g, adj)?;
            let Some(c) = dunn.find(&r.group_a, &r.group_b) else { continue };
            let err = ((c.p_adjusted - r.p) / r.p).abs();
            entries.push((r.clone(), c.p_adjusted, err));
        }
        let matched = entries.iter().filter(|e| e.2 <= tolerance).count();
        let max_rel_error = entries.iter().map(|e| e.2).fold(0.0, f64::max);
        fits.push(MethodFit { adjustment: adj, entries, matched, max_rel_error });
    }
    let best = fits
        .iter()
        .max_by(|a, b| a.matched.cmp(&b.matched).then(b.max_rel_error.total_cmp(&a.max_rel_error)))
        .expect("four candidate methods");
    let all_matched = best.matched == reference.len();
    Ok(CalibrationReport { tolerance, selected: best.adjustment, all_matched, fits })
}

/// Tukey five-number summary `[min, lower hinge, median, upper hinge, max]`,
/// the statistics drawn by a standard boxplot.
pub fn five_number(values: &[f64]) -> Option<[f64; 5]> {
    if values.is_empty() {
        return None;
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let n4 = ((n + 3.0) / 2.0).floor() / 2.0;
    let at = |d: f64| 0.5 * (x[d.floor() as usize - 1] + x[d.ceil() as usize - 1]);
    Some([at(1.0), at(n4), at((n + 1.0) / 2.0), at(n + 1.0 - n4), at(n)])
}
