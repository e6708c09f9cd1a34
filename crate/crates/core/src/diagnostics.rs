//! Clustering and predictive accuracy of posterior samples.

use serde::Serialize;

use crate::error::{size, Result};
use crate::gibbs::GibbsTrace;

/// Posterior probabilities that two observations share a dish.
#[derive(Debug, Clone, PartialEq)]
pub struct CoClusterMatrix {
    n: usize,
    p: Vec<f64>,
}

impl CoClusterMatrix {
    /// Builds the matrix from a dense row-major array, checking symmetry,
    /// unit diagonal and range.
    pub fn from_dense(n: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != n * n {
            return Err(size(format!("expected {} entries, got {}", n * n, p.len())));
        }
        for l in 0..n {
            if p[l * n + l] != 1.0 {
                return Err(size(format!("diagonal entry {l} is not 1")));
            }
            for k in 0..l {
                let v = p[l * n + k];
                if !(0.0..=1.0).contains(&v) || v != p[k * n + l] {
                    return Err(size(format!(
                        "entry ({l},{k}) is out of range or asymmetric"
                    )));
                }
            }
        }
        Ok(Self { n, p })
    }

    /// Co-assignment matrix of a single labelling.
    pub fn from_labels<L: PartialEq>(labels: &[L]) -> Self {
        let n = labels.len();
        let mut p = vec![0.0; n * n];
        for l in 0..n {
            for k in 0..n {
                if labels[l] == labels[k] {
                    p[l * n + k] = 1.0;
                }
            }
        }
        Self { n, p }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.p[l * self.n + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }
}

/// Frequencies with which each pair of observations shares a dish label
/// across the snapshots.
pub fn coclustering(trace: &GibbsTrace) -> Result<CoClusterMatrix> {
    let first = trace
        .snapshots
        .first()
        .ok_or_else(|| size("trace has no snapshots"))?;
    let n = first.dish_labels.len();
    let mut counts = vec![0u32; n * n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for s in &trace.snapshots {
        if s.dish_labels.len() != n {
            return Err(size("snapshots have different lengths"));
        }
        members.iter_mut().for_each(Vec::clear);
        for (idx, &d) in s.dish_labels.iter().enumerate() {
            let d = d as usize;
            if d >= members.len() {
                members.resize_with(d + 1, Vec::new);
            }
            members[d].push(idx);
        }
        for block in &members {
            for &l in block {
                let row = &mut counts[l * n..(l + 1) * n];
                for &k in block {
                    row[k] += 1;
                }
            }
        }
    }
    let m = trace.snapshots.len() as f64;
    Ok(CoClusterMatrix {
        n,
        p: counts.into_iter().map(|c| c as f64 / m).collect(),
    })
}

fn check_truth(p: &CoClusterMatrix, truth: &[usize]) -> Result<()> {
    if p.n != truth.len() {
        return Err(size(format!(
            "matrix is {0}×{0}, truth has {1} labels",
            p.n,
            truth.len()
        )));
    }
    Ok(())
}

fn mean_abs_diff(p: &CoClusterMatrix, truth: &[usize], f: impl Fn(f64) -> f64) -> f64 {
    let n = p.n;
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for l in 0..n {
        for k in 0..n {
            let t = if truth[l] == truth[k] { 1.0 } else { 0.0 };
            acc += (t - f(p.get(l, k))).abs();
        }
    }
    acc / (n * n) as f64
}

/// Mean absolute difference between `P` and the true co-assignment matrix.
pub fn cn_error(p: &CoClusterMatrix, truth: &[usize]) -> Result<f64> {
    check_truth(p, truth)?;
    Ok(mean_abs_diff(p, truth, |x| x))
}

/// Same as [`cn_error`] after thresholding `P` at `> 0.5`.
pub fn cn_star(p: &CoClusterMatrix, truth: &[usize]) -> Result<f64> {
    check_truth(p, truth)?;
    Ok(mean_abs_diff(p, truth, |x| if x > 0.5 { 1.0 } else { 0.0 }))
}

/// Trapezoid rule for `∫ |f − g|` on a common grid.
pub fn l1_distance(grid: &[f64], f: &[f64], g: &[f64]) -> Result<f64> {
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(size("density and grid lengths differ"));
    }
    Ok(grid
        .windows(2)
        .enumerate()
        .map(|(k, x)| 0.5 * (x[1] - x[0]) * ((f[k] - g[k]).abs() + (f[k + 1] - g[k + 1]).abs()))
        .sum())
}

/// Average over groups of the L1 distance between predicted and true
/// densities, each group on its own grid.
pub fn predictive_score(grids: &[Vec<f64>], pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<f64> {
    if grids.is_empty() || grids.len() != pred.len() || grids.len() != truth.len() {
        return Err(size("need one grid, prediction and truth per group"));
    }
    let mut acc = 0.0;
    for ((x, p), t) in grids.iter().zip(pred).zip(truth) {
        if p.iter().chain(t).any(|v| !(*v >= 0.0)) {
            return Err(size("densities must be nonnegative"));
        }
        acc += l1_distance(x, p, t)?;
    }
    Ok(acc / grids.len() as f64)
}

/// Median (lower median for an even count), variance with denominator `M`
/// and histogram of the number of clusters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterCountSummary {
    pub median: usize,
    pub mean: f64,
    pub variance: f64,
    /// `histogram[d]` = number of snapshots with `D = d`.
    pub histogram: Vec<usize>,
}

pub fn summarize_counts(ds: &[usize]) -> Result<ClusterCountSummary> {
    if ds.is_empty() {
        return Err(size("no cluster counts"));
    }
    let mut sorted = ds.to_vec();
    sorted.sort_unstable();
    let median = sorted[(sorted.len() - 1) / 2];
    let m = ds.len() as f64;
    let mean = ds.iter().map(|&d| d as f64).sum::<f64>() / m;
    let variance = ds.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / m;
    let mut histogram = vec![0; sorted[sorted.len() - 1] + 1];
    for &d in ds {
        histogram[d] += 1;
    }
    Ok(ClusterCountSummary {
        median,
        mean,
        variance,
        histogram,
    })
}

pub fn cluster_count_summary(trace: &GibbsTrace) -> Result<ClusterCountSummary> {
    summarize_counts(&trace.cluster_counts())
}
