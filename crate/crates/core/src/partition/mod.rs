//! Exchangeable random partitions of a single sequence.

mod eppf;
mod stirling;

pub use eppf::{gnedin_rho, ln_gnedin_rho, Eppf, PredFactors, Rho, SeriesSum, SERIES_REL_TOL};
pub use stirling::{gen_stirling_log, StirlingTable};

use rand::Rng;
use serde::Serialize;

use crate::error::{numerical, size, Result};
use crate::pmf::LogPmf;
use crate::sampling::sample_log_weights;
use crate::special::{ln_binomial, ln_factorial, log_sum_exp};

/// Largest `n` accepted by [`enumerate_partitions`] (Bell(12) = 4 213 597).
pub const MAX_ENUMERATION_N: usize = 12;

/// Residual on `|ln Σ q_n(k)|` tolerated before renormalizing a block-count pmf.
pub const BLOCK_PMF_RESIDUAL_TOL: f64 = 1e-8;

/// Block sizes `(n_1, …, n_k)` in order of appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct BlockSizes {
    sizes: Vec<usize>,
    n: usize,
}

impl BlockSizes {
    /// Rejects empty input and zero sizes.
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(size("a partition needs at least one block"));
        }
        if sizes.contains(&0) {
            return Err(size("block sizes must be ≥ 1"));
        }
        let n = sizes.iter().sum();
        Ok(Self { sizes, n })
    }

    /// The partition of the empty set, used as the start of sequential seating.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// Adds one element to block `c`, or opens a new block when `c == k`.
    pub fn add_to(&mut self, c: usize) {
        if c == self.sizes.len() {
            self.sizes.push(1);
        } else {
            self.sizes[c] += 1;
        }
        self.n += 1;
    }

    /// Copy with one more element in block `c` (or in a new block if `c == k`).
    pub fn with_added(&self, c: usize) -> Self {
        let mut out = self.clone();
        out.add_to(c);
        out
    }
}

/// A partition of `{1..n}` coded by order-of-appearance labels (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PartitionState {
    assignment: Vec<usize>,
    block_sizes: BlockSizes,
}

impl PartitionState {
    /// Validates the order-of-appearance coding: each label is at most one more
    /// than the largest label seen before it.
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(size("a partition needs n ≥ 1"));
        }
        let mut sizes: Vec<usize> = Vec::new();
        for (j, &a) in assignment.iter().enumerate() {
            if a > sizes.len() {
                return Err(size(format!(
                    "label {a} of element {j} skips ahead of the next new label {}",
                    sizes.len()
                )));
            }
            if a == sizes.len() {
                sizes.push(0);
            }
            sizes[a] += 1;
        }
        let n = assignment.len();
        Ok(Self {
            assignment,
            block_sizes: BlockSizes { sizes, n },
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn block_sizes(&self) -> &BlockSizes {
        &self.block_sizes
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn k(&self) -> usize {
        self.block_sizes.k()
    }
}

/// Distribution of the number of blocks `|Π_n|` over `k = 1..n`.
pub fn block_count_pmf(spec: &Eppf, n: usize) -> Result<LogPmf> {
    if n == 0 {
        return Err(size("block-count law needs n ≥ 1"));
    }
    let table = match spec {
        Eppf::Gnedin { .. } => None,
        _ => Some(StirlingTable::new(spec.sigma(), n)?),
    };
    block_count_pmf_with(spec, n, table.as_ref())
}

/// Block-count laws for every `n` in `1..=n_max`, sharing one Stirling table.
/// Entry `n − 1` holds the law for `n`.
pub fn block_count_table(spec: &Eppf, n_max: usize) -> Result<Vec<LogPmf>> {
    if n_max == 0 {
        return Err(size("block-count table needs n_max ≥ 1"));
    }
    let table = match spec {
        Eppf::Gnedin { .. } => None,
        _ => Some(StirlingTable::new(spec.sigma(), n_max)?),
    };
    (1..=n_max)
        .map(|n| block_count_pmf_with(spec, n, table.as_ref()))
        .collect()
}

fn block_count_pmf_with(spec: &Eppf, n: usize, table: Option<&StirlingTable>) -> Result<LogPmf> {
    let ln_vs = spec.ln_v_row(n)?;
    let mut ln_q = Vec::with_capacity(n);
    for (k, ln_v) in (1..=n).zip(ln_vs) {
        let ln_s = match table {
            Some(t) => t.ln(n, k),
            // Lah numbers C(n−1, k−1) n!/k!
            None => ln_binomial(n - 1, k - 1) + ln_factorial(n) - ln_factorial(k),
        };
        ln_q.push(if ln_v == f64::NEG_INFINITY {
            ln_v
        } else {
            ln_v + ln_s
        });
    }
    let z = log_sum_exp(&ln_q);
    if !(z.abs() <= BLOCK_PMF_RESIDUAL_TOL) {
        return Err(numerical(format!(
            "block-count pmf for n = {n} has normalization residual {z:e}"
        )));
    }
    LogPmf::from_log_weights(1, ln_q)
}

/// Draws a partition of `{1..n}` by sequential predictive seating.
pub fn sample_partition<R: Rng + ?Sized>(
    spec: &Eppf,
    n: usize,
    rng: &mut R,
) -> Result<PartitionState> {
    if n == 0 {
        return Err(size("sample_partition needs n ≥ 1"));
    }
    let mut b = BlockSizes::empty();
    let mut assignment = Vec::with_capacity(n);
    let mut ln_w = Vec::new();
    for _ in 0..n {
        let f = spec.pred_factors(b.n(), b.k())?;
        ln_w.clear();
        ln_w.extend(b.sizes().iter().map(|&s| f.ln_old(s)));
        ln_w.push(f.ln_new);
        let c = sample_log_weights(&ln_w, rng)
            .ok_or_else(|| numerical("all predictive weights vanish"))?;
        b.add_to(c);
        assignment.push(c);
    }
    Ok(PartitionState {
        assignment,
        block_sizes: b,
    })
}

/// Iterator over all set partitions of `{1..n}` as restricted-growth strings.
pub struct PartitionIter {
    labels: Vec<usize>,
    // running maximum of labels[..=j]
    prefix_max: Vec<usize>,
    done: bool,
}

impl Iterator for PartitionIter {
    type Item = PartitionState;

    fn next(&mut self) -> Option<PartitionState> {
        if self.done {
            return None;
        }
        let out = PartitionState::from_assignment(self.labels.clone())
            .expect("restricted-growth strings are valid codings");
        // advance: rightmost position that can still grow
        let n = self.labels.len();
        let mut j = n;
        loop {
            if j <= 1 {
                self.done = true;
                break;
            }
            j -= 1;
            if self.labels[j] <= self.prefix_max[j - 1] {
                self.labels[j] += 1;
                self.prefix_max[j] = self.prefix_max[j - 1].max(self.labels[j]);
                for t in j + 1..n {
                    self.labels[t] = 0;
                    self.prefix_max[t] = self.prefix_max[j];
                }
                break;
            }
        }
        Some(out)
    }
}

/// Every set partition of `{1..n}` exactly once (Bell(n) items), `1 ≤ n ≤ 12`.
pub fn enumerate_partitions(n: usize) -> Result<PartitionIter> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(size(format!(
            "enumeration supports 1 ≤ n ≤ {MAX_ENUMERATION_N} (got n = {n})"
        )));
    }
    Ok(PartitionIter {
        labels: vec![0; n],
        prefix_max: vec![0; n],
        done: false,
    })
}
