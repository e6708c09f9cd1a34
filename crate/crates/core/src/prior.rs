//! Exact prior laws of the number of clusters in a hierarchical model.
//!
//! With `q_n` the bottom block-count law and `q⁰_m` the top one,
//! `P{D_i = k} = Σ_m q_{n_i}(m) q⁰_m(k)` and the total count mixes `q⁰` over
//! the law of the total number of tables `K = Σ_i K_i`.

use serde::{Deserialize, Serialize};

use crate::error::{param, size, Result};
use crate::partition::{block_count_table, BlockSizes, Eppf};
use crate::pmf::LogPmf;
use crate::special::{ln_binomial, ln_factorial, log_sum_exp};

/// Largest total sample size accepted by [`peppf_log`].
pub const MAX_PEPPF_N: usize = 12;

/// How diffuse atoms are produced by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AtomSampler {
    /// Opaque unique identifiers.
    #[default]
    Tag,
    /// Real draws from `N(mean, sd²)`.
    Normal { mean: f64, sd: f64 },
}

/// Base measure `H₀`: diffuse, or `a δ_{x₀} + (1 − a) H̃` with diffuse `H̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseMeasure {
    Diffuse {
        #[serde(default)]
        atoms: AtomSampler,
    },
    SpikeSlab {
        a: f64,
        #[serde(default)]
        atoms: AtomSampler,
    },
}

impl Default for BaseMeasure {
    fn default() -> Self {
        BaseMeasure::Diffuse {
            atoms: AtomSampler::Tag,
        }
    }
}

impl BaseMeasure {
    pub fn validate(&self) -> Result<()> {
        let atoms = match self {
            BaseMeasure::Diffuse { atoms } => atoms,
            BaseMeasure::SpikeSlab { a, atoms } => {
                check_spike_weight(*a)?;
                atoms
            }
        };
        if let AtomSampler::Normal { mean, sd } = atoms {
            if !mean.is_finite() || !(*sd > 0.0) || !sd.is_finite() {
                return Err(param(format!(
                    "normal atom sampler needs finite mean and sd > 0 (got {mean}, {sd})"
                )));
            }
        }
        Ok(())
    }

    pub fn atom_sampler(&self) -> AtomSampler {
        match self {
            BaseMeasure::Diffuse { atoms } | BaseMeasure::SpikeSlab { atoms, .. } => *atoms,
        }
    }

    /// Spike weight `a`, if any.
    pub fn spike_weight(&self) -> Option<f64> {
        match self {
            BaseMeasure::SpikeSlab { a, .. } => Some(*a),
            BaseMeasure::Diffuse { .. } => None,
        }
    }
}

fn check_spike_weight(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(param(format!(
            "spike weight must satisfy 0 < a < 1 (got a = {a})"
        )))
    }
}

/// A hierarchical species sampling model: top law `Φ₀`, bottom law `Φ`, base `H₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HssmSpec {
    pub top: Eppf,
    pub bottom: Eppf,
    #[serde(default)]
    pub base: BaseMeasure,
}

impl HssmSpec {
    pub fn new(top: Eppf, bottom: Eppf, base: BaseMeasure) -> Result<Self> {
        let h = Self { top, bottom, base };
        h.validate()?;
        Ok(h)
    }

    /// Diffuse base.
    pub fn diffuse(top: Eppf, bottom: Eppf) -> Result<Self> {
        Self::new(top, bottom, BaseMeasure::default())
    }

    pub fn validate(&self) -> Result<()> {
        self.top.validate()?;
        self.bottom.validate()?;
        self.base.validate()
    }
}

/// Group sizes `(n_1, …, n_I)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupSizes(Vec<usize>);

impl GroupSizes {
    pub fn new(n: Vec<usize>) -> Result<Self> {
        if n.is_empty() {
            return Err(size("at least one group is required"));
        }
        if n.contains(&0) {
            return Err(size("every group needs at least one observation"));
        }
        Ok(Self(n))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn groups(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Precomputed block-count laws of both levels up to a common size.
#[derive(Debug, Clone)]
pub struct PriorTables {
    bottom: Vec<LogPmf>,
    top: Vec<LogPmf>,
}

impl PriorTables {
    /// Tables sufficient for groups of size up to `n_bottom` and a total number
    /// of tables up to `n_top`.
    pub fn new(h: &HssmSpec, n_bottom: usize, n_top: usize) -> Result<Self> {
        h.validate()?;
        Ok(Self {
            bottom: block_count_table(&h.bottom, n_bottom)?,
            top: block_count_table(&h.top, n_top)?,
        })
    }

    /// Tables for the given group sizes.
    pub fn for_groups(h: &HssmSpec, g: &GroupSizes) -> Result<Self> {
        Self::new(h, g.max(), g.total())
    }

    /// Law of the number of tables `K_i` in a group of size `n`.
    pub fn tables_pmf(&self, n: usize) -> Result<&LogPmf> {
        lookup(&self.bottom, n, "bottom")
    }

    /// Law of the number of dishes served to `m` tables.
    pub fn top_pmf(&self, m: usize) -> Result<&LogPmf> {
        lookup(&self.top, m, "top")
    }

    /// `P{D_i = k}` for a group of size `n_i`.
    pub fn marginal(&self, n_i: usize) -> Result<LogPmf> {
        let q = self.tables_pmf(n_i)?;
        self.mix_top(q)
    }

    /// Law of the total number of tables across all groups.
    pub fn total_tables(&self, g: &GroupSizes) -> Result<LogPmf> {
        let mut acc = self.tables_pmf(g.sizes()[0])?.clone();
        for &n in &g.sizes()[1..] {
            acc = convolve(&acc, self.tables_pmf(n)?)?;
        }
        Ok(acc)
    }

    /// `P{D = k}` for the whole sample.
    pub fn total(&self, g: &GroupSizes) -> Result<LogPmf> {
        let k = self.total_tables(g)?;
        self.mix_top(&k)
    }

    /// `Σ_m p(m) q⁰_m(k)` over the support of `p`.
    fn mix_top(&self, p: &LogPmf) -> Result<LogPmf> {
        let max = p.max_support();
        if max > self.top.len() {
            return Err(size(format!(
                "top table covers m ≤ {} but {max} tables are possible",
                self.top.len()
            )));
        }
        let mut terms: Vec<Vec<f64>> = vec![Vec::new(); max];
        for (m, lp) in p
            .log_mass()
            .iter()
            .enumerate()
            .map(|(i, lp)| (p.min_support() + i, *lp))
        {
            if m == 0 || lp == f64::NEG_INFINITY {
                continue;
            }
            let q0 = &self.top[m - 1];
            for (k, lq) in q0
                .log_mass()
                .iter()
                .enumerate()
                .map(|(i, lq)| (q0.min_support() + i, *lq))
            {
                terms[k - 1].push(lp + lq);
            }
        }
        let ln_w: Vec<f64> = terms.iter().map(|t| log_sum_exp(t)).collect();
        LogPmf::from_log_weights(1, ln_w)
    }
}

fn lookup<'a>(table: &'a [LogPmf], n: usize, level: &str) -> Result<&'a LogPmf> {
    if n == 0 {
        return Err(size("cluster-count laws need n ≥ 1"));
    }
    table.get(n - 1).ok_or_else(|| {
        size(format!(
            "{level} table covers n ≤ {} (asked for {n})",
            table.len()
        ))
    })
}

/// Law of the sum of two independent counts, computed on a rescaled linear
/// scale so that neither operand underflows.
pub fn convolve(p: &LogPmf, q: &LogPmf) -> Result<LogPmf> {
    let scale = |x: &LogPmf| {
        let m = x
            .log_mass()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (
            m,
            x.log_mass()
                .iter()
                .map(|l| (l - m).exp())
                .collect::<Vec<_>>(),
        )
    };
    let (mp, lp) = scale(p);
    let (mq, lq) = scale(q);
    let mut out = vec![0.0; lp.len() + lq.len() - 1];
    for (i, a) in lp.iter().enumerate() {
        if *a == 0.0 {
            continue;
        }
        for (j, b) in lq.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    let ln_w = out.into_iter().map(|x| x.ln() + mp + mq).collect();
    LogPmf::from_log_weights(p.min_support() + q.min_support(), ln_w)
}

/// Law of the number of clusters `D_i` in a group of size `n_i`.
pub fn marginal_cluster_pmf(h: &HssmSpec, n_i: usize) -> Result<LogPmf> {
    if n_i == 0 {
        return Err(size("marginal cluster law needs n_i ≥ 1"));
    }
    PriorTables::new(h, n_i, n_i)?.marginal(n_i)
}

/// Law of the total number of clusters `D` across groups.
pub fn total_cluster_pmf(h: &HssmSpec, g: &GroupSizes) -> Result<LogPmf> {
    PriorTables::for_groups(h, g)?.total(g)
}

/// `E[D^r]`.
pub fn cluster_moment(p: &LogPmf, r: f64) -> f64 {
    p.moment(r)
}

/// `ln H*(d | k)`: probability of `d` distinct values among `k` draws from
/// `a δ_{x₀} + (1 − a) H̃`.
fn ln_spike_slab_kernel(k: usize, d: usize, a: f64) -> f64 {
    let (la, lb) = (a.ln(), (1.0 - a).ln());
    // at least one spike: d − 1 slab draws and k + 1 − d ≥ 1 spike draws
    let with_spike = if d >= 1 && d <= k {
        ln_binomial(k, d - 1) + (k + 1 - d) as f64 * la + (d - 1) as f64 * lb
    } else {
        f64::NEG_INFINITY
    };
    if d == k {
        crate::special::log_add_exp(with_spike, d as f64 * lb)
    } else {
        with_spike
    }
}

/// `H*(· | k)` over `d = 1..k`.
pub fn spike_slab_distinct_pmf(k: usize, a: f64) -> Result<LogPmf> {
    check_spike_weight(a)?;
    if k == 0 {
        return Err(size("spike-and-slab law needs k ≥ 1"));
    }
    let ln_w = (1..=k).map(|d| ln_spike_slab_kernel(k, d, a)).collect();
    LogPmf::from_log_weights(1, ln_w)
}

/// Law of the number of distinct observed values when the `D` latent
/// clusters draw their atoms from a spike-and-slab base with spike weight `a`.
pub fn spike_slab_adjust(p: &LogPmf, a: f64) -> Result<LogPmf> {
    check_spike_weight(a)?;
    let max = p.max_support();
    let mut terms: Vec<Vec<f64>> = vec![Vec::new(); max.max(1)];
    for (k, lp) in p
        .log_mass()
        .iter()
        .enumerate()
        .map(|(i, l)| (p.min_support() + i, *l))
    {
        if k == 0 {
            return Err(size("cluster counts start at 1"));
        }
        if lp == f64::NEG_INFINITY {
            continue;
        }
        for d in 1..=k {
            terms[d - 1].push(lp + ln_spike_slab_kernel(k, d, a));
        }
    }
    LogPmf::from_log_weights(1, terms.iter().map(|t| log_sum_exp(t)).collect())
}

/// Integer partitions of `n` as multiplicity vectors `mult[j-1]` = number of
/// parts equal to `j`.
fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, max_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=max_part.min(rem)).rev() {
            cur[p - 1] += 1;
            rec(rem - p, p, cur, out);
            cur[p - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    rec(n, n, &mut cur, &mut out);
    out
}

/// One way of splitting a group-by-cluster cell into tables.
struct CellSplit {
    sizes: Vec<usize>,
    ln_count: f64,
}

fn cell_splits(n: usize) -> Vec<CellSplit> {
    integer_partitions(n)
        .into_iter()
        .map(|mult| {
            let mut sizes = Vec::new();
            let mut ln_count = ln_factorial(n);
            for (j, &l) in mult.iter().enumerate() {
                let size = j + 1;
                sizes.extend(std::iter::repeat_n(size, l));
                ln_count -= ln_factorial(l) + l as f64 * ln_factorial(size);
            }
            CellSplit { sizes, ln_count }
        })
        .collect()
}

/// Log probability that the induced partition of a grouped sample equals one
/// fixed realization whose group-by-cluster counts are `counts[i][d]`.
///
/// Sums over every split of each cell into tables. Only diffuse base measures
/// are supported and the total sample size is capped at [`MAX_PEPPF_N`].
pub fn peppf_log(h: &HssmSpec, counts: &[Vec<usize>]) -> Result<f64> {
    h.validate()?;
    if !matches!(h.base, BaseMeasure::Diffuse { .. }) {
        return Err(param("peppf_log requires a diffuse base measure"));
    }
    if counts.is_empty() {
        return Err(size("count matrix needs at least one group"));
    }
    let d = counts[0].len();
    if d == 0 || counts.iter().any(|r| r.len() != d) {
        return Err(size(
            "count matrix rows must share a positive number of columns",
        ));
    }
    if (0..d).any(|c| counts.iter().all(|r| r[c] == 0)) {
        return Err(size("every cluster column needs a positive entry"));
    }
    let total: usize = counts.iter().flatten().sum();
    if total > MAX_PEPPF_N {
        return Err(size(format!(
            "peppf_log is exhaustive and limited to n ≤ {MAX_PEPPF_N} (got {total})"
        )));
    }

    let cells: Vec<(usize, usize, Vec<CellSplit>)> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            r.iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(move |(c, &n)| (i, c, n))
        })
        .map(|(i, c, n)| (i, c, cell_splits(n)))
        .collect();

    let groups = counts.len();
    let mut choice = vec![0usize; cells.len()];
    let mut terms = Vec::new();
    loop {
        let mut ln_w = 0.0;
        let mut dish_tables = vec![0usize; d];
        let mut group_tables: Vec<Vec<usize>> = vec![Vec::new(); groups];
        for (cell, &ch) in cells.iter().zip(&choice) {
            let (i, c, splits) = cell;
            let s = &splits[ch];
            ln_w += s.ln_count;
            dish_tables[*c] += s.sizes.len();
            group_tables[*i].extend_from_slice(&s.sizes);
        }
        ln_w += h.top.eppf_log(&BlockSizes::new(dish_tables)?)?;
        for t in group_tables.into_iter().filter(|t| !t.is_empty()) {
            ln_w += h.bottom.eppf_log(&BlockSizes::new(t)?)?;
        }
        terms.push(ln_w);

        // odometer over the cartesian product of cell splits
        let mut pos = 0;
        loop {
            if pos == cells.len() {
                return Ok(log_sum_exp(&terms));
            }
            choice[pos] += 1;
            if choice[pos] < cells[pos].2.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}
