//! Collapsed Gibbs sampler for hierarchical mixtures of normals.
//!
//! Atoms are integrated out. A sweep resamples every customer's
//! `(table, dish)` pair jointly and then every table's dish.

mod data;
mod nig;
mod predictive;

pub use data::{Dataset, GroupMixture, Preset, Synthetic};
pub use nig::{NigHyper, NigPosterior, StudentT, SuffStats};
pub use predictive::{predictive_density, predictive_weights, SnapshotView};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{numerical, Error, Result};
use crate::prior::HssmSpec;
use crate::sampling::sample_log_weights;

/// Observation model of a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Likelihood {
    Nig(NigHyper),
    /// Every likelihood term is 1, so the chain targets the prior. Used to test
    /// that the label updates leave the prior invariant.
    Constant,
}

impl Likelihood {
    pub fn validate(&self) -> Result<()> {
        match self {
            Likelihood::Nig(h) => h.validate(),
            Likelihood::Constant => Ok(()),
        }
    }

    fn log_marginal(&self, s: &SuffStats) -> Result<f64> {
        match self {
            Likelihood::Nig(h) => h.log_marginal(s),
            Likelihood::Constant => Ok(0.0),
        }
    }
}

/// How labels are initialized before the first sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Seat customers one by one from their full conditional given those
    /// already seated.
    #[default]
    Sequential,
    /// One table per group, all tables sharing one dish.
    Single,
}

/// Sweeps, burn-in and thinning of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(Error::Config(format!(
                "sweeps ({}) must exceed burn_in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Whether sweep `s` (1-based) is recorded.
    pub fn records(&self, s: usize) -> bool {
        s > self.burn_in && (s - self.burn_in).is_multiple_of(self.thin)
    }

    pub fn snapshots(&self) -> usize {
        (self.sweeps - self.burn_in) / self.thin
    }
}

#[derive(Debug, Clone, Copy)]
struct DishCache {
    pred: Option<StudentT>,
    log_marginal: f64,
}

/// Labels and sufficient statistics of the sampler. Tables and dishes are
/// labelled `0..k` without gaps; emptied ones are removed at once.
#[derive(Debug, Clone)]
pub struct GibbsState {
    table_of: Vec<Vec<usize>>,
    group_seated: Vec<usize>,
    table_size: Vec<Vec<usize>>,
    table_dish: Vec<Vec<usize>>,
    table_stats: Vec<Vec<SuffStats>>,
    dish_tables: Vec<usize>,
    dish_stats: Vec<SuffStats>,
    dish_cache: Vec<DishCache>,
    total_tables: usize,
}

const UNSEATED: usize = usize::MAX;

impl GibbsState {
    fn empty(sizes: &[usize]) -> Self {
        let g = sizes.len();
        Self {
            table_of: sizes.iter().map(|&n| vec![UNSEATED; n]).collect(),
            group_seated: vec![0; g],
            table_size: vec![Vec::new(); g],
            table_dish: vec![Vec::new(); g],
            table_stats: vec![Vec::new(); g],
            dish_tables: Vec::new(),
            dish_stats: Vec::new(),
            dish_cache: Vec::new(),
            total_tables: 0,
        }
    }

    pub fn dishes(&self) -> usize {
        self.dish_tables.len()
    }

    pub fn total_tables(&self) -> usize {
        self.total_tables
    }

    pub fn tables_in(&self, i: usize) -> usize {
        self.table_size[i].len()
    }

    pub fn table_of(&self, i: usize) -> &[usize] {
        &self.table_of[i]
    }

    pub fn table_dish(&self, i: usize) -> &[usize] {
        &self.table_dish[i]
    }

    pub fn dish_stats(&self) -> &[SuffStats] {
        &self.dish_stats
    }

    /// Dish of every customer, flattened in `(i, j)` order.
    pub fn dish_labels(&self) -> Vec<usize> {
        self.table_of
            .iter()
            .zip(&self.table_dish)
            .flat_map(|(cs, ds)| cs.iter().map(move |&c| ds[c]))
            .collect()
    }

    /// Table labels per group and flattened dish labels, both renumbered in
    /// order of first appearance. Equal partitions give equal output.
    pub fn canonical_labels(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let tables = self.table_of.iter().map(|c| canonicalize(c)).collect();
        (tables, canonicalize(&self.dish_labels()))
    }

    /// Recomputes all counts and statistics from the labels and compares.
    pub fn check_consistency(&self, data: &Dataset) -> Result<()> {
        let d = self.dishes();
        let mut dish_tables = vec![0usize; d];
        let mut dish_stats = vec![SuffStats::default(); d];
        let mut total = 0;
        for (i, ys) in data.groups().iter().enumerate() {
            let k = self.table_size[i].len();
            let mut sizes = vec![0usize; k];
            let mut stats = vec![SuffStats::default(); k];
            for (j, &c) in self.table_of[i].iter().enumerate() {
                if c >= k {
                    return Err(numerical(format!("customer ({i},{j}) has no table")));
                }
                sizes[c] += 1;
                stats[c].add(ys[j]);
            }
            if sizes != self.table_size[i] || sizes.contains(&0) {
                return Err(numerical(format!("group {i}: table sizes out of sync")));
            }
            for (c, st) in stats.iter().enumerate().take(k) {
                if !stats_close(st, &self.table_stats[i][c]) {
                    return Err(numerical(format!(
                        "group {i}: table {c} statistics out of sync"
                    )));
                }
                let dd = self.table_dish[i][c];
                if dd >= d {
                    return Err(numerical(format!("group {i}: table {c} has no dish")));
                }
                dish_tables[dd] += 1;
                dish_stats[dd].merge(&stats[c]);
            }
            total += k;
        }
        if dish_tables != self.dish_tables || dish_tables.contains(&0) || total != self.total_tables
        {
            return Err(numerical("dish table counts out of sync"));
        }
        for (a, b) in dish_stats.iter().zip(&self.dish_stats) {
            if !stats_close(a, b) {
                return Err(numerical("dish statistics out of sync"));
            }
        }
        Ok(())
    }
}

fn stats_close(a: &SuffStats, b: &SuffStats) -> bool {
    let tol = |x: f64, y: f64| (x - y).abs() <= 1e-8 * (1.0 + x.abs().max(y.abs()));
    a.n == b.n && tol(a.sum, b.sum) && tol(a.sumsq, b.sumsq)
}

/// Relabels so that labels appear in increasing order starting at 0.
pub fn canonicalize(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// One Markov chain over `(c, d)` for a fixed dataset and model.
pub struct Sampler<'a> {
    data: &'a Dataset,
    h: &'a HssmSpec,
    lik: Likelihood,
    state: GibbsState,
    empty_pred: Option<StudentT>,
    ln_w: Vec<f64>,
    ln_pred: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new<R: Rng + ?Sized>(
        data: &'a Dataset,
        h: &'a HssmSpec,
        lik: Likelihood,
        init: Init,
        rng: &mut R,
    ) -> Result<Self> {
        h.validate()?;
        lik.validate()?;
        let empty_pred = match lik {
            Likelihood::Nig(hy) => Some(hy.predictive(&SuffStats::default())),
            Likelihood::Constant => None,
        };
        let mut s = Self {
            data,
            h,
            lik,
            state: GibbsState::empty(&data.sizes()),
            empty_pred,
            ln_w: Vec::new(),
            ln_pred: Vec::new(),
        };
        match init {
            Init::Sequential => {
                for i in 0..data.num_groups() {
                    for j in 0..data.group(i).len() {
                        s.insert_customer(i, j, rng)?;
                    }
                }
            }
            Init::Single => s.init_single()?,
        }
        Ok(s)
    }

    fn init_single(&mut self) -> Result<()> {
        let st = &mut self.state;
        let mut all = SuffStats::default();
        for (i, ys) in self.data.groups().iter().enumerate() {
            let stats = SuffStats::from_slice(ys);
            all.merge(&stats);
            st.table_of[i].iter_mut().for_each(|c| *c = 0);
            st.group_seated[i] = ys.len();
            st.table_size[i] = vec![ys.len()];
            st.table_dish[i] = vec![0];
            st.table_stats[i] = vec![stats];
        }
        st.total_tables = self.data.num_groups();
        st.dish_tables = vec![st.total_tables];
        st.dish_stats = vec![all];
        let cache = self.cache_for(&all)?;
        self.state.dish_cache = vec![cache];
        Ok(())
    }

    pub fn state(&self) -> &GibbsState {
        &self.state
    }

    pub fn likelihood(&self) -> &Likelihood {
        &self.lik
    }

    fn cache_for(&self, s: &SuffStats) -> Result<DishCache> {
        Ok(match self.lik {
            Likelihood::Nig(hy) => DishCache {
                pred: Some(hy.predictive(s)),
                log_marginal: hy.log_marginal(s)?,
            },
            Likelihood::Constant => DishCache {
                pred: None,
                log_marginal: 0.0,
            },
        })
    }

    fn refresh_dish(&mut self, d: usize) -> Result<()> {
        self.state.dish_cache[d] = self.cache_for(&self.state.dish_stats[d])?;
        Ok(())
    }

    fn remove_dish(&mut self, d: usize) {
        let st = &mut self.state;
        st.dish_tables.remove(d);
        st.dish_stats.remove(d);
        st.dish_cache.remove(d);
        for dishes in st.table_dish.iter_mut() {
            for x in dishes.iter_mut() {
                if *x != UNSEATED && *x > d {
                    *x -= 1;
                }
            }
        }
    }

    fn push_dish(&mut self, stats: SuffStats, tables: usize) -> Result<usize> {
        let cache = self.cache_for(&stats)?;
        let st = &mut self.state;
        st.dish_tables.push(tables);
        st.dish_stats.push(stats);
        st.dish_cache.push(cache);
        Ok(st.dish_tables.len() - 1)
    }

    /// Takes customer `(i, j)` out of the franchise, deleting an emptied table
    /// and dish.
    fn remove_customer(&mut self, i: usize, j: usize) -> Result<()> {
        let y = self.data.group(i)[j];
        let st = &mut self.state;
        let t = st.table_of[i][j];
        let d = st.table_dish[i][t];
        st.table_of[i][j] = UNSEATED;
        st.group_seated[i] -= 1;
        st.table_size[i][t] -= 1;
        st.table_stats[i][t].remove(y);
        st.dish_stats[d].remove(y);
        if st.table_size[i][t] == 0 {
            st.table_size[i].remove(t);
            st.table_dish[i].remove(t);
            st.table_stats[i].remove(t);
            for c in st.table_of[i].iter_mut() {
                if *c != UNSEATED && *c > t {
                    *c -= 1;
                }
            }
            st.total_tables -= 1;
            st.dish_tables[d] -= 1;
            if st.dish_tables[d] == 0 {
                self.remove_dish(d);
                return Ok(());
            }
        }
        self.refresh_dish(d)
    }

    #[inline]
    fn ln_pred_dish(&self, d: usize, y: f64) -> f64 {
        match self.state.dish_cache[d].pred {
            Some(t) => t.ln_pdf(y),
            None => 0.0,
        }
    }

    /// Normalized probabilities of seating customer `(i, j)`, currently
    /// unseated: existing tables first, then a new table with each existing
    /// dish, then a new table with a new dish.
    pub fn customer_weights(&mut self, i: usize, j: usize) -> Result<Vec<f64>> {
        self.fill_customer_weights(i, j)?;
        let max = self.ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.ln_w.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = w.iter().sum();
        Ok(w.into_iter().map(|x| x / z).collect())
    }

    fn fill_customer_weights(&mut self, i: usize, j: usize) -> Result<()> {
        let y = self.data.group(i)[j];
        let st = &self.state;
        let f = self
            .h
            .bottom
            .pred_factors(st.group_seated[i], st.table_size[i].len())?;
        let f0 = self
            .h
            .top
            .pred_factors(st.total_tables, st.dish_tables.len())?;
        let mut ln_pred = std::mem::take(&mut self.ln_pred);
        ln_pred.clear();
        ln_pred.extend((0..st.dish_tables.len()).map(|d| self.ln_pred_dish(d, y)));
        let ln_new_dish = self.empty_pred.map_or(0.0, |t| t.ln_pdf(y));

        let mut ln_w = std::mem::take(&mut self.ln_w);
        ln_w.clear();
        for (c, &sz) in st.table_size[i].iter().enumerate() {
            ln_w.push(f.ln_old(sz) + ln_pred[st.table_dish[i][c]]);
        }
        for (d, &m) in st.dish_tables.iter().enumerate() {
            ln_w.push(f.ln_new + f0.ln_old(m) + ln_pred[d]);
        }
        ln_w.push(f.ln_new + f0.ln_new + ln_new_dish);
        self.ln_w = ln_w;
        self.ln_pred = ln_pred;
        Ok(())
    }

    /// Seats the unseated customer `(i, j)` from its full conditional.
    fn insert_customer<R: Rng + ?Sized>(&mut self, i: usize, j: usize, rng: &mut R) -> Result<()> {
        self.fill_customer_weights(i, j)?;
        let pick = sample_log_weights(&self.ln_w, rng)
            .ok_or_else(|| numerical(format!("customer ({i},{j}): all weights vanish")))?;
        let y = self.data.group(i)[j];
        let k = self.state.table_size[i].len();
        let dcount = self.state.dish_tables.len();
        let (t, d) = if pick < k {
            (pick, self.state.table_dish[i][pick])
        } else {
            let d = if pick < k + dcount {
                let d = pick - k;
                self.state.dish_tables[d] += 1;
                d
            } else {
                self.push_dish(SuffStats::default(), 1)?
            };
            let st = &mut self.state;
            st.table_size[i].push(0);
            st.table_dish[i].push(d);
            st.table_stats[i].push(SuffStats::default());
            st.total_tables += 1;
            (k, d)
        };
        let st = &mut self.state;
        st.table_of[i][j] = t;
        st.group_seated[i] += 1;
        st.table_size[i][t] += 1;
        st.table_stats[i][t].add(y);
        st.dish_stats[d].add(y);
        self.refresh_dish(d)
    }

    /// Resamples `(c_{ij}, d*_{ij})` jointly.
    pub fn step_customer<R: Rng + ?Sized>(
        &mut self,
        i: usize,
        j: usize,
        rng: &mut R,
    ) -> Result<()> {
        self.remove_customer(i, j)?;
        self.insert_customer(i, j, rng)
    }

    /// Resamples the dish of table `(i, t)` given everything else.
    pub fn step_table<R: Rng + ?Sized>(&mut self, i: usize, t: usize, rng: &mut R) -> Result<()> {
        let stats = self.state.table_stats[i][t];
        let d = self.state.table_dish[i][t];
        {
            let st = &mut self.state;
            st.table_dish[i][t] = UNSEATED;
            st.dish_stats[d].unmerge(&stats);
            st.dish_tables[d] -= 1;
            st.total_tables -= 1;
        }
        if self.state.dish_tables[d] == 0 {
            self.remove_dish(d);
        } else {
            self.refresh_dish(d)?;
        }

        let st = &self.state;
        let f0 = self
            .h
            .top
            .pred_factors(st.total_tables, st.dish_tables.len())?;
        let mut ln_w = std::mem::take(&mut self.ln_w);
        ln_w.clear();
        for (dd, &m) in st.dish_tables.iter().enumerate() {
            let joined = self.lik.log_marginal(&st.dish_stats[dd].merged(&stats))?;
            ln_w.push(f0.ln_old(m) + joined - st.dish_cache[dd].log_marginal);
        }
        ln_w.push(f0.ln_new + self.lik.log_marginal(&stats)?);
        let pick = sample_log_weights(&ln_w, rng)
            .ok_or_else(|| numerical(format!("table ({i},{t}): all weights vanish")));
        self.ln_w = ln_w;
        let pick = pick?;

        let dn = if pick < self.state.dish_tables.len() {
            let st = &mut self.state;
            st.dish_tables[pick] += 1;
            st.dish_stats[pick].merge(&stats);
            self.refresh_dish(pick)?;
            pick
        } else {
            self.push_dish(stats, 1)?
        };
        self.state.table_dish[i][t] = dn;
        self.state.total_tables += 1;
        Ok(())
    }

    /// One full sweep: customers in `(i, j)` order, then tables in `(i, c)` order.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        for i in 0..self.data.num_groups() {
            for j in 0..self.data.group(i).len() {
                self.step_customer(i, j, rng)?;
            }
        }
        for i in 0..self.data.num_groups() {
            for t in 0..self.state.table_size[i].len() {
                self.step_table(i, t, rng)?;
            }
        }
        Ok(())
    }

    pub fn snapshot(&self, sweep: usize) -> Snapshot {
        let (tables, dishes) = self.state.canonical_labels();
        Snapshot {
            sweep,
            dishes: self.state.dishes(),
            tables: tables.into_iter().flatten().map(|x| x as u32).collect(),
            dish_labels: dishes.into_iter().map(|x| x as u32).collect(),
        }
    }
}

/// Draws `(μ_d, σ²_d)` for every dish from its conditional posterior.
pub fn sample_atoms<R: Rng + ?Sized>(
    state: &GibbsState,
    hyper: &NigHyper,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    state
        .dish_stats
        .iter()
        .map(|s| hyper.sample_posterior(s, rng))
        .collect()
}

/// Labels recorded at one sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub sweep: usize,
    /// `D`
    pub dishes: usize,
    /// Table of each customer, flattened in `(i, j)` order, numbered within
    /// each group by first appearance.
    pub tables: Vec<u32>,
    /// Dish of each customer (`d̃`), numbered by first appearance.
    pub dish_labels: Vec<u32>,
}

/// Snapshots of one chain with its sweep plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsTrace {
    pub plan: SweepPlan,
    pub group_sizes: Vec<usize>,
    pub snapshots: Vec<Snapshot>,
}

impl GibbsTrace {
    /// `D` at each recorded sweep.
    pub fn cluster_counts(&self) -> Vec<usize> {
        self.snapshots.iter().map(|s| s.dishes).collect()
    }
}

/// Runs one chain and records the snapshots selected by `plan`.
pub fn run_chain(
    data: &Dataset,
    h: &HssmSpec,
    lik: Likelihood,
    plan: SweepPlan,
    init: Init,
    seed: u64,
) -> Result<GibbsTrace> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Sampler::new(data, h, lik, init, &mut rng)?;
    let mut snapshots = Vec::with_capacity(plan.snapshots());
    for sweep in 1..=plan.sweeps {
        s.sweep(&mut rng)?;
        if plan.records(sweep) {
            snapshots.push(s.snapshot(sweep));
        }
    }
    log::debug!("chain finished: {} snapshots", snapshots.len());
    Ok(GibbsTrace {
        plan,
        group_sizes: data.sizes(),
        snapshots,
    })
}
