//! Forward simulation of the Chinese restaurant franchise.
//!
//! Customers arrive restaurant by restaurant. Each one joins an occupied table
//! with probability `ω_c` or opens a new table with probability `ν`; a new
//! table orders an existing dish with probability `ω̃_d` or a new dish, whose
//! atom is drawn from `H₀`, with probability `ν̃`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{numerical, size, Result};
use crate::prior::{AtomSampler, BaseMeasure, GroupSizes, HssmSpec};
use crate::sampling::sample_log_weights;

/// Value attached to a dish. Spike atoms are all equal; slab atoms are unique.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AtomValue {
    Spike,
    Slab(u64),
    Real(f64),
}

/// Outcome of seating one customer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Seating {
    pub table: usize,
    pub dish: usize,
    pub new_table: bool,
    pub new_dish: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
struct Restaurant {
    table_of_customer: Vec<usize>,
    table_sizes: Vec<usize>,
    dish_of_table: Vec<usize>,
    /// `m_{id}`: tables in this restaurant serving dish `d`.
    tables_per_dish: Vec<usize>,
}

/// Full franchise state with incrementally maintained counts.
/// Labels are 0-based and in order of appearance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrfState {
    restaurants: Vec<Restaurant>,
    /// `m_{·d}`
    tables_per_dish: Vec<usize>,
    atoms: Vec<AtomValue>,
    total_tables: usize,
    next_slab_id: u64,
}

impl CrfState {
    /// An empty franchise with `groups` restaurants.
    pub fn new(groups: usize) -> Result<Self> {
        if groups == 0 {
            return Err(size("a franchise needs at least one restaurant"));
        }
        Ok(Self {
            restaurants: vec![Restaurant::default(); groups],
            tables_per_dish: Vec::new(),
            atoms: Vec::new(),
            total_tables: 0,
            next_slab_id: 0,
        })
    }

    pub fn groups(&self) -> usize {
        self.restaurants.len()
    }

    /// `D`: dishes in use.
    pub fn dishes(&self) -> usize {
        self.tables_per_dish.len()
    }

    /// `m_{··}`
    pub fn total_tables(&self) -> usize {
        self.total_tables
    }

    /// `m_{i·}`
    pub fn tables_in(&self, i: usize) -> usize {
        self.restaurants[i].table_sizes.len()
    }

    /// `n_{i··}`
    pub fn customers_in(&self, i: usize) -> usize {
        self.restaurants[i].table_of_customer.len()
    }

    /// `m_{·d}` for every dish.
    pub fn tables_per_dish(&self) -> &[usize] {
        &self.tables_per_dish
    }

    pub fn atoms(&self) -> &[AtomValue] {
        &self.atoms
    }

    /// `c_{i,j}`
    pub fn table_of_customer(&self, i: usize) -> &[usize] {
        &self.restaurants[i].table_of_customer
    }

    /// `d_{i,c}`
    pub fn dish_of_table(&self, i: usize) -> &[usize] {
        &self.restaurants[i].dish_of_table
    }

    /// `n_{ic·}`
    pub fn table_sizes(&self, i: usize) -> &[usize] {
        &self.restaurants[i].table_sizes
    }

    /// `d*_{i,j} = d_{i, c_{i,j}}` for every customer of restaurant `i`.
    pub fn dish_of_customer(&self, i: usize) -> Vec<usize> {
        let r = &self.restaurants[i];
        r.table_of_customer
            .iter()
            .map(|&c| r.dish_of_table[c])
            .collect()
    }

    /// `D_i`: distinct dishes served in restaurant `i`.
    pub fn dishes_in(&self, i: usize) -> usize {
        self.restaurants[i]
            .tables_per_dish
            .iter()
            .filter(|&&m| m > 0)
            .count()
    }

    /// Distinct atom values among the given dishes: every slab or real atom is
    /// its own value, and all spike atoms count once.
    fn distinct_values<'a>(&self, dishes: impl Iterator<Item = &'a usize>) -> usize {
        let mut spike = false;
        let mut other = 0;
        for &d in dishes {
            match self.atoms[d] {
                AtomValue::Spike => spike = true,
                _ => other += 1,
            }
        }
        other + spike as usize
    }

    /// Distinct observed values in the whole sample.
    pub fn distinct_values_total(&self) -> usize {
        let all: Vec<usize> = (0..self.dishes()).collect();
        self.distinct_values(all.iter())
    }

    /// Distinct observed values in restaurant `i`.
    pub fn distinct_values_in(&self, i: usize) -> usize {
        let served: Vec<usize> = self.restaurants[i]
            .tables_per_dish
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(d, _)| d)
            .collect();
        self.distinct_values(served.iter())
    }

    /// Recomputes every count from the labels and compares with the stored ones.
    pub fn check_counts(&self) -> Result<()> {
        let d = self.dishes();
        let mut per_dish = vec![0usize; d];
        let mut total = 0;
        for (i, r) in self.restaurants.iter().enumerate() {
            let mut sizes = vec![0usize; r.dish_of_table.len()];
            for &c in &r.table_of_customer {
                if c >= sizes.len() {
                    return Err(numerical(format!(
                        "restaurant {i}: table label {c} out of range"
                    )));
                }
                sizes[c] += 1;
            }
            if sizes != r.table_sizes || sizes.contains(&0) {
                return Err(numerical(format!(
                    "restaurant {i}: table sizes out of sync"
                )));
            }
            let mut local = vec![0usize; d];
            for &dd in &r.dish_of_table {
                local[dd] += 1;
                per_dish[dd] += 1;
            }
            let mut stored = r.tables_per_dish.clone();
            stored.resize(d, 0);
            if local != stored {
                return Err(numerical(format!(
                    "restaurant {i}: per-dish table counts out of sync"
                )));
            }
            // order-of-appearance coding of tables
            let mut next = 0;
            for &c in &r.table_of_customer {
                if c > next {
                    return Err(numerical(format!(
                        "restaurant {i}: table labels skip ahead"
                    )));
                }
                if c == next {
                    next += 1;
                }
            }
            total += r.table_sizes.len();
        }
        if per_dish != self.tables_per_dish || per_dish.contains(&0) {
            return Err(numerical("dish table counts out of sync"));
        }
        if total != self.total_tables || self.atoms.len() != d {
            return Err(numerical("table or atom totals out of sync"));
        }
        Ok(())
    }

    fn draw_atom<R: Rng + ?Sized>(&mut self, base: &BaseMeasure, rng: &mut R) -> Result<AtomValue> {
        if let Some(a) = base.spike_weight() {
            if rng.random::<f64>() < a {
                return Ok(AtomValue::Spike);
            }
        }
        Ok(match base.atom_sampler() {
            AtomSampler::Tag => {
                self.next_slab_id += 1;
                AtomValue::Slab(self.next_slab_id - 1)
            }
            AtomSampler::Normal { mean, sd } => {
                let n = Normal::new(mean, sd).map_err(|e| numerical(e.to_string()))?;
                AtomValue::Real(n.sample(rng))
            }
        })
    }

    /// Seats the next customer of restaurant `i`.
    pub fn seat_next<R: Rng + ?Sized>(
        &mut self,
        h: &HssmSpec,
        i: usize,
        rng: &mut R,
    ) -> Result<Seating> {
        if i >= self.restaurants.len() {
            return Err(size(format!(
                "restaurant {i} out of range (franchise has {})",
                self.restaurants.len()
            )));
        }
        let r = &self.restaurants[i];
        let n = r.table_of_customer.len();
        let k = r.table_sizes.len();
        let f = h.bottom.pred_factors(n, k)?;
        let mut ln_w: Vec<f64> = r.table_sizes.iter().map(|&s| f.ln_old(s)).collect();
        ln_w.push(f.ln_new);
        let c = sample_log_weights(&ln_w, rng).ok_or_else(|| numerical("table weights vanish"))?;

        if c < k {
            let r = &mut self.restaurants[i];
            r.table_of_customer.push(c);
            r.table_sizes[c] += 1;
            return Ok(Seating {
                table: c,
                dish: r.dish_of_table[c],
                new_table: false,
                new_dish: false,
            });
        }

        let d_count = self.tables_per_dish.len();
        let f0 = h.top.pred_factors(self.total_tables, d_count)?;
        ln_w.clear();
        ln_w.extend(self.tables_per_dish.iter().map(|&m| f0.ln_old(m)));
        ln_w.push(f0.ln_new);
        let d = sample_log_weights(&ln_w, rng).ok_or_else(|| numerical("dish weights vanish"))?;
        let new_dish = d == d_count;
        if new_dish {
            let atom = self.draw_atom(&h.base, rng)?;
            self.atoms.push(atom);
            self.tables_per_dish.push(0);
        }
        self.tables_per_dish[d] += 1;
        self.total_tables += 1;
        let r = &mut self.restaurants[i];
        r.table_of_customer.push(c);
        r.table_sizes.push(1);
        r.dish_of_table.push(d);
        if r.tables_per_dish.len() <= d {
            r.tables_per_dish.resize(d + 1, 0);
        }
        r.tables_per_dish[d] += 1;
        Ok(Seating {
            table: c,
            dish: d,
            new_table: true,
            new_dish,
        })
    }
}

/// Simulates a franchise with the given group sizes, filling restaurants in
/// index order.
pub fn simulate<R: Rng + ?Sized>(h: &HssmSpec, g: &GroupSizes, rng: &mut R) -> Result<CrfState> {
    let order: Vec<usize> = (0..g.groups()).collect();
    simulate_in_order(h, g, &order, rng)
}

/// As [`simulate`], filling restaurants in the order given by `order`, a
/// permutation of the restaurant indices.
pub fn simulate_in_order<R: Rng + ?Sized>(
    h: &HssmSpec,
    g: &GroupSizes,
    order: &[usize],
    rng: &mut R,
) -> Result<CrfState> {
    h.validate()?;
    let mut seen = vec![false; g.groups()];
    if order.len() != g.groups()
        || order
            .iter()
            .any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true))
    {
        return Err(size(
            "restaurant order must be a permutation of the group indices",
        ));
    }
    let mut state = CrfState::new(g.groups())?;
    for &i in order {
        for _ in 0..g.sizes()[i] {
            state.seat_next(h, i, rng)?;
        }
    }
    Ok(state)
}

/// Seed of replicate `index` under master seed `seed`.
pub fn replicate_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

/// Histogram of one count over replicates, indexed by the count value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountHistogram {
    pub counts: Vec<u64>,
    pub reps: u64,
}

impl CountHistogram {
    fn new(len: usize) -> Self {
        Self {
            counts: vec![0; len],
            reps: 0,
        }
    }

    fn add(&mut self, k: usize) {
        self.counts[k] += 1;
        self.reps += 1;
    }

    fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.reps += other.reps;
        self
    }

    /// Empirical probabilities, index = count value.
    pub fn frequencies(&self) -> Vec<f64> {
        let r = self.reps.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / r).collect()
    }

    /// Binomial standard errors `√(p(1−p)/reps)` of the frequencies.
    pub fn standard_errors(&self) -> Vec<f64> {
        let r = self.reps.max(1) as f64;
        self.frequencies()
            .iter()
            .map(|p| (p * (1.0 - p) / r).sqrt())
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.frequencies()
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }
}

/// Monte Carlo estimates of the cluster-count laws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCounts {
    /// `D_i` per group.
    pub per_group: Vec<CountHistogram>,
    /// `D`
    pub total: CountHistogram,
    /// Distinct observed values per group (equal to `D_i` for diffuse bases).
    pub per_group_observed: Vec<CountHistogram>,
    /// Distinct observed values in the whole sample.
    pub total_observed: CountHistogram,
    /// Total number of tables `m_{··}`.
    pub tables: CountHistogram,
}

impl EmpiricalCounts {
    fn new(g: &GroupSizes) -> Self {
        let per = |n: usize| CountHistogram::new(n + 1);
        let total = g.total();
        Self {
            per_group: g.sizes().iter().map(|&n| per(n)).collect(),
            total: per(total),
            per_group_observed: g.sizes().iter().map(|&n| per(n)).collect(),
            total_observed: per(total),
            tables: per(total),
        }
    }

    fn record(&mut self, s: &CrfState) {
        for i in 0..s.groups() {
            self.per_group[i].add(s.dishes_in(i));
            self.per_group_observed[i].add(s.distinct_values_in(i));
        }
        self.total.add(s.dishes());
        self.total_observed.add(s.distinct_values_total());
        self.tables.add(s.total_tables());
    }

    fn merge(self, other: &Self) -> Self {
        Self {
            per_group: self
                .per_group
                .into_iter()
                .zip(&other.per_group)
                .map(|(a, b)| a.merge(b))
                .collect(),
            total: self.total.merge(&other.total),
            per_group_observed: self
                .per_group_observed
                .into_iter()
                .zip(&other.per_group_observed)
                .map(|(a, b)| a.merge(b))
                .collect(),
            total_observed: self.total_observed.merge(&other.total_observed),
            tables: self.tables.merge(&other.tables),
        }
    }
}

/// Runs `reps` independent franchises in parallel. Replicate `r` uses a
/// ChaCha8 generator seeded with `seed ^ r`, so the result depends only on
/// `seed` and not on the thread count.
pub fn empirical_cluster_pmf(
    h: &HssmSpec,
    g: &GroupSizes,
    reps: usize,
    seed: u64,
) -> Result<EmpiricalCounts> {
    h.validate()?;
    if reps == 0 {
        return Err(size("at least one replicate is required"));
    }
    let chunk = 1024;
    let n_chunks = reps.div_ceil(chunk);
    let parts: Vec<Result<EmpiricalCounts>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = EmpiricalCounts::new(g);
            for r in c * chunk..((c + 1) * chunk).min(reps) {
                let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(seed, r as u64));
                let s = simulate(h, g, &mut rng)?;
                acc.record(&s);
            }
            Ok(acc)
        })
        .collect();
    let mut out = EmpiricalCounts::new(g);
    for p in parts {
        out = out.merge(&p?);
    }
    Ok(out)
}
