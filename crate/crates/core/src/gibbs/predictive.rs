//! Posterior predictive density of a new observation in a given group.

use super::{Dataset, GibbsTrace, NigHyper, Snapshot, StudentT, SuffStats};
use crate::error::{size, Result};
use crate::prior::HssmSpec;

/// Counts and statistics rebuilt from one snapshot.
#[derive(Debug, Clone)]
pub struct SnapshotView {
    /// Per group, `(table size, dish)` of every table.
    pub tables: Vec<Vec<(usize, usize)>>,
    /// Tables serving each dish across groups.
    pub dish_tables: Vec<usize>,
    pub dish_stats: Vec<SuffStats>,
}

impl SnapshotView {
    pub fn new(snap: &Snapshot, data: &Dataset) -> Result<Self> {
        let n = data.total();
        if snap.tables.len() != n || snap.dish_labels.len() != n {
            return Err(size(format!(
                "snapshot has {} labels, data has {n} observations",
                snap.tables.len()
            )));
        }
        let d = snap.dishes;
        let mut dish_stats = vec![SuffStats::default(); d];
        let mut dish_tables = vec![0usize; d];
        let mut tables = Vec::with_capacity(data.num_groups());
        let mut pos = 0;
        for ys in data.groups() {
            let mut tabs: Vec<(usize, usize)> = Vec::new();
            for &y in ys {
                let t = snap.tables[pos] as usize;
                let dd = snap.dish_labels[pos] as usize;
                pos += 1;
                if dd >= d || t > tabs.len() {
                    return Err(size("snapshot labels are not canonical"));
                }
                if t == tabs.len() {
                    tabs.push((0, dd));
                    dish_tables[dd] += 1;
                } else if tabs[t].1 != dd {
                    return Err(size("customers at one table carry different dishes"));
                }
                tabs[t].0 += 1;
                dish_stats[dd].add(y);
            }
            tables.push(tabs);
        }
        Ok(Self {
            tables,
            dish_tables,
            dish_stats,
        })
    }

    pub fn dishes(&self) -> usize {
        self.dish_tables.len()
    }
}

/// Mixing weights of a new observation in group `i`: one per existing dish,
/// then the new-dish weight. They sum to 1.
pub fn predictive_weights(h: &HssmSpec, view: &SnapshotView, i: usize) -> Result<Vec<f64>> {
    let tabs = view
        .tables
        .get(i)
        .ok_or_else(|| size(format!("group {i} out of range")))?;
    let n_i: usize = tabs.iter().map(|t| t.0).sum();
    let total: usize = view.dish_tables.iter().sum();
    let f = h.bottom.pred_factors(n_i, tabs.len())?;
    let f0 = h.top.pred_factors(total, view.dishes())?;
    let nu = f.ln_new.exp();
    let mut w: Vec<f64> = view
        .dish_tables
        .iter()
        .map(|&m| nu * f0.ln_old(m).exp())
        .collect();
    for &(sz, d) in tabs {
        w[d] += f.ln_old(sz).exp();
    }
    w.push(nu * f0.ln_new.exp());
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / z).collect())
}

/// Predictive density of group `i` on `grid`, averaged over the snapshots.
pub fn predictive_density(
    trace: &GibbsTrace,
    data: &Dataset,
    h: &HssmSpec,
    hyper: &NigHyper,
    i: usize,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if trace.snapshots.is_empty() {
        return Err(size("trace has no snapshots"));
    }
    if i >= data.num_groups() {
        return Err(size(format!("group {i} out of range")));
    }
    let empty = hyper.predictive(&SuffStats::default());
    let mut out = vec![0.0; grid.len()];
    for snap in &trace.snapshots {
        let view = SnapshotView::new(snap, data)?;
        let w = predictive_weights(h, &view, i)?;
        let comps: Vec<(f64, StudentT)> = view
            .dish_stats
            .iter()
            .map(|s| hyper.predictive(s))
            .chain(std::iter::once(empty))
            .zip(&w)
            .map(|(t, &wt)| (wt, t))
            .collect();
        for (o, &y) in out.iter_mut().zip(grid) {
            *o += comps
                .iter()
                .map(|(wt, t)| wt * t.ln_pdf(y).exp())
                .sum::<f64>();
        }
    }
    let m = trace.snapshots.len() as f64;
    out.iter_mut().for_each(|x| *x /= m);
    Ok(out)
}
