//! `prior-dist` and `prior-moments`.

use std::collections::BTreeMap;
use std::path::Path;

use hssm::prior::{spike_slab_adjust, GroupSizes, HssmSpec, PriorTables};
use hssm::LogPmf;
use rayon::prelude::*;
use serde::Serialize;

use super::join;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{fmt_f64, write_json, CsvOut};

/// Laws of `D_i` (one per distinct group size) and `D` for one size vector,
/// with the laws of the distinct observed values.
#[derive(Debug, Clone)]
pub struct ConfigLaws {
    pub sizes: GroupSizes,
    pub marginals: BTreeMap<usize, (LogPmf, LogPmf)>,
    pub total: (LogPmf, LogPmf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub sizes: Vec<usize>,
    pub group: usize,
    pub n_i: usize,
    pub mean_group: f64,
    pub var_group: f64,
    pub mean_total: f64,
    pub var_total: f64,
    pub mean_group_observed: f64,
    pub var_group_observed: f64,
    pub mean_total_observed: f64,
    pub var_total_observed: f64,
}

/// Size vectors to tabulate: the `[prior]` grid, else `sizes`.
pub fn size_grid(cfg: &RunConfig) -> CliResult<Vec<GroupSizes>> {
    if cfg.prior.is_some() {
        let (groups, ns) = cfg.prior_grid()?;
        ns.into_iter()
            .map(|n| GroupSizes::new(vec![n; groups]).map_err(CliError::from))
            .collect()
    } else if cfg.sizes.is_some() {
        Ok(vec![cfg.sizes()?])
    } else {
        Err(CliError::config("need a [prior] section or `sizes`"))
    }
}

fn with_observed(h: &HssmSpec, p: LogPmf) -> CliResult<(LogPmf, LogPmf)> {
    let obs = match h.base.spike_weight() {
        Some(a) => spike_slab_adjust(&p, a)?,
        None => p.clone(),
    };
    Ok((p, obs))
}

pub fn compute(h: &HssmSpec, grid: &[GroupSizes]) -> CliResult<Vec<ConfigLaws>> {
    let n_bottom = grid.iter().map(GroupSizes::max).max().unwrap_or(1);
    let n_top = grid.iter().map(GroupSizes::total).max().unwrap_or(1);
    log::info!("building count tables up to n = {n_bottom}, m = {n_top}");
    let tables = PriorTables::new(h, n_bottom, n_top)?;
    grid.par_iter()
        .map(|g| {
            let mut marginals = BTreeMap::new();
            for &n in g.sizes() {
                if let std::collections::btree_map::Entry::Vacant(e) = marginals.entry(n) {
                    e.insert(with_observed(h, tables.marginal(n)?)?);
                }
            }
            Ok(ConfigLaws {
                sizes: g.clone(),
                marginals,
                total: with_observed(h, tables.total(g)?)?,
            })
        })
        .collect()
}

pub fn moment_rows(laws: &[ConfigLaws]) -> Vec<MomentRow> {
    let mut rows = Vec::new();
    for l in laws {
        let (t, to) = &l.total;
        for (i, &n) in l.sizes.sizes().iter().enumerate() {
            let (m, mo) = &l.marginals[&n];
            rows.push(MomentRow {
                sizes: l.sizes.sizes().to_vec(),
                group: i + 1,
                n_i: n,
                mean_group: m.mean(),
                var_group: m.variance(),
                mean_total: t.mean(),
                var_total: t.variance(),
                mean_group_observed: mo.mean(),
                var_group_observed: mo.variance(),
                mean_total_observed: to.mean(),
                var_total_observed: to.variance(),
            });
        }
    }
    rows
}

fn write_moments(path: &Path, rows: &[MomentRow]) -> CliResult<()> {
    let mut out = CsvOut::create(
        path,
        &[
            "sizes",
            "group",
            "n_i",
            "mean_group",
            "var_group",
            "mean_total",
            "var_total",
            "mean_group_observed",
            "var_group_observed",
            "mean_total_observed",
            "var_total_observed",
        ],
    )?;
    for r in rows {
        let mut rec = vec![join(&r.sizes), r.group.to_string(), r.n_i.to_string()];
        rec.extend(
            [
                r.mean_group,
                r.var_group,
                r.mean_total,
                r.var_total,
                r.mean_group_observed,
                r.var_group_observed,
                r.mean_total_observed,
                r.var_total_observed,
            ]
            .map(fmt_f64),
        );
        out.row(rec)?;
    }
    out.finish()
}

pub fn cmd_prior_dist(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let h = cfg.model()?;
    let laws = compute(&h, &size_grid(cfg)?)?;

    let mut marg = CsvOut::create(
        &out.join("marginal_pmf.csv"),
        &["n_i", "k", "prob", "observed_prob"],
    )?;
    let mut seen = BTreeMap::new();
    for l in &laws {
        for (&n, pmfs) in &l.marginals {
            seen.entry(n).or_insert(pmfs);
        }
    }
    for (n, (p, po)) in seen {
        for k in 1..=n {
            marg.row([
                n.to_string(),
                k.to_string(),
                fmt_f64(p.prob(k)),
                fmt_f64(po.prob(k)),
            ])?;
        }
    }
    marg.finish()?;

    let mut tot = CsvOut::create(
        &out.join("total_pmf.csv"),
        &["sizes", "k", "prob", "observed_prob"],
    )?;
    for l in &laws {
        let s = join(l.sizes.sizes());
        let (p, po) = &l.total;
        for k in 1..=l.sizes.total() {
            tot.row([
                s.clone(),
                k.to_string(),
                fmt_f64(p.prob(k)),
                fmt_f64(po.prob(k)),
            ])?;
        }
    }
    tot.finish()?;

    write_moments(&out.join("prior_moments.csv"), &moment_rows(&laws))
}

pub fn cmd_prior_moments(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let h = cfg.model()?;
    let rows = moment_rows(&compute(&h, &size_grid(cfg)?)?);
    write_moments(&out.join("prior_moments.csv"), &rows)?;
    write_json(&out.join("prior_moments.json"), &rows)
}
