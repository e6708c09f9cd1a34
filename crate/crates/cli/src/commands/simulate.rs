//! `simulate-crf`: Monte Carlo laws of the cluster counts.

use std::path::Path;

use hssm::crf::{empirical_cluster_pmf, CountHistogram};
use hssm::prior::{spike_slab_adjust, PriorTables};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{fmt_f64, write_json, CsvOut};

#[derive(Debug, Serialize)]
struct StatMean {
    statistic: String,
    simulated: f64,
    exact: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Summary {
    reps: usize,
    seed: u64,
    sizes: Vec<usize>,
    means: Vec<StatMean>,
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let h = cfg.model()?;
    let g = cfg.sizes()?;
    let sim = &cfg.simulate;
    if sim.reps == 0 {
        return Err(CliError::config("simulate.reps must be ≥ 1"));
    }
    log::info!("simulating {} franchises", sim.reps);
    let emp = empirical_cluster_pmf(&h, &g, sim.reps, sim.seed)?;

    let tables = PriorTables::for_groups(&h, &g)?;
    let adjust = |p: hssm::LogPmf| -> CliResult<hssm::LogPmf> {
        Ok(match h.base.spike_weight() {
            Some(a) => spike_slab_adjust(&p, a)?,
            None => p,
        })
    };

    let mut stats: Vec<(String, &CountHistogram, Option<f64>)> = Vec::new();
    for (i, hist) in emp.per_group.iter().enumerate() {
        let exact = tables.marginal(g.sizes()[i])?.mean();
        stats.push((format!("D_{}", i + 1), hist, Some(exact)));
    }
    let total = tables.total(&g)?;
    stats.push(("D".into(), &emp.total, Some(total.mean())));
    for (i, hist) in emp.per_group_observed.iter().enumerate() {
        let exact = adjust(tables.marginal(g.sizes()[i])?)?.mean();
        stats.push((format!("observed_{}", i + 1), hist, Some(exact)));
    }
    stats.push((
        "observed".into(),
        &emp.total_observed,
        Some(adjust(total)?.mean()),
    ));
    stats.push((
        "tables".into(),
        &emp.tables,
        Some(tables.total_tables(&g)?.mean()),
    ));

    let mut csv = CsvOut::create(
        &out.join("crf_counts.csv"),
        &["statistic", "k", "count", "frequency", "std_error"],
    )?;
    for (name, hist, _) in &stats {
        let f = hist.frequencies();
        let se = hist.standard_errors();
        for (k, &c) in hist.counts.iter().enumerate() {
            csv.row([
                name.clone(),
                k.to_string(),
                c.to_string(),
                fmt_f64(f[k]),
                fmt_f64(se[k]),
            ])?;
        }
    }
    csv.finish()?;

    let summary = Summary {
        reps: sim.reps,
        seed: sim.seed,
        sizes: g.sizes().to_vec(),
        means: stats
            .iter()
            .map(|(name, hist, exact)| StatMean {
                statistic: name.clone(),
                simulated: hist.mean(),
                exact: *exact,
            })
            .collect(),
    };
    write_json(&out.join("crf_summary.json"), &summary)
}
