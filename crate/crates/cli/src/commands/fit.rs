//! `fit` and `predict`.

use std::path::{Path, PathBuf};

use hssm::crf::replicate_seed;
use hssm::diagnostics::{
    cluster_count_summary, cn_error, cn_star, coclustering, predictive_score, ClusterCountSummary,
};
use hssm::gibbs::{predictive_density, run_chain, GibbsTrace, GroupMixture, Likelihood};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{
    fmt_f64, read_data, read_trace, write_data, write_json, write_trace, write_truth, CsvOut,
    GroupedData,
};

/// Observations, with the ground truth when they come from a preset.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub data: GroupedData,
    pub truth: Option<(Vec<usize>, Vec<GroupMixture>)>,
}

pub fn load_data(cfg: &RunConfig) -> CliResult<Loaded> {
    let d = cfg
        .data
        .as_ref()
        .ok_or_else(|| CliError::config("missing section [data]"))?;
    match (&d.path, d.preset) {
        (Some(p), None) => Ok(Loaded {
            data: read_data(&cfg.resolve(p))?,
            truth: None,
        }),
        (None, Some(preset)) => {
            let s = preset.generate(d.seed)?;
            let ids = (1..=s.data.num_groups() as i64).collect();
            Ok(Loaded {
                data: GroupedData { ids, data: s.data },
                truth: Some((s.truth, s.mixtures)),
            })
        }
        _ => Err(CliError::config(
            "data needs exactly one of `path` and `preset`",
        )),
    }
}

fn chain_path(out: &Path, c: usize) -> PathBuf {
    out.join(format!("trace_chain{c}.csv"))
}

/// Concatenates the snapshots of several chains.
pub fn pool(traces: &[GibbsTrace]) -> CliResult<GibbsTrace> {
    let first = traces
        .first()
        .ok_or_else(|| CliError::config("no traces"))?;
    Ok(GibbsTrace {
        plan: first.plan,
        group_sizes: first.group_sizes.clone(),
        snapshots: traces
            .iter()
            .flat_map(|t| t.snapshots.iter().cloned())
            .collect(),
    })
}

#[derive(Debug, Serialize)]
struct ChainSummary {
    chain: usize,
    seed: u64,
    clusters: ClusterCountSummary,
}

#[derive(Debug, Serialize)]
struct FitSummary {
    observations: usize,
    group_sizes: Vec<usize>,
    chains: Vec<ChainSummary>,
    pooled: ClusterCountSummary,
    cn: Option<f64>,
    cn_star: Option<f64>,
}

pub fn cmd_fit(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let h = cfg.model()?;
    let hyper = cfg.hyper()?;
    let plan = cfg.plan()?;
    let loaded = load_data(cfg)?;
    let data = &loaded.data.data;
    let s = &cfg.sampler;
    log::info!(
        "running {} chain(s) of {} sweeps on {} observations",
        s.chains,
        s.sweeps,
        data.total()
    );
    let seeds: Vec<u64> = (0..s.chains)
        .map(|c| replicate_seed(s.seed, c as u64))
        .collect();
    let traces: Vec<GibbsTrace> = seeds
        .par_iter()
        .map(|&seed| run_chain(data, &h, Likelihood::Nig(hyper), plan, s.init, seed))
        .collect::<Result<_, _>>()?;

    for (c, t) in traces.iter().enumerate() {
        write_trace(&chain_path(out, c), t)?;
    }
    if let Some((truth, _)) = &loaded.truth {
        write_data(&out.join("data.csv"), &loaded.data)?;
        write_truth(&out.join("truth.csv"), truth)?;
    }

    let pooled = pool(&traces)?;
    let p = coclustering(&pooled)?;
    let n = p.n();
    let mut csv = CsvOut::create(&out.join("coclustering.csv"), &["row", "col", "value"])?;
    for l in 0..n {
        for k in 0..n {
            csv.row([l.to_string(), k.to_string(), fmt_f64(p.get(l, k))])?;
        }
    }
    csv.finish()?;

    let (cn, cs) = match &loaded.truth {
        Some((truth, _)) => (Some(cn_error(&p, truth)?), Some(cn_star(&p, truth)?)),
        None => (None, None),
    };
    let summary = FitSummary {
        observations: data.total(),
        group_sizes: data.sizes(),
        chains: traces
            .iter()
            .zip(&seeds)
            .enumerate()
            .map(|(chain, (t, &seed))| {
                Ok(ChainSummary {
                    chain,
                    seed,
                    clusters: cluster_count_summary(t)?,
                })
            })
            .collect::<CliResult<_>>()?,
        pooled: cluster_count_summary(&pooled)?,
        cn,
        cn_star: cs,
    };
    write_json(&out.join("fit_summary.json"), &summary)
}

/// `points` equally spaced values from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let d = (points - 1) as f64;
    (0..points)
        .map(|k| (lo * (d - k as f64) + hi * k as f64) / d)
        .collect()
}

fn grid_for(cfg: &RunConfig, d: &GroupedData) -> CliResult<Vec<f64>> {
    match cfg.predict.as_ref().and_then(|p| p.grid) {
        Some((lo, hi, points)) => {
            if !(lo < hi) || points < 2 {
                return Err(CliError::config(
                    "predict.grid must be [lo < hi, points ≥ 2]",
                ));
            }
            Ok(linspace(lo, hi, points))
        }
        None => {
            let ys = d.data.flat();
            let lo = ys.iter().copied().fold(f64::INFINITY, f64::min).floor() - 3.0;
            let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil() + 3.0;
            Ok(linspace(lo, hi, 301))
        }
    }
}

#[derive(Debug, Serialize)]
struct PredictSummary {
    snapshots: usize,
    grid_points: usize,
    score: Option<f64>,
}

pub fn cmd_predict(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let h = cfg.model()?;
    let hyper = cfg.hyper()?;
    let loaded = load_data(cfg)?;
    let data = &loaded.data.data;
    let paths: Vec<PathBuf> = match cfg.predict.as_ref().filter(|p| !p.traces.is_empty()) {
        Some(p) => p.traces.iter().map(|t| cfg.resolve(t)).collect(),
        None => (0..cfg.sampler.chains)
            .map(|c| chain_path(out, c))
            .collect(),
    };
    let traces: Vec<GibbsTrace> = paths
        .iter()
        .map(|p| read_trace(p, data.sizes()))
        .collect::<CliResult<_>>()?;
    let trace = pool(&traces)?;
    let grid = grid_for(cfg, &loaded.data)?;

    let dens: Vec<Vec<f64>> = (0..data.num_groups())
        .into_par_iter()
        .map(|i| predictive_density(&trace, data, &h, &hyper, i, &grid))
        .collect::<Result<_, _>>()?;
    let truth: Option<Vec<Vec<f64>>> = loaded.truth.as_ref().map(|(_, mix)| {
        mix.iter()
            .map(|m| grid.iter().map(|&y| m.density(y)).collect())
            .collect()
    });

    for (i, id) in loaded.data.ids.iter().enumerate() {
        let mut header = vec!["y", "density"];
        if truth.is_some() {
            header.push("true_density");
        }
        let mut csv = CsvOut::create(&out.join(format!("predictive_group{id}.csv")), &header)?;
        for (k, &y) in grid.iter().enumerate() {
            let mut rec = vec![fmt_f64(y), fmt_f64(dens[i][k])];
            if let Some(t) = &truth {
                rec.push(fmt_f64(t[i][k]));
            }
            csv.row(rec)?;
        }
        csv.finish()?;
    }

    let grids = vec![grid.clone(); data.num_groups()];
    let score = match &truth {
        Some(t) => Some(predictive_score(&grids, &dens, t)?),
        None => None,
    };
    write_json(
        &out.join("predict_summary.json"),
        &PredictSummary {
            snapshots: trace.snapshots.len(),
            grid_points: grid.len(),
            score,
        },
    )
}
