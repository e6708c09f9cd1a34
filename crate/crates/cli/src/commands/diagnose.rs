//! `diagnose`: metrics of one saved trace, or aggregated over repeated runs
//! on freshly generated synthetic data.

use std::path::Path;

use hssm::crf::replicate_seed;
use hssm::diagnostics::{
    cluster_count_summary, cn_error, cn_star, coclustering, predictive_score, ClusterCountSummary,
};
use hssm::gibbs::{predictive_density, run_chain, Init, Likelihood, NigHyper, Preset, SweepPlan};
use hssm::prior::HssmSpec;
use rayon::prelude::*;
use serde::Serialize;

use super::fit::linspace;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{fmt_f64, read_trace, read_truth, write_json, CsvOut};

/// Metrics of one fitted chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub run: usize,
    pub data_seed: u64,
    pub chain_seed: u64,
    pub clusters: ClusterCountSummary,
    pub cn: f64,
    pub cn_star: f64,
    pub score: Option<f64>,
}

/// Settings shared by the runs of a batch.
#[derive(Debug, Clone)]
pub struct Batch {
    pub model: HssmSpec,
    pub hyper: NigHyper,
    pub plan: SweepPlan,
    pub init: Init,
    pub preset: Preset,
    pub data_seed: u64,
    pub chain_seed: u64,
    /// Grid for the predictive score; `None` skips it.
    pub score_grid: Option<Vec<f64>>,
}

/// Default score grid, wide enough for both presets.
pub fn default_score_grid() -> Vec<f64> {
    linspace(-12.0, 12.0, 241)
}

impl Batch {
    /// Run `r`: data seed `data_seed ⊕ r`, chain seed `chain_seed ⊕ r`.
    pub fn run_one(&self, r: usize) -> CliResult<RunMetrics> {
        let data_seed = replicate_seed(self.data_seed, r as u64);
        let chain_seed = replicate_seed(self.chain_seed, r as u64);
        let s = self.preset.generate(data_seed)?;
        let trace = run_chain(
            &s.data,
            &self.model,
            Likelihood::Nig(self.hyper),
            self.plan,
            self.init,
            chain_seed,
        )?;
        let p = coclustering(&trace)?;
        let score = match &self.score_grid {
            Some(grid) => {
                let g = s.data.num_groups();
                let pred = (0..g)
                    .map(|i| predictive_density(&trace, &s.data, &self.model, &self.hyper, i, grid))
                    .collect::<Result<Vec<_>, _>>()?;
                let truth: Vec<Vec<f64>> = s
                    .mixtures
                    .iter()
                    .map(|m| grid.iter().map(|&y| m.density(y)).collect())
                    .collect();
                Some(predictive_score(&vec![grid.clone(); g], &pred, &truth)?)
            }
            None => None,
        };
        Ok(RunMetrics {
            run: r,
            data_seed,
            chain_seed,
            clusters: cluster_count_summary(&trace)?,
            cn: cn_error(&p, &s.truth)?,
            cn_star: cn_star(&p, &s.truth)?,
            score,
        })
    }

    pub fn run(&self, runs: usize) -> CliResult<Vec<RunMetrics>> {
        (0..runs).into_par_iter().map(|r| self.run_one(r)).collect()
    }
}

/// Sample mean and standard deviation (denominator `n − 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

pub fn mean_sd(xs: &[f64]) -> MeanSd {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanSd { mean, sd }
}

#[derive(Debug, Serialize)]
struct BatchSummary {
    runs: usize,
    median_clusters: MeanSd,
    variance_clusters: MeanSd,
    cn: MeanSd,
    cn_star: MeanSd,
    score: Option<MeanSd>,
}

#[derive(Debug, Serialize)]
struct TraceSummary {
    clusters: ClusterCountSummary,
    cn: f64,
    cn_star: f64,
}

pub fn cmd_diagnose(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let d = cfg
        .diagnose
        .as_ref()
        .ok_or_else(|| CliError::config("missing section [diagnose]"))?;
    if let Some(trace) = &d.trace {
        let truth_path = d
            .truth
            .as_ref()
            .ok_or_else(|| CliError::config("diagnose.trace requires diagnose.truth"))?;
        let truth = read_truth(&cfg.resolve(truth_path))?;
        let t = read_trace(&cfg.resolve(trace), vec![])?;
        let p = coclustering(&t)?;
        let summary = TraceSummary {
            clusters: cluster_count_summary(&t)?,
            cn: cn_error(&p, &truth)?,
            cn_star: cn_star(&p, &truth)?,
        };
        return write_json(&out.join("diagnose_summary.json"), &summary);
    }

    let data = cfg
        .data
        .as_ref()
        .ok_or_else(|| CliError::config("missing section [data]"))?;
    let preset = data
        .preset
        .ok_or_else(|| CliError::config("repeated runs need data.preset"))?;
    if d.runs == 0 {
        return Err(CliError::config("diagnose.runs must be ≥ 1"));
    }
    let score_grid = if d.score {
        Some(match cfg.predict.as_ref().and_then(|p| p.grid) {
            Some((lo, hi, points)) if lo < hi && points >= 2 => linspace(lo, hi, points),
            Some(_) => {
                return Err(CliError::config(
                    "predict.grid must be [lo < hi, points ≥ 2]",
                ))
            }
            None => default_score_grid(),
        })
    } else {
        None
    };
    let batch = Batch {
        model: cfg.model()?,
        hyper: cfg.hyper()?,
        plan: cfg.plan()?,
        init: cfg.sampler.init,
        preset,
        data_seed: data.seed,
        chain_seed: cfg.sampler.seed,
        score_grid,
    };
    log::info!("diagnosing {} runs", d.runs);
    let runs = batch.run(d.runs)?;

    let mut csv = CsvOut::create(
        &out.join("runs.csv"),
        &[
            "run",
            "data_seed",
            "chain_seed",
            "median",
            "mean",
            "variance",
            "cn",
            "cn_star",
            "score",
        ],
    )?;
    for r in &runs {
        csv.row([
            r.run.to_string(),
            r.data_seed.to_string(),
            r.chain_seed.to_string(),
            r.clusters.median.to_string(),
            fmt_f64(r.clusters.mean),
            fmt_f64(r.clusters.variance),
            fmt_f64(r.cn),
            fmt_f64(r.cn_star),
            r.score.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    csv.finish()?;

    let col = |f: &dyn Fn(&RunMetrics) -> f64| mean_sd(&runs.iter().map(f).collect::<Vec<_>>());
    let summary = BatchSummary {
        runs: runs.len(),
        median_clusters: col(&|r| r.clusters.median as f64),
        variance_clusters: col(&|r| r.clusters.variance),
        cn: col(&|r| r.cn),
        cn_star: col(&|r| r.cn_star),
        score: batch
            .score_grid
            .as_ref()
            .map(|_| col(&|r| r.score.unwrap_or(f64::NAN))),
    };
    write_json(&out.join("diagnose_summary.json"), &summary)
}
