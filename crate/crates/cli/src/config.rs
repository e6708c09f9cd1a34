//! Run configuration read from a TOML file. See `docs/config.md`.

use std::path::{Path, PathBuf};

use hssm::asymptotics::PyFamily;
use hssm::gibbs::{Init, NigHyper, Preset, SweepPlan};
use hssm::prior::{GroupSizes, HssmSpec};
use serde::Deserialize;

use crate::error::{at, CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<HssmSpec>,
    /// Group sizes `n_i`.
    pub sizes: Option<Vec<usize>>,
    pub prior: Option<PriorSection>,
    pub asymptotic: Option<AsymptoticSection>,
    #[serde(default)]
    pub simulate: SimulateSection,
    pub data: Option<DataSection>,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub hyper: NigHyper,
    pub predict: Option<PredictSection>,
    pub diagnose: Option<DiagnoseSection>,
    /// Output directory, overridden by `--out`.
    pub output: Option<PathBuf>,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    #[serde(default = "two")]
    pub groups: usize,
    /// Explicit list of group sizes.
    #[serde(default)]
    pub n: Vec<usize>,
    /// `[start, stop, step]`, stop inclusive.
    pub range: Option<[usize; 3]>,
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticSection {
    pub families: Vec<PyFamily>,
    #[serde(default = "one_usize")]
    pub n_min: usize,
    #[serde(default = "five_hundred")]
    pub n_max: usize,
}

fn one_usize() -> usize {
    1
}

fn five_hundred() -> usize {
    500
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub reps: usize,
    pub seed: u64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            reps: 100_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// CSV with header `group_id,y`.
    pub path: Option<PathBuf>,
    pub preset: Option<Preset>,
    /// Seed of the synthetic data generator.
    #[serde(default = "data_seed")]
    pub seed: u64,
}

fn data_seed() -> u64 {
    7
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub chains: usize,
    pub init: Init,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            sweeps: 6000,
            burn_in: 1000,
            thin: 1,
            seed: 1,
            chains: 1,
            init: Init::Sequential,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictSection {
    /// `[start, stop, points]`.
    pub grid: Option<(f64, f64, usize)>,
    /// Trace files written by `fit`.
    #[serde(default)]
    pub traces: Vec<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSection {
    /// Number of independent datasets, each fitted once.
    #[serde(default = "fifty")]
    pub runs: usize,
    /// Existing trace to score instead of repeated runs.
    pub trace: Option<PathBuf>,
    /// CSV with header `cluster`, one true label per observation.
    pub truth: Option<PathBuf>,
    /// Whether repeated runs also compute the predictive score.
    #[serde(default = "yes")]
    pub score: bool,
}

fn yes() -> bool {
    true
}

fn fifty() -> usize {
    50
}

/// Flags that override config values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub chains: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path, o: &Overrides) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if let Some(s) = o.seed {
            cfg.sampler.seed = s;
            cfg.simulate.seed = s;
        }
        if let Some(c) = o.chains {
            cfg.sampler.chains = c;
        }
        if let Some(out) = &o.out {
            cfg.output = Some(out.clone());
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string().trim_end().to_string()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn model(&self) -> CliResult<HssmSpec> {
        let h = self
            .model
            .clone()
            .ok_or_else(|| CliError::config("missing section [model]"))?;
        at("model.top", h.top.validate())?;
        at("model.bottom", h.bottom.validate())?;
        at("model.base", h.base.validate())?;
        Ok(h)
    }

    pub fn sizes(&self) -> CliResult<GroupSizes> {
        let s = self
            .sizes
            .clone()
            .ok_or_else(|| CliError::config("missing key `sizes`"))?;
        at("sizes", GroupSizes::new(s))
    }

    pub fn plan(&self) -> CliResult<SweepPlan> {
        let s = &self.sampler;
        let p = SweepPlan {
            sweeps: s.sweeps,
            burn_in: s.burn_in,
            thin: s.thin,
        };
        at("sampler", p.validate())?;
        if s.chains == 0 {
            return Err(CliError::config("sampler.chains must be ≥ 1"));
        }
        Ok(p)
    }

    pub fn hyper(&self) -> CliResult<NigHyper> {
        at("hyper", self.hyper.validate())?;
        Ok(self.hyper)
    }

    /// Group sizes of the `prior` grid.
    pub fn prior_grid(&self) -> CliResult<(usize, Vec<usize>)> {
        let p = self
            .prior
            .as_ref()
            .ok_or_else(|| CliError::config("missing section [prior]"))?;
        if p.groups == 0 {
            return Err(CliError::config("prior.groups must be ≥ 1"));
        }
        let mut ns = p.n.clone();
        if let Some([start, stop, step]) = p.range {
            if step == 0 || start == 0 || stop < start {
                return Err(CliError::config(
                    "prior.range must be [start ≥ 1, stop ≥ start, step ≥ 1]",
                ));
            }
            ns.extend((start..=stop).step_by(step));
        }
        if ns.is_empty() || ns.contains(&0) {
            return Err(CliError::config(
                "prior needs positive sizes in `n` or `range`",
            ));
        }
        ns.sort_unstable();
        ns.dedup();
        Ok((p.groups, ns))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_example_parses() {
        let cfg = RunConfig::parse(
            r#"
            sizes = [50, 50]
            output = "res"

            [model.top]
            family = "pitman-yor"
            sigma = 0.25
            theta = 29.9

            [model.bottom]
            family = "gnedin"
            gamma = 15.0
            zeta = 1450.0

            [model.base]
            kind = "spike-slab"
            a = 0.3

            [model.base.atoms]
            sampler = "normal"
            mean = 0.0
            sd = 2.0

            [prior]
            range = [2, 10, 2]

            [sampler]
            sweeps = 100
            burn_in = 10

            [hyper]
            s2 = 5.0

            [data]
            preset = "three-groups"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.sampler.sweeps, 100);
        assert_eq!(cfg.sampler.thin, 1);
        assert_eq!(cfg.hyper.s2, 5.0);
        assert_eq!(cfg.hyper.a, 2.0);
        assert_eq!(cfg.prior_grid().unwrap(), (2, vec![2, 4, 6, 8, 10]));
        cfg.model().unwrap();
        assert_eq!(cfg.data.unwrap().preset, Some(Preset::ThreeGroups));
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::parse("[sampler]\nsweeps = 10\nburnin = 3\n").unwrap_err();
        assert!(e.to_string().contains("burnin"), "{e}");
        let cfg = RunConfig::parse("[model.top]\nfamily = \"pitman-yor\"\nsigma = 1.5\ntheta = 1.0\n[model.bottom]\nfamily = \"pitman-yor\"\nsigma = 0.0\ntheta = 1.0\n").unwrap();
        let e = cfg.model().unwrap_err();
        assert!(e.to_string().contains("model.top"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let e = RunConfig::parse("").unwrap().model().unwrap_err();
        assert!(e.to_string().contains("[model]"));
    }
}
