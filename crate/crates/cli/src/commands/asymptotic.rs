//! `asymptotic`: exact against asymptotic `E[D_i]`.

use std::path::Path;

use hssm::asymptotics::exact_vs_asymptotic;

use crate::config::RunConfig;
use crate::error::{at, CliError, CliResult};
use crate::io::{fmt_f64, CsvOut};

pub fn cmd_asymptotic(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let a = cfg
        .asymptotic
        .as_ref()
        .ok_or_else(|| CliError::config("missing section [asymptotic]"))?;
    if a.families.is_empty() {
        return Err(CliError::config("asymptotic.families is empty"));
    }
    if a.n_min == 0 || a.n_max < a.n_min {
        return Err(CliError::config("asymptotic needs 1 ≤ n_min ≤ n_max"));
    }
    let ns: Vec<usize> = (a.n_min..=a.n_max).collect();
    let mut csv = CsvOut::create(
        &out.join("asymptotic.csv"),
        &[
            "family_index",
            "family",
            "n",
            "exact",
            "asymptotic",
            "ratio",
        ],
    )?;
    for (idx, f) in a.families.iter().enumerate() {
        let key = format!("asymptotic.families[{idx}]");
        at(&key, f.validate())?;
        for r in at(&key, exact_vs_asymptotic(f, &ns))? {
            csv.row([
                idx.to_string(),
                f.name().to_string(),
                r.n.to_string(),
                fmt_f64(r.exact),
                fmt_f64(r.asymptotic),
                fmt_f64(r.exact / r.asymptotic),
            ])?;
        }
    }
    csv.finish()
}
