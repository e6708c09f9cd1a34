pub mod asymptotic;
pub mod diagnose;
pub mod fit;
pub mod prior;
pub mod simulate;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::io::create_dir;
use crate::Command;

pub fn dispatch(cmd: Command, cfg: &RunConfig) -> CliResult<()> {
    let out = cfg.output_dir();
    create_dir(&out)?;
    match cmd {
        Command::PriorDist => prior::cmd_prior_dist(cfg, &out),
        Command::PriorMoments => prior::cmd_prior_moments(cfg, &out),
        Command::Asymptotic => asymptotic::cmd_asymptotic(cfg, &out),
        Command::SimulateCrf => simulate::cmd_simulate(cfg, &out),
        Command::Fit => fit::cmd_fit(cfg, &out),
        Command::Predict => fit::cmd_predict(cfg, &out),
        Command::Diagnose => diagnose::cmd_diagnose(cfg, &out),
    }
}

/// Space-separated list, used for size vectors in CSV cells.
pub(crate) fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}
