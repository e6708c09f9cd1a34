//! Hierarchical species sampling models.
//!
//! Exact and asymptotic prior laws of cluster counts for hierarchical
//! Pitman-Yor, Gnedin and mixture-of-finite-mixture partitions, a Chinese
//! restaurant franchise simulator, and a collapsed Gibbs sampler for Gaussian
//! mixtures with clustering diagnostics.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod crf;
pub mod diagnostics;
pub mod error;
pub mod gibbs;
pub mod partition;
pub mod pmf;
pub mod prior;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
pub use partition::{BlockSizes, Eppf, PartitionState, Rho};
pub use pmf::LogPmf;
