//! Large-sample behaviour of cluster counts.

use serde::{Deserialize, Serialize};

use crate::error::{param, size, Result};
use crate::partition::{ln_gnedin_rho, Eppf};
use crate::pmf::LogPmf;
use crate::prior::{HssmSpec, PriorTables};
use crate::special::{ln_gamma, log_sum_exp, sum_log_series};

/// Term cap for the inner series of [`hgp_limit_pmf`].
pub const LIMIT_SERIES_CAP: usize = 1_000_000;
/// Relative tail tolerance for the inner series of [`hgp_limit_pmf`].
pub const LIMIT_SERIES_TOL: f64 = 1e-13;

/// Hierarchies of Pitman-Yor and Dirichlet partitions with known scaling limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PyFamily {
    /// PY top and PY bottom, both with positive discount.
    Hpyp {
        sigma0: f64,
        theta0: f64,
        sigma1: f64,
        theta1: f64,
    },
    /// PY top with positive discount, Dirichlet bottom.
    Hpydp {
        sigma0: f64,
        theta0: f64,
        theta1: f64,
    },
    /// Dirichlet top, PY bottom with positive discount.
    Hdpyp {
        theta0: f64,
        sigma1: f64,
        theta1: f64,
    },
    Hdp {
        theta0: f64,
        theta1: f64,
    },
}

fn check_positive_py(sigma: f64, theta: f64, level: &str) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(param(format!(
            "{level} discount must satisfy 0 < σ < 1 (got σ = {sigma})"
        )));
    }
    if !(theta > -sigma) {
        return Err(param(format!(
            "{level} requires θ > −σ (got σ = {sigma}, θ = {theta})"
        )));
    }
    Ok(())
}

fn check_dirichlet(theta: f64, level: &str) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(param(format!(
            "{level} Dirichlet requires θ > 0 (got θ = {theta})"
        )))
    }
}

impl PyFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PyFamily::Hpyp {
                sigma0,
                theta0,
                sigma1,
                theta1,
            } => {
                check_positive_py(sigma0, theta0, "top")?;
                check_positive_py(sigma1, theta1, "bottom")
            }
            PyFamily::Hpydp {
                sigma0,
                theta0,
                theta1,
            } => {
                check_positive_py(sigma0, theta0, "top")?;
                check_dirichlet(theta1, "bottom")
            }
            PyFamily::Hdpyp {
                theta0,
                sigma1,
                theta1,
            } => {
                check_dirichlet(theta0, "top")?;
                check_positive_py(sigma1, theta1, "bottom")
            }
            PyFamily::Hdp { theta0, theta1 } => {
                check_dirichlet(theta0, "top")?;
                check_dirichlet(theta1, "bottom")
            }
        }
    }

    /// The hierarchical model with diffuse base.
    pub fn to_spec(&self) -> Result<HssmSpec> {
        self.validate()?;
        let (top, bottom) = match *self {
            PyFamily::Hpyp {
                sigma0,
                theta0,
                sigma1,
                theta1,
            } => (
                Eppf::pitman_yor(sigma0, theta0)?,
                Eppf::pitman_yor(sigma1, theta1)?,
            ),
            PyFamily::Hpydp {
                sigma0,
                theta0,
                theta1,
            } => (Eppf::pitman_yor(sigma0, theta0)?, Eppf::dirichlet(theta1)?),
            PyFamily::Hdpyp {
                theta0,
                sigma1,
                theta1,
            } => (Eppf::dirichlet(theta0)?, Eppf::pitman_yor(sigma1, theta1)?),
            PyFamily::Hdp { theta0, theta1 } => {
                (Eppf::dirichlet(theta0)?, Eppf::dirichlet(theta1)?)
            }
        };
        HssmSpec::diffuse(top, bottom)
    }

    /// Recognizes a diffuse-base hierarchy of PY/Dirichlet partitions.
    pub fn from_spec(h: &HssmSpec) -> Result<Self> {
        let py = |e: &Eppf| match *e {
            Eppf::PitmanYor { sigma, theta } if sigma >= 0.0 => Ok((sigma, theta)),
            _ => Err(param(format!("{e:?} is not a Pitman-Yor law with σ ≥ 0"))),
        };
        let (s0, t0) = py(&h.top)?;
        let (s1, t1) = py(&h.bottom)?;
        let f = match (s0 > 0.0, s1 > 0.0) {
            (true, true) => PyFamily::Hpyp {
                sigma0: s0,
                theta0: t0,
                sigma1: s1,
                theta1: t1,
            },
            (true, false) => PyFamily::Hpydp {
                sigma0: s0,
                theta0: t0,
                theta1: t1,
            },
            (false, true) => PyFamily::Hdpyp {
                theta0: t0,
                sigma1: s1,
                theta1: t1,
            },
            (false, false) => PyFamily::Hdp {
                theta0: t0,
                theta1: t1,
            },
        };
        f.validate()?;
        Ok(f)
    }

    pub fn name(&self) -> &'static str {
        match self {
            PyFamily::Hpyp { .. } => "HPYP",
            PyFamily::Hpydp { .. } => "HPYDP",
            PyFamily::Hdpyp { .. } => "HDPYP",
            PyFamily::Hdp { .. } => "HDP",
        }
    }
}

/// `E[S^p]` for the limit `S` of `|Π_n| / n^σ` under `PY(σ, θ)`:
/// `Γ(θ+1) Γ(p+θ/σ+1) / (Γ(θ/σ+1) Γ(θ+pσ+1))`.
pub fn ml_tilted_moment(sigma: f64, theta: f64, p: f64) -> Result<f64> {
    check_positive_py(sigma, theta, "Mittag-Leffler")?;
    if !(p > 0.0) {
        return Err(param(format!(
            "moment order must be positive (got p = {p})"
        )));
    }
    let ts = theta / sigma;
    Ok((ln_gamma(theta + 1.0) + ln_gamma(p + ts + 1.0)
        - ln_gamma(ts + 1.0)
        - ln_gamma(theta + p * sigma + 1.0))
    .exp())
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        Err(size(format!(
            "asymptotic formulas need n ≥ 3 (got n = {n})"
        )))
    } else {
        Ok(())
    }
}

/// Normalizing sequence `d_n` of the marginal cluster count.
pub fn diversity_scaling(f: &PyFamily, n: usize) -> Result<f64> {
    f.validate()?;
    check_n(n)?;
    let nf = n as f64;
    Ok(match *f {
        PyFamily::Hpyp { sigma0, sigma1, .. } => nf.powf(sigma0 * sigma1),
        PyFamily::Hpydp { sigma0, .. } => nf.ln().powf(sigma0),
        PyFamily::Hdpyp { sigma1, .. } => sigma1 * nf.ln(),
        PyFamily::Hdp { .. } => nf.ln().ln(),
    })
}

/// Large-`n` equivalent of `E[D_i^r]` for a group of size `n`.
pub fn asym_marginal_moment(f: &PyFamily, n: usize, r: f64) -> Result<f64> {
    f.validate()?;
    check_n(n)?;
    if !(r > 0.0) {
        return Err(param(format!(
            "moment order must be positive (got r = {r})"
        )));
    }
    let ln_n = (n as f64).ln();
    Ok(match *f {
        PyFamily::Hpyp {
            sigma0,
            theta0,
            sigma1,
            theta1,
        } => {
            (n as f64).powf(r * sigma0 * sigma1)
                * ml_tilted_moment(sigma0, theta0, r)?
                * ml_tilted_moment(sigma1, theta1, r * sigma0)?
        }
        PyFamily::Hpydp {
            sigma0,
            theta0,
            theta1,
        } => (ln_n * theta1).powf(r * sigma0) * ml_tilted_moment(sigma0, theta0, r)?,
        PyFamily::Hdpyp { theta0, sigma1, .. } => (sigma1 * theta0 * ln_n).powf(r),
        PyFamily::Hdp { theta0, .. } => (theta0 * ln_n.ln()).powf(r),
    })
}

/// One row of an exact-versus-asymptotic comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanComparison {
    pub n: usize,
    pub exact: f64,
    pub asymptotic: f64,
}

/// Exact `E[D_i]` and its asymptotic equivalent for each group size in `ns`.
/// Sizes below 3 have no asymptotic value and are reported as NaN.
pub fn exact_vs_asymptotic(f: &PyFamily, ns: &[usize]) -> Result<Vec<MeanComparison>> {
    let h = f.to_spec()?;
    let n_max = ns
        .iter()
        .copied()
        .max()
        .ok_or_else(|| size("empty size grid"))?;
    let tables = PriorTables::new(&h, n_max, n_max)?;
    ns.iter()
        .map(|&n| {
            let exact = tables.marginal(n)?.mean();
            let asymptotic = if n >= 3 {
                asym_marginal_moment(f, n, 1.0)?
            } else {
                f64::NAN
            };
            Ok(MeanComparison {
                n,
                exact,
                asymptotic,
            })
        })
        .collect()
}

/// A limit law truncated to `1..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitPmf {
    /// Unnormalized log masses `ln P{K = k}`, `k = 1..=k_max`.
    pub raw_log_mass: Vec<f64>,
    /// `1 − Σ_{k ≤ k_max} P{K = k}`: mass beyond `k_max` plus series error.
    pub residual: f64,
    /// True if some inner series hit [`LIMIT_SERIES_CAP`].
    pub truncated: bool,
}

impl LimitPmf {
    /// Partial sums `Σ_{k ≤ j} P{K = k}` for `j = 1..=k_max`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.raw_log_mass
            .iter()
            .scan(0.0, |acc, l| {
                *acc += l.exp();
                Some(*acc)
            })
            .collect()
    }

    /// The truncated law renormalized to total mass 1.
    pub fn normalized(&self) -> Result<LogPmf> {
        LogPmf::from_log_weights(1, self.raw_log_mass.clone())
    }
}

fn finish_limit(raw_log_mass: Vec<f64>, truncated: bool) -> LimitPmf {
    let residual = 1.0 - log_sum_exp(&raw_log_mass).exp();
    LimitPmf {
        raw_log_mass,
        residual,
        truncated,
    }
}

/// Limit law of `D_i` in a hierarchical Gnedin model as `n_i → ∞`:
/// `Σ_{m ≥ k} ρ¹_m q⁰_m(k)` written in closed form.
pub fn hgp_limit_pmf(
    gamma0: f64,
    zeta0: f64,
    gamma1: f64,
    zeta1: f64,
    k_max: usize,
) -> Result<LimitPmf> {
    Eppf::gnedin(gamma0, zeta0)?;
    if k_max == 0 {
        return Err(size("k_max must be ≥ 1"));
    }
    // ln c_{γ₁,ζ₁} = ln ρ¹_1
    let ln_c = ln_gnedin_rho(gamma1, zeta1, 1)?;
    let q0 = |i: f64| i * i - gamma0 * i + zeta0;
    let p0 = |j: f64| j * j + gamma0 * j + zeta0;
    let q1 = |j: f64| j * j - gamma1 * j + zeta1;

    let mut out = Vec::with_capacity(k_max);
    let mut truncated = false;
    // running Σ_{i<k} ln q0(i) and Σ_{j<k} (ln q1(j) − ln p0(j))
    let mut ln_top = 0.0;
    let mut ln_ratio = 0.0;
    for k in 1..=k_max {
        if k > 1 {
            let kf = (k - 1) as f64;
            let (a, b) = (q0(kf), q1(kf));
            ln_top = if a > 0.0 {
                ln_top + a.ln()
            } else {
                f64::NEG_INFINITY
            };
            ln_ratio = if b > 0.0 {
                ln_ratio + b.ln() - p0(kf).ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        if ln_top == f64::NEG_INFINITY || ln_ratio == f64::NEG_INFINITY {
            out.push(f64::NEG_INFINITY);
            continue;
        }
        // inner terms (γ₀)_{m−k}/(m−k)! Π_{j<m} q1(j)/p0(j), m ≥ k
        let mut m = k;
        let mut ln_t = ln_ratio;
        let s = sum_log_series(k, LIMIT_SERIES_CAP, LIMIT_SERIES_TOL, || {
            if ln_t == f64::NEG_INFINITY {
                return None;
            }
            let cur = ln_t;
            let (mf, d) = (m as f64, (m - k) as f64);
            let (num, b) = (gamma0 + d, q1(mf));
            ln_t = if num > 0.0 && b > 0.0 {
                ln_t + num.ln() - (d + 1.0).ln() + b.ln() - p0(mf).ln()
            } else {
                f64::NEG_INFINITY
            };
            m += 1;
            Some(cur)
        });
        truncated |= s.truncated;
        let kf = k as f64;
        out.push(ln_c + ln_top + s.ln_value - ln_gamma(kf + 1.0) - ln_gamma(kf));
    }
    Ok(finish_limit(out, truncated))
}

/// Limit law of `D_i` (and of `D`) under a PY top and Gnedin bottom: the
/// Gnedin weights `ρ_m`, `m = 1..=k_max`.
pub fn hpygp_limit_pmf(gamma1: f64, zeta1: f64, k_max: usize) -> Result<LimitPmf> {
    if k_max == 0 {
        return Err(size("k_max must be ≥ 1"));
    }
    let mut out = Vec::with_capacity(k_max);
    let mut ln_rho = ln_gnedin_rho(gamma1, zeta1, 1)?;
    for m in 1..=k_max {
        out.push(ln_rho);
        let mf = m as f64;
        let q = mf * mf - gamma1 * mf + zeta1;
        ln_rho = if q > 0.0 && ln_rho > f64::NEG_INFINITY {
            ln_rho + q.ln() - mf.ln() - (mf + 1.0).ln()
        } else {
            f64::NEG_INFINITY
        };
    }
    Ok(finish_limit(out, false))
}
