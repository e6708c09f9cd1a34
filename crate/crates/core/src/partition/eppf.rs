//! Gibbs-type exchangeable partition laws: Pitman-Yor, Gnedin and mixtures of
//! finite mixtures.
//!
//! Every family here has an EPPF of product form
//! `Φ(n_1..n_k) = V_{n,k} Π_c (1 − σ)_{n_c − 1}`, so all predictive weights
//! reduce to a per-block factor `(n_c − σ)` times a ratio of `V` weights.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::BlockSizes;
use crate::error::{numerical, param, size, Result};
use crate::special::{ln_gamma, ln_gamma_complex, ln_rising, log_add_exp};

use crate::special::sum_log_series;

/// Relative tolerance used to stop the mixture series for `V_{n,k}`.
pub const SERIES_REL_TOL: f64 = 1e-12;

/// Mixing distribution `ρ_m` on the number of components of a finite mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rho {
    /// `ρ_1, ρ_2, …` listed explicitly (finite support).
    Explicit(Vec<f64>),
    /// The law of the limiting block count of a Gnedin partition.
    Gnedin { gamma: f64, zeta: f64 },
}

/// One exchangeable partition law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Eppf {
    /// Two-parameter family: `0 ≤ σ < 1, θ > −σ`, or `σ < 0, θ = |σ| m`.
    PitmanYor { sigma: f64, theta: f64 },
    /// Gnedin's partition with `γ ≥ 0` and `k² − γk + ζ` positive (or with a
    /// first root at an integer `k₀`).
    Gnedin { gamma: f64, zeta: f64 },
    /// Mixture over `m` of `PY(σ, m|σ|)` with weights `ρ_m`, `σ < 0`.
    Mfm { sigma: f64, rho: Rho },
}

pub use crate::special::SeriesSum;

/// Log-space predictive factors at a state with `n` elements in `k` blocks:
/// `ω_c = (n_c − σ) · exp(ln_old_scale)` and `ν = exp(ln_new)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredFactors {
    pub sigma: f64,
    pub ln_old_scale: f64,
    pub ln_new: f64,
}

impl PredFactors {
    /// `ln ω_c` for a block of size `block_size`.
    #[inline]
    pub fn ln_old(&self, block_size: usize) -> f64 {
        (block_size as f64 - self.sigma).ln() + self.ln_old_scale
    }
}

fn gnedin_quadratic(gamma: f64, zeta: f64, k: f64) -> f64 {
    k * k - gamma * k + zeta
}

/// Checks the Gnedin admissibility condition and returns the integer root
/// `k₀` of `k² − γk + ζ` if there is one.
fn check_gnedin(gamma: f64, zeta: f64) -> Result<Option<usize>> {
    if !gamma.is_finite() || !zeta.is_finite() {
        return Err(param("Gnedin parameters must be finite"));
    }
    if gamma < 0.0 {
        return Err(param(format!("Gnedin requires γ ≥ 0 (got γ = {gamma})")));
    }
    if !(1.0 + gamma + zeta > 0.0) {
        return Err(param(format!(
            "Gnedin requires n² + γn + ζ > 0 for n ≥ 1 (1 + γ + ζ = {})",
            1.0 + gamma + zeta
        )));
    }
    // the quadratic is increasing past its vertex γ/2
    let last = gamma.ceil() as usize + 2;
    for k in 1..=last {
        let kf = k as f64;
        let v = gnedin_quadratic(gamma, zeta, kf);
        let tol = 1e-12 * (kf * kf).max(zeta.abs()).max(1.0);
        if v.abs() <= tol {
            return Ok(Some(k));
        }
        if v < 0.0 {
            return Err(param(format!(
                "Gnedin requires k² − γk + ζ > 0 before its first integer root; \
                 value {v} at k = {k} (γ = {gamma}, ζ = {zeta})"
            )));
        }
    }
    Ok(None)
}

/// `ln ρ_1 = ln Γ(z₁+1)Γ(z₂+1) − ln Γ(γ)` where `x² + γx + ζ = (x+z₁)(x+z₂)`.
fn ln_gnedin_constant(gamma: f64, zeta: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(param(format!(
            "the Gnedin block-count law needs γ > 0 (got γ = {gamma})"
        )));
    }
    let disc = gamma * gamma - 4.0 * zeta;
    let ln_num = if disc < 0.0 {
        // conjugate pair: Γ(z+1)Γ(z̄+1) = |Γ(z+1)|²
        let z = Complex64::new(1.0 + gamma / 2.0, (-disc).sqrt() / 2.0);
        2.0 * ln_gamma_complex(z).re
    } else {
        let r = disc.sqrt();
        let a = 1.0 + (gamma + r) / 2.0;
        let b = 1.0 + (gamma - r) / 2.0;
        if !(b > 0.0) {
            return Err(param(format!(
                "Gnedin constant undefined: Γ argument {b} is not positive"
            )));
        }
        ln_gamma(a) + ln_gamma(b)
    };
    Ok(ln_num - ln_gamma(gamma))
}

/// `ln ρ_m` of the Gnedin block-count law:
/// `ρ_m = Γ(z₁+1)Γ(z₂+1)/Γ(γ) · Π_{l<m}(l² − γl + ζ) / (m!(m−1)!)`.
pub fn ln_gnedin_rho(gamma: f64, zeta: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(size("ρ_m is defined for m ≥ 1"));
    }
    check_gnedin(gamma, zeta)?;
    let mut acc = ln_gnedin_constant(gamma, zeta)?;
    for l in 1..m {
        let v = gnedin_quadratic(gamma, zeta, l as f64);
        if v <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += v.ln();
    }
    let mf = m as f64;
    Ok(acc - ln_gamma(mf + 1.0) - ln_gamma(mf))
}

/// `ρ_m` of the Gnedin block-count law (see [`ln_gnedin_rho`]).
pub fn gnedin_rho(gamma: f64, zeta: f64, m: usize) -> Result<f64> {
    ln_gnedin_rho(gamma, zeta, m).map(f64::exp)
}

impl Eppf {
    pub fn pitman_yor(sigma: f64, theta: f64) -> Result<Self> {
        Self::PitmanYor { sigma, theta }.validated()
    }

    /// Ewens partition, `PY(0, θ)`.
    pub fn dirichlet(theta: f64) -> Result<Self> {
        Self::pitman_yor(0.0, theta)
    }

    pub fn gnedin(gamma: f64, zeta: f64) -> Result<Self> {
        Self::Gnedin { gamma, zeta }.validated()
    }

    pub fn mfm(sigma: f64, rho: Rho) -> Result<Self> {
        Self::Mfm { sigma, rho }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter regime, naming the violated inequality on failure.
    pub fn validate(&self) -> Result<()> {
        match self {
            Eppf::PitmanYor { sigma, theta } => {
                let (s, t) = (*sigma, *theta);
                if !s.is_finite() || !t.is_finite() {
                    return Err(param("Pitman-Yor parameters must be finite"));
                }
                if s >= 1.0 {
                    return Err(param(format!("Pitman-Yor requires σ < 1 (got σ = {s})")));
                }
                if s >= 0.0 {
                    if !(t > -s) {
                        return Err(param(format!(
                            "Pitman-Yor requires θ > −σ (got σ = {s}, θ = {t})"
                        )));
                    }
                } else {
                    implied_components(s, t)?;
                }
                Ok(())
            }
            Eppf::Gnedin { gamma, zeta } => check_gnedin(*gamma, *zeta).map(|_| ()),
            Eppf::Mfm { sigma, rho } => {
                if !(*sigma < 0.0) || !sigma.is_finite() {
                    return Err(param(format!(
                        "mixture of finite mixtures requires σ < 0 (got σ = {sigma})"
                    )));
                }
                match rho {
                    Rho::Explicit(w) => {
                        if w.is_empty() {
                            return Err(param("explicit ρ must list at least ρ_1"));
                        }
                        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                            return Err(param("explicit ρ entries must be finite and ≥ 0"));
                        }
                        let total: f64 = w.iter().sum();
                        if (total - 1.0).abs() > 1e-12 {
                            return Err(param(format!(
                                "explicit ρ must sum to 1 within 1e-12 (sum = {total})"
                            )));
                        }
                        Ok(())
                    }
                    Rho::Gnedin { gamma, zeta } => {
                        check_gnedin(*gamma, *zeta)?;
                        ln_gnedin_constant(*gamma, *zeta).map(|_| ())
                    }
                }
            }
        }
    }

    /// The discount `σ` of the product form (`−1` for Gnedin).
    pub fn sigma(&self) -> f64 {
        match self {
            Eppf::PitmanYor { sigma, .. } | Eppf::Mfm { sigma, .. } => *sigma,
            Eppf::Gnedin { .. } => -1.0,
        }
    }

    /// Almost-sure upper bound on the number of blocks, if finite.
    pub fn max_blocks(&self) -> Option<usize> {
        match self {
            Eppf::PitmanYor { sigma, theta } if *sigma < 0.0 => {
                implied_components(*sigma, *theta).ok()
            }
            Eppf::PitmanYor { .. } => None,
            Eppf::Gnedin { gamma, zeta } => check_gnedin(*gamma, *zeta).ok().flatten(),
            Eppf::Mfm { rho, .. } => match rho {
                Rho::Explicit(w) => w.iter().rposition(|x| *x > 0.0).map(|i| i + 1),
                Rho::Gnedin { gamma, zeta } => check_gnedin(*gamma, *zeta).ok().flatten(),
            },
        }
    }

    /// `ln V_{n,k}`, with `V_{1,1} = 1`. `-inf` when the state is impossible.
    pub fn ln_vnk(&self, n: usize, k: usize) -> Result<f64> {
        if n == 0 || k == 0 || k > n {
            return Err(size(format!(
                "V_{{n,k}} needs 1 ≤ k ≤ n (got n = {n}, k = {k})"
            )));
        }
        Ok(match self {
            Eppf::PitmanYor { sigma, theta } => {
                let mut acc = -ln_rising(theta + 1.0, n - 1);
                for i in 1..k {
                    let f = theta + i as f64 * sigma;
                    if f <= 0.0 {
                        return Ok(f64::NEG_INFINITY);
                    }
                    acc += f.ln();
                }
                acc
            }
            Eppf::Gnedin { gamma, zeta } => gnedin_ln_v(*gamma, *zeta, n, k),
            Eppf::Mfm { .. } => {
                let s = self.mfm_series(n, k)?;
                if s.truncated {
                    log::warn!(
                        "V_{{{n},{k}}} series truncated after {} terms (tail bound {:e} relative)",
                        s.terms,
                        s.tail_bound_rel
                    );
                }
                s.ln_value
            }
        })
    }

    /// `ln V_{n,k}` for `k = 1..=n` (entry `k − 1`). Linear in `n` for the
    /// closed-form families.
    pub fn ln_v_row(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(size("V_{n,k} needs n ≥ 1"));
        }
        match self {
            Eppf::PitmanYor { sigma, theta } => {
                let mut acc = -ln_rising(theta + 1.0, n - 1);
                let mut row = Vec::with_capacity(n);
                for i in 0..n {
                    if i > 0 {
                        let f = theta + i as f64 * sigma;
                        acc = if f <= 0.0 {
                            f64::NEG_INFINITY
                        } else {
                            acc + f.ln()
                        };
                    }
                    row.push(acc);
                }
                Ok(row)
            }
            Eppf::Gnedin { gamma, zeta } => {
                let mut base = 0.0;
                for m in 1..n {
                    let mf = m as f64;
                    base -= (mf * mf + gamma * mf + zeta).ln();
                }
                let mut prod = 0.0;
                let mut row = Vec::with_capacity(n);
                for k in 1..=n {
                    if k > 1 {
                        let v = gnedin_quadratic(*gamma, *zeta, (k - 1) as f64);
                        prod = if v <= 0.0 {
                            f64::NEG_INFINITY
                        } else {
                            prod + v.ln()
                        };
                    }
                    let r = ln_rising(*gamma, n - k);
                    row.push(if r == f64::NEG_INFINITY || prod == f64::NEG_INFINITY {
                        f64::NEG_INFINITY
                    } else {
                        r + prod + base
                    });
                }
                Ok(row)
            }
            Eppf::Mfm { .. } => (1..=n).map(|k| self.ln_vnk(n, k)).collect(),
        }
    }

    /// Sums `|σ|^{k−1} Σ_{m ≥ k} Γ(m)Γ(|σ|m+1) / (Γ(m−k+1)Γ(|σ|m+n)) ρ_m`.
    ///
    /// Infinite series stop once the estimated tail bound falls below
    /// [`SERIES_REL_TOL`] of the partial sum, or after `10 n + 1000` terms.
    pub fn mfm_series(&self, n: usize, k: usize) -> Result<SeriesSum> {
        let (sigma, rho) = match self {
            Eppf::Mfm { sigma, rho } => (*sigma, rho),
            _ => return Err(param("mfm_series applies to the Mfm family only")),
        };
        let a = sigma.abs();
        let (nf, kf) = (n as f64, k as f64);
        let ln_term = |m: usize, ln_rho: f64| {
            let mf = m as f64;
            (kf - 1.0) * a.ln() + ln_gamma(mf) - ln_gamma(mf - kf + 1.0) + ln_gamma(a * mf + 1.0)
                - ln_gamma(a * mf + nf)
                + ln_rho
        };
        match rho {
            Rho::Explicit(w) => {
                let mut acc = f64::NEG_INFINITY;
                for (m, &r) in w.iter().enumerate().map(|(i, r)| (i + 1, r)).skip(k - 1) {
                    if r > 0.0 {
                        acc = log_add_exp(acc, ln_term(m, r.ln()));
                    }
                }
                Ok(SeriesSum {
                    ln_value: acc,
                    terms: w.len().saturating_sub(k - 1),
                    tail_bound_rel: 0.0,
                    truncated: false,
                })
            }
            Rho::Gnedin { gamma, zeta } => {
                let (g, z) = (*gamma, *zeta);
                let mut ln_rho = ln_gnedin_rho(g, z, k)?;
                let mut m = k;
                let s = sum_log_series(k, 10 * n + 1000, SERIES_REL_TOL, || {
                    if ln_rho == f64::NEG_INFINITY {
                        return None;
                    }
                    let t = ln_term(m, ln_rho);
                    let q = gnedin_quadratic(g, z, m as f64);
                    ln_rho = if q <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        ln_rho + q.ln() - (m as f64).ln() - (m as f64 + 1.0).ln()
                    };
                    m += 1;
                    Some(t)
                });
                Ok(s)
            }
        }
    }

    /// Predictive factors at a state with `n` elements in `k` blocks.
    /// An empty state (`n = k = 0`) opens its first block with probability 1.
    pub fn pred_factors(&self, n: usize, k: usize) -> Result<PredFactors> {
        let sigma = self.sigma();
        if n == 0 {
            return Ok(PredFactors {
                sigma,
                ln_old_scale: f64::NEG_INFINITY,
                ln_new: 0.0,
            });
        }
        if k == 0 || k > n {
            return Err(size(format!("invalid partition state n = {n}, k = {k}")));
        }
        let (nf, kf) = (n as f64, k as f64);
        let (ln_old_scale, ln_new) = match self {
            Eppf::PitmanYor { sigma, theta } => {
                let d = (theta + nf).ln();
                let new = theta + kf * sigma;
                (
                    -d,
                    if new > 0.0 {
                        new.ln() - d
                    } else {
                        f64::NEG_INFINITY
                    },
                )
            }
            Eppf::Gnedin { gamma, zeta } => {
                let d = (nf * nf + gamma * nf + zeta).ln();
                let old = nf - kf + gamma;
                let new = gnedin_quadratic(*gamma, *zeta, kf);
                (
                    if old > 0.0 {
                        old.ln() - d
                    } else {
                        f64::NEG_INFINITY
                    },
                    if new > 0.0 {
                        new.ln() - d
                    } else {
                        f64::NEG_INFINITY
                    },
                )
            }
            Eppf::Mfm { .. } => {
                let base = self.ln_vnk(n, k)?;
                if base == f64::NEG_INFINITY {
                    return Err(numerical(format!(
                        "predictive weights undefined: V_{{{n},{k}}} = 0"
                    )));
                }
                (
                    self.ln_vnk(n + 1, k)? - base,
                    self.ln_vnk(n + 1, k + 1)? - base,
                )
            }
        };
        Ok(PredFactors {
            sigma,
            ln_old_scale,
            ln_new,
        })
    }

    /// Predictive weights `(ω_1..ω_k, ν)` for the next element given block sizes.
    pub fn pred_weights(&self, b: &BlockSizes) -> Result<(Vec<f64>, f64)> {
        let f = self.pred_factors(b.n(), b.k())?;
        let omega = b.sizes().iter().map(|&s| f.ln_old(s).exp()).collect();
        Ok((omega, f.ln_new.exp()))
    }

    /// `ln Φ(n_1, …, n_k)`.
    pub fn eppf_log(&self, b: &BlockSizes) -> Result<f64> {
        let v = self.ln_vnk(b.n(), b.k())?;
        let one_minus_sigma = 1.0 - self.sigma();
        let body: f64 = b
            .sizes()
            .iter()
            .map(|&s| ln_rising(one_minus_sigma, s - 1))
            .sum();
        Ok(v + body)
    }
}

/// `m = θ/|σ|` for `PY(σ < 0, θ)`, required to be a positive integer.
fn implied_components(sigma: f64, theta: f64) -> Result<usize> {
    let m = theta / sigma.abs();
    let r = m.round();
    if r >= 1.0 && (m - r).abs() <= 1e-9 * r.max(1.0) {
        Ok(r as usize)
    } else {
        Err(param(format!(
            "Pitman-Yor with σ < 0 requires θ = |σ|·m for a positive integer m \
             (got σ = {sigma}, θ = {theta}, θ/|σ| = {m})"
        )))
    }
}

/// Gnedin weights `V_{n,k} = (γ)_{n−k} Π_{i<k}(i² − γi + ζ) / Π_{m<n}(m² + γm + ζ)`.
pub(crate) fn gnedin_ln_v(gamma: f64, zeta: f64, n: usize, k: usize) -> f64 {
    let mut acc = ln_rising(gamma, n - k);
    if acc == f64::NEG_INFINITY {
        return acc;
    }
    for i in 1..k {
        let v = gnedin_quadratic(gamma, zeta, i as f64);
        if v <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += v.ln();
    }
    for m in 1..n {
        let mf = m as f64;
        acc -= (mf * mf + gamma * mf + zeta).ln();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(v: &[usize]) -> BlockSizes {
        BlockSizes::new(v.to_vec()).unwrap()
    }

    #[test]
    fn v_row_matches_pointwise() {
        let specs = [
            Eppf::pitman_yor(0.25, 2.0).unwrap(),
            Eppf::pitman_yor(-0.5, 2.0).unwrap(),
            Eppf::gnedin(13.5, 140.0).unwrap(),
            Eppf::gnedin(3.0, 2.0).unwrap(),
            Eppf::gnedin(0.0, 1.0).unwrap(),
            Eppf::mfm(-0.7, Rho::Explicit(vec![0.1, 0.2, 0.3, 0.4])).unwrap(),
        ];
        for e in &specs {
            for n in [1, 2, 7, 90] {
                let row = e.ln_v_row(n).unwrap();
                for k in 1..=n {
                    let v = e.ln_vnk(n, k).unwrap();
                    let r = row[k - 1];
                    assert!(
                        v == r || (v - r).abs() < 1e-10 * v.abs().max(1.0),
                        "{e:?} n={n} k={k}: {r} vs {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn validation_examples() {
        assert!(Eppf::pitman_yor(0.0, 1.0).is_ok());
        assert!(Eppf::gnedin(0.0, 1.0).is_ok());
        let e = Eppf::pitman_yor(0.5, -0.7).unwrap_err();
        assert!(e.to_string().contains("θ > −σ"), "{e}");
        assert!(Eppf::pitman_yor(1.0, 1.0).is_err());
        assert!(Eppf::pitman_yor(-0.5, 1.5).is_ok());
        assert_eq!(Eppf::pitman_yor(-0.5, 1.5).unwrap().max_blocks(), Some(3));
        assert!(Eppf::pitman_yor(-0.5, 1.2).is_err());
        assert!(Eppf::gnedin(-1.0, 3.0).is_err());
        // 1 − 5 + 3 < 0 with no earlier root
        assert!(Eppf::gnedin(5.0, 3.0).is_err());
        // root at k0 = 2: 4 − 2γ + ζ = 0 with γ = 3, ζ = 2 (and 1 − 3 + 2 = 0 is a root at 1)
        assert_eq!(Eppf::gnedin(3.0, 2.0).unwrap().max_blocks(), Some(1));
        // root exactly at 2: k² − 5k + 6 = (k−2)(k−3), positive at k = 1
        assert_eq!(Eppf::gnedin(5.0, 6.0).unwrap().max_blocks(), Some(2));
        assert!(Eppf::mfm(-1.0, Rho::Explicit(vec![0.5, 0.5])).is_ok());
        assert!(Eppf::mfm(-1.0, Rho::Explicit(vec![0.5, 0.4])).is_err());
        assert!(Eppf::mfm(0.5, Rho::Explicit(vec![1.0])).is_err());
    }

    #[test]
    fn pitman_yor_weights() {
        let ewens = Eppf::pitman_yor(0.0, 1.0).unwrap();
        let (w, nu) = ewens.pred_weights(&sizes(&[2, 1])).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.25).abs() < 1e-15);
        assert!((nu - 0.25).abs() < 1e-15);

        let py = Eppf::pitman_yor(0.25, 29.9).unwrap();
        let (_, nu) = py.pred_weights(&sizes(&[1, 1])).unwrap();
        assert!((nu - (29.9 + 0.5) / (29.9 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn gnedin_weights() {
        let g = Eppf::gnedin(0.0, 1.0).unwrap();
        let (w, nu) = g.pred_weights(&sizes(&[1])).unwrap();
        assert_eq!(w[0], 0.0);
        assert!((nu - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eppf_closed_forms() {
        let theta = 2.7;
        let ewens = Eppf::dirichlet(theta).unwrap();
        let v = ewens.eppf_log(&sizes(&[1, 1])).unwrap();
        assert!((v - (theta / (theta + 1.0)).ln()).abs() < 1e-14);
        let py = Eppf::pitman_yor(0.5, 1.0).unwrap();
        assert!((py.eppf_log(&sizes(&[2])).unwrap() - 0.25f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn v11_is_one() {
        let specs = [
            Eppf::dirichlet(3.0).unwrap(),
            Eppf::pitman_yor(0.4, 1.0).unwrap(),
            Eppf::pitman_yor(-0.5, 2.0).unwrap(),
            Eppf::gnedin(15.0, 1450.0).unwrap(),
            Eppf::mfm(-1.0, Rho::Explicit(vec![0.2, 0.3, 0.5])).unwrap(),
            Eppf::mfm(
                -0.5,
                Rho::Gnedin {
                    gamma: 15.0,
                    zeta: 1450.0,
                },
            )
            .unwrap(),
        ];
        for s in &specs {
            assert!(s.ln_vnk(1, 1).unwrap().abs() < 1e-9, "{s:?}");
        }
    }

    #[test]
    fn ewens_v_closed_form() {
        // V_{n,k} = θ^k Γ(θ)/Γ(θ+n) · (1/θ) … the EPPF convention is θ^{k−1}/(θ+1)_{n−1}
        let theta = 1.7;
        let e = Eppf::dirichlet(theta).unwrap();
        for n in 1..12 {
            for k in 1..=n {
                let expected =
                    (k as f64) * theta.ln() + ln_gamma(theta) - ln_gamma(theta + n as f64);
                assert!((e.ln_vnk(n, k).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mfm_point_mass_v_finite_sum() {
        // ρ = δ_3, σ = −1, n = k = 2: V = Γ(3)Γ(4)/(Γ(2)Γ(5)) = 2·6/24 = 0.5
        let mfm = Eppf::mfm(-1.0, Rho::Explicit(vec![0.0, 0.0, 1.0])).unwrap();
        assert!((mfm.ln_vnk(2, 2).unwrap() - 0.5f64.ln()).abs() < 1e-14);
        // matches PY(−1, 3)
        let py = Eppf::pitman_yor(-1.0, 3.0).unwrap();
        for n in 1..8 {
            for k in 1..=n {
                let a = mfm.ln_vnk(n, k).unwrap();
                let b = py.ln_vnk(n, k).unwrap();
                if b == f64::NEG_INFINITY {
                    assert_eq!(a, b);
                } else {
                    assert!((a - b).abs() < 1e-12, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn gnedin_rho_ratio_identity() {
        let (g, z) = (3.2, 290.0);
        let mut prev = gnedin_rho(g, z, 1).unwrap();
        for m in 1..=100usize {
            let next = gnedin_rho(g, z, m + 1).unwrap();
            let mf = m as f64;
            let expected = (mf * mf - g * mf + z) / ((mf + 1.0) * mf);
            assert!((next / prev - expected).abs() < 1e-10 * expected, "m={m}");
            prev = next;
        }
    }

    #[test]
    fn gnedin_rho_first_term() {
        // root at k0 = 1 forces all mass on m = 1
        assert!((gnedin_rho(3.0, 2.0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(gnedin_rho(3.0, 2.0, 2).unwrap(), 0.0);
        assert!(gnedin_rho(0.0, 1.0, 1).is_err());
        assert!(gnedin_rho(3.0, 2.0, 0).is_err());
    }
}
