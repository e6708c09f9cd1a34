//! Normal likelihood with a Normal-Inverse-Gamma prior on `(μ, σ²)`:
//! `μ | σ² ~ N(m0, s2·σ²)`, `σ² ~ IG(a, b)`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{numerical, param, Result};
use crate::special::ln_gamma;

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Count, sum and sum of squares of the observations in a cluster.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SuffStats {
    pub n: usize,
    pub sum: f64,
    pub sumsq: f64,
}

impl SuffStats {
    pub fn from_slice(ys: &[f64]) -> Self {
        let mut s = Self::default();
        for &y in ys {
            s.add(y);
        }
        s
    }

    #[inline]
    pub fn add(&mut self, y: f64) {
        self.n += 1;
        self.sum += y;
        self.sumsq += y * y;
    }

    #[inline]
    pub fn remove(&mut self, y: f64) {
        debug_assert!(self.n > 0);
        self.n -= 1;
        if self.n == 0 {
            // drop accumulated rounding
            *self = Self::default();
        } else {
            self.sum -= y;
            self.sumsq -= y * y;
        }
    }

    pub fn merge(&mut self, other: &SuffStats) {
        self.n += other.n;
        self.sum += other.sum;
        self.sumsq += other.sumsq;
    }

    pub fn unmerge(&mut self, other: &SuffStats) {
        debug_assert!(self.n >= other.n);
        self.n -= other.n;
        if self.n == 0 {
            *self = Self::default();
        } else {
            self.sum -= other.sum;
            self.sumsq -= other.sumsq;
        }
    }

    pub fn merged(&self, other: &SuffStats) -> Self {
        let mut s = *self;
        s.merge(other);
        s
    }

    /// `Σ (y − ȳ)²`, clamped at zero.
    fn centered_ss(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.sumsq - self.sum * self.sum / self.n as f64).max(0.0)
        }
    }
}

/// Hyperparameters of the Normal-Inverse-Gamma prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NigHyper {
    pub m0: f64,
    /// Prior variance of `μ` relative to `σ²`.
    pub s2: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for NigHyper {
    fn default() -> Self {
        Self {
            m0: 0.0,
            s2: 10.0,
            a: 2.0,
            b: 1.0,
        }
    }
}

/// Posterior parameters `(m_n, V_n, a_n, b_n)`: `μ | σ² ~ N(m_n, V_n σ²)`, `σ² ~ IG(a_n, b_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigPosterior {
    pub mean: f64,
    pub v: f64,
    pub a: f64,
    pub b: f64,
}

/// Location-scale Student-t with `df` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    pub loc: f64,
    pub scale: f64,
    pub df: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(loc: f64, scale: f64, df: f64) -> Self {
        let ln_norm =
            ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df.ln() + LN_PI) - scale.ln();
        Self {
            loc,
            scale,
            df,
            ln_norm,
        }
    }

    #[inline]
    pub fn ln_pdf(&self, y: f64) -> f64 {
        let z = (y - self.loc) / self.scale;
        self.ln_norm - 0.5 * (self.df + 1.0) * (z * z / self.df).ln_1p()
    }
}

impl NigHyper {
    pub fn validate(&self) -> Result<()> {
        if !self.m0.is_finite() {
            return Err(param("m0 must be finite"));
        }
        for (name, v) in [("s2", self.s2), ("a", self.a), ("b", self.b)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(param(format!("{name} must be finite and > 0 (got {v})")));
            }
        }
        Ok(())
    }

    pub fn posterior(&self, s: &SuffStats) -> NigPosterior {
        let n = s.n as f64;
        let v = self.s2 / (1.0 + n * self.s2);
        let mean = v * (self.m0 / self.s2 + s.sum);
        let b = if s.n == 0 {
            self.b
        } else {
            let ybar = s.sum / n;
            let d = ybar - self.m0;
            self.b + 0.5 * (s.centered_ss() + n / (1.0 + n * self.s2) * d * d)
        };
        NigPosterior {
            mean,
            v,
            a: self.a + 0.5 * n,
            b,
        }
    }

    /// `ln ∫ Π N(y | μ, σ²) dNIG(μ, σ²)` for the observations summarized by `s`.
    pub fn log_marginal(&self, s: &SuffStats) -> Result<f64> {
        if s.n == 0 {
            return Ok(0.0);
        }
        let p = self.posterior(s);
        if !(p.b > 0.0) || !(p.v > 0.0) {
            return Err(numerical(format!(
                "nonpositive posterior scale (b_n = {}, V_n = {})",
                p.b, p.v
            )));
        }
        let n = s.n as f64;
        Ok(
            0.5 * (p.v / self.s2).ln() + self.a * self.b.ln() - p.a * p.b.ln() + ln_gamma(p.a)
                - ln_gamma(self.a)
                - 0.5 * n * (2.0 * std::f64::consts::PI).ln(),
        )
    }

    /// One-point posterior predictive given the observations in `s`.
    pub fn predictive(&self, s: &SuffStats) -> StudentT {
        let p = self.posterior(s);
        StudentT::new(p.mean, (p.b * (1.0 + p.v) / p.a).sqrt(), 2.0 * p.a)
    }

    /// Draws `(μ, σ²)` from the posterior given `s`.
    pub fn sample_posterior<R: Rng + ?Sized>(
        &self,
        s: &SuffStats,
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        let p = self.posterior(s);
        let g = Gamma::new(p.a, 1.0 / p.b).map_err(|e| numerical(e.to_string()))?;
        let var = 1.0 / g.sample(rng);
        let nrm = Normal::new(p.mean, (p.v * var).sqrt()).map_err(|e| numerical(e.to_string()))?;
        Ok((nrm.sample(rng), var))
    }
}
