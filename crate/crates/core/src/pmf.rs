use serde::Serialize;

use crate::error::{numerical, Result};
use crate::special::log_sum_exp;

/// Tolerance on `|log Σ p_k|` accepted by [`LogPmf::new`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A probability mass function on the integers `min_support..min_support + len`,
/// stored as natural-log masses. `-inf` entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogPmf {
    min_support: usize,
    log_mass: Vec<f64>,
}

impl LogPmf {
    /// Wraps already-normalized log masses.
    pub fn new(min_support: usize, log_mass: Vec<f64>) -> Result<Self> {
        let z = log_sum_exp(&log_mass);
        if !(z.abs() <= NORMALIZATION_TOL) {
            return Err(numerical(format!(
                "log masses are not normalized (log-sum-exp = {z:e})"
            )));
        }
        Ok(Self {
            min_support,
            log_mass,
        })
    }

    /// Normalizes arbitrary log weights.
    pub fn from_log_weights(min_support: usize, mut log_weights: Vec<f64>) -> Result<Self> {
        let z = log_sum_exp(&log_weights);
        if !z.is_finite() {
            return Err(numerical(format!(
                "cannot normalize log weights (total {z})"
            )));
        }
        for w in log_weights.iter_mut() {
            *w -= z;
        }
        Ok(Self {
            min_support,
            log_mass: log_weights,
        })
    }

    /// Normalizes nonnegative linear weights.
    pub fn from_weights(min_support: usize, weights: &[f64]) -> Result<Self> {
        Self::from_log_weights(min_support, weights.iter().map(|w| w.ln()).collect())
    }

    pub fn point_mass(k: usize) -> Self {
        Self {
            min_support: k,
            log_mass: vec![0.0],
        }
    }

    pub fn min_support(&self) -> usize {
        self.min_support
    }

    /// Largest support point (inclusive).
    pub fn max_support(&self) -> usize {
        self.min_support + self.log_mass.len().saturating_sub(1)
    }

    pub fn log_mass(&self) -> &[f64] {
        &self.log_mass
    }

    pub fn log_prob(&self, k: usize) -> f64 {
        if k < self.min_support {
            return f64::NEG_INFINITY;
        }
        self.log_mass
            .get(k - self.min_support)
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.log_prob(k).exp()
    }

    /// `(k, P{X = k})` pairs over the stored support.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.log_mass
            .iter()
            .enumerate()
            .map(move |(i, lp)| (self.min_support + i, lp.exp()))
    }

    /// Probabilities indexed by `k` from 0 up to `max_support`.
    pub fn dense_probs(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.max_support() + 1];
        for (k, p) in self.iter() {
            out[k] = p;
        }
        out
    }

    /// log of the total mass; zero up to rounding for a valid pmf.
    pub fn log_total(&self) -> f64 {
        log_sum_exp(&self.log_mass)
    }

    /// `E[X^r]`.
    pub fn moment(&self, r: f64) -> f64 {
        self.iter().map(|(k, p)| (k as f64).powf(r) * p).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1.0)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter()
            .map(|(k, p)| {
                let d = k as f64 - m;
                d * d * p
            })
            .sum()
    }

    /// `E[f(X)]`.
    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.iter().map(|(k, p)| f(k) * p).sum()
    }

    /// Total variation distance `½ Σ |p_k − q_k|` to another pmf.
    pub fn total_variation(&self, other: &LogPmf) -> f64 {
        total_variation(&self.dense_probs(), &other.dense_probs())
    }
}

/// `½ Σ |p_k − q_k|` for two dense probability vectors (missing tail entries count as 0).
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let s: f64 = (0..len)
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum();
    0.5 * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_on_two_points() {
        let p = LogPmf::from_weights(1, &[1.0, 1.0]).unwrap();
        assert!((p.mean() - 1.5).abs() < 1e-15);
        assert!((p.variance() - 0.25).abs() < 1e-15);
        assert_eq!(p.max_support(), 2);
        assert_eq!(p.prob(3), 0.0);
        assert_eq!(p.prob(0), 0.0);
    }

    #[test]
    fn point_mass_moment() {
        let p = LogPmf::point_mass(3);
        assert!((p.moment(2.0) - 9.0).abs() < 1e-15);
        assert_eq!(p.variance(), 0.0);
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(LogPmf::new(1, vec![0.0, 0.0]).is_err());
        assert!(LogPmf::from_log_weights(1, vec![f64::NEG_INFINITY]).is_err());
    }

    #[test]
    fn tv_distance() {
        let a = LogPmf::point_mass(1);
        let b = LogPmf::point_mass(2);
        assert!((a.total_variation(&b) - 1.0).abs() < 1e-15);
        assert_eq!(a.total_variation(&a), 0.0);
    }
}
