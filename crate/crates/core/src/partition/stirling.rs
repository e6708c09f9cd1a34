use crate::error::{param, size, Result};
use crate::special::log_add_exp;

/// Triangular table of `ln S_σ(n, k)` for `1 ≤ k ≤ n ≤ n_max`.
///
/// Built from `S_σ(n+1, k) = S_σ(n, k−1) + (n − kσ) S_σ(n, k)`, `S_σ(1,1) = 1`.
/// Every coefficient `n − kσ` is positive for `k ≤ n` and `σ < 1`, so the
/// whole table is computed from nonnegative terms.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    sigma: f64,
    n_max: usize,
    ln_s: Vec<f64>,
}

#[inline]
fn offset(n: usize, k: usize) -> usize {
    n * (n - 1) / 2 + (k - 1)
}

impl StirlingTable {
    pub fn new(sigma: f64, n_max: usize) -> Result<Self> {
        if !(sigma < 1.0) || !sigma.is_finite() {
            return Err(param(format!(
                "generalized Stirling numbers need σ < 1 (got σ = {sigma})"
            )));
        }
        if n_max == 0 {
            return Err(size("Stirling table needs n_max ≥ 1"));
        }
        let mut ln_s = vec![f64::NEG_INFINITY; offset(n_max, n_max) + 1];
        ln_s[0] = 0.0;
        for n in 1..n_max {
            let nf = n as f64;
            for k in 1..=n + 1 {
                let from_new = if k >= 2 {
                    ln_s[offset(n, k - 1)]
                } else {
                    f64::NEG_INFINITY
                };
                let from_old = if k <= n {
                    (nf - k as f64 * sigma).ln() + ln_s[offset(n, k)]
                } else {
                    f64::NEG_INFINITY
                };
                ln_s[offset(n + 1, k)] = log_add_exp(from_new, from_old);
            }
        }
        Ok(Self { sigma, n_max, ln_s })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `ln S_σ(n, k)`; `-inf` outside `1 ≤ k ≤ n`.
    ///
    /// # Panics
    /// If `n > n_max`.
    pub fn ln(&self, n: usize, k: usize) -> f64 {
        assert!(n <= self.n_max, "n = {n} exceeds table size {}", self.n_max);
        if k == 0 || k > n {
            return f64::NEG_INFINITY;
        }
        self.ln_s[offset(n, k)]
    }

    /// The row `ln S_σ(n, 1..=n)`.
    pub fn row(&self, n: usize) -> &[f64] {
        assert!(
            (1..=self.n_max).contains(&n),
            "row {n} outside 1..={}",
            self.n_max
        );
        &self.ln_s[offset(n, 1)..=offset(n, n)]
    }
}

/// `gen_stirling_log(σ, n_max)` as a free function.
pub fn gen_stirling_log(sigma: f64, n_max: usize) -> Result<StirlingTable> {
    StirlingTable::new(sigma, n_max)
}
