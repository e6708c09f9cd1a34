//! Log-space arithmetic and special functions shared by the rest of the crate.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

/// Natural log of the gamma function for positive real arguments.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    statrs_ln_gamma(x)
}

/// `ln((x)_n)` where `(x)_n = x (x+1) ... (x+n-1)` is the rising factorial.
///
/// Short products are summed directly, which is exact to rounding and also
/// handles `x <= 0`. A zero factor yields `-inf`; a negative product has no
/// real logarithm and yields NaN.
pub fn ln_rising(x: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if x > 0.0 && n > 64 {
        return ln_gamma(x + n as f64) - ln_gamma(x);
    }
    let mut acc = 0.0;
    let mut negative = false;
    for i in 0..n {
        let f = x + i as f64;
        if f == 0.0 {
            return f64::NEG_INFINITY;
        }
        if f < 0.0 {
            negative = !negative;
        }
        acc += f.abs().ln();
    }
    if negative {
        f64::NAN
    } else {
        acc
    }
}

/// `ln n!`
#[inline]
pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}`; `-inf` for an empty slice or all `-inf` entries.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + s.ln()
}

/// Result of summing a series of positive terms given in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub ln_value: f64,
    pub terms: usize,
    /// Estimated bound on the omitted tail relative to the partial sum.
    pub tail_bound_rel: f64,
    pub truncated: bool,
}

/// Sums positive terms `t_m`, `m = first, first+1, …`, supplied in log space by
/// `next` (which returns `None` once the support ends).
///
/// The tail after a decreasing term is bounded by treating the local decay as a
/// power law `t_j ≤ t_m (m/j)^s` and integrating: `Σ_{j>m} t_j ≤ t_m m / (s − 1)`.
/// This is conservative for geometric tails and still valid for the slowly
/// decaying tails of Gnedin-type weights. Summation stops when that bound falls
/// below `rel_tol` of the partial sum, or after `cap` terms (flagged as truncated).
pub fn sum_log_series(
    first: usize,
    cap: usize,
    rel_tol: f64,
    mut next: impl FnMut() -> Option<f64>,
) -> SeriesSum {
    let mut acc = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    let mut terms = 0;
    while let Some(t) = next() {
        let m = first + terms;
        acc = log_add_exp(acc, t);
        terms += 1;
        let bound = if terms >= 3 && m >= 2 && t < prev {
            let s = (prev - t) / ((m as f64) / (m as f64 - 1.0)).ln();
            if s > 1.0 {
                (t - acc).exp() * m as f64 / (s - 1.0)
            } else {
                f64::INFINITY
            }
        } else {
            f64::INFINITY
        };
        if bound < rel_tol {
            return SeriesSum {
                ln_value: acc,
                terms,
                tail_bound_rel: bound,
                truncated: false,
            };
        }
        if terms >= cap {
            return SeriesSum {
                ln_value: acc,
                terms,
                tail_bound_rel: bound,
                truncated: true,
            };
        }
        prev = t;
    }
    SeriesSum {
        ln_value: acc,
        terms,
        tail_bound_rel: 0.0,
        truncated: false,
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-branch `ln Γ(z)` for complex `z` with `Re z > 0`.
///
/// Lanczos approximation (g = 7, nine terms); the argument is shifted up by
/// recurrence first so the approximation is only used where it is accurate.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.re < 8.0 {
        shift += z.ln();
        z += 1.0;
    }
    let zm1 = z - 1.0;
    let mut a = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += *c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    let half_ln_two_pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    half_ln_two_pi + (zm1 + 0.5) * t.ln() - t + a.ln() - shift
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rising_factorial_small_and_large() {
        assert!((ln_rising(2.0, 3) - (24.0f64).ln()).abs() < 1e-14);
        assert_eq!(ln_rising(0.0, 2), f64::NEG_INFINITY);
        assert_eq!(ln_rising(-0.5, 0), 0.0);
        let direct: f64 = (0..100).map(|i| (1.5 + i as f64).ln()).sum();
        assert!((ln_rising(1.5, 100) - direct).abs() < 1e-10);
        // negative arguments with an even number of negative factors
        assert!((ln_rising(-1.5, 2) - (0.75f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_handles_infinities() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[0.0, 0.0]);
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn series_power_law_tail() {
        // Σ 1/m³ = ζ(3); the bound has to keep going well past the ratio test
        let mut m = 0usize;
        let s = sum_log_series(1, 10_000_000, 1e-10, || {
            m += 1;
            Some(-3.0 * (m as f64).ln())
        });
        assert!(!s.truncated);
        assert!((s.ln_value.exp() - 1.202_056_903_159_594).abs() < 2e-10);
    }

    #[test]
    fn series_finite_support() {
        let w = [0.5f64, 0.25, 0.25];
        let mut it = w.iter();
        let s = sum_log_series(1, 100, 1e-12, || it.next().map(|x| x.ln()));
        assert!(s.ln_value.abs() < 1e-15);
        assert!(!s.truncated);
    }

    #[test]
    fn complex_gamma_matches_real_axis() {
        for &x in &[0.3, 1.0, 2.5, 7.25, 40.0] {
            let c = ln_gamma_complex(Complex64::new(x, 0.0));
            assert!((c.re - ln_gamma(x)).abs() < 1e-12, "x={x}");
            assert!(c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn complex_gamma_modulus_identity() {
        // |Γ(1 + i y)|² = π y / sinh(π y)
        for &y in &[0.5, 2.0, 10.0] {
            let c = ln_gamma_complex(Complex64::new(1.0, y));
            let expected =
                0.5 * (std::f64::consts::PI * y / (std::f64::consts::PI * y).sinh()).ln();
            assert!((c.re - expected).abs() < 1e-11, "y={y}");
        }
    }
}
