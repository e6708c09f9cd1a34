//! Categorical draws by inverse CDF with a single uniform.

use rand::Rng;

/// Draws an index with probability proportional to `exp(ln_weights[i])`.
///
/// Weights are shifted by their maximum before exponentiation. Returns `None`
/// when every weight is `-inf` or any weight is NaN.
pub fn sample_log_weights<R: Rng + ?Sized>(ln_weights: &[f64], rng: &mut R) -> Option<usize> {
    let max = ln_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() || ln_weights.iter().any(|w| w.is_nan()) {
        return None;
    }
    let total: f64 = ln_weights.iter().map(|w| (w - max).exp()).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in ln_weights.iter().enumerate() {
        let p = (w - max).exp();
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return Some(i);
        }
    }
    // rounding left u just above the accumulated total
    Some(last_positive)
}

/// Draws an index with probability proportional to nonnegative `weights[i]`.
pub fn sample_weights<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if u < acc {
            return Some(i);
        }
    }
    Some(last_positive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn never_picks_zero_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let i = sample_log_weights(&[f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY], &mut rng);
            assert_eq!(i, Some(1));
        }
        assert_eq!(sample_log_weights(&[f64::NEG_INFINITY], &mut rng), None);
        assert_eq!(sample_weights(&[0.0, 0.0], &mut rng), None);
    }

    #[test]
    fn frequencies_follow_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = [1.0f64, 2.0, 7.0];
        let lw: Vec<f64> = w.iter().map(|x| x.ln() + 500.0).collect();
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            counts[sample_log_weights(&lw, &mut rng).unwrap()] += 1;
        }
        for (c, wi) in counts.iter().zip(w) {
            assert!((*c as f64 / n as f64 - wi / 10.0).abs() < 0.01);
        }
    }
}
