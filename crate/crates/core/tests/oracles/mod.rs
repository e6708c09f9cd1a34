//! Brute-force and quadrature reference computations for tests.
//!
//! Nothing here calls the code under test except where noted.

#![allow(dead_code)]

use std::collections::HashMap;

use hssm::gibbs::{NigHyper, SuffStats};
use hssm::partition::Rho;
use hssm::Eppf;
use num_complex::Complex64;

// ---------- partitions ----------

/// All set partitions of `0..n` as block labels, built by inserting one
/// element at a time.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &out {
            let k = p.iter().max().map_or(0, |m| m + 1);
            for b in 0..=k {
                let mut q = p.clone();
                q.push(b);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

pub fn sizes_of(labels: &[usize]) -> Vec<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut s = vec![0; k];
    for &l in labels {
        s[l] += 1;
    }
    s
}

pub fn bell(n: usize) -> usize {
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let v = *next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0]
}

// ---------- special functions ----------

fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `ln Γ(z)` by upward shift and the Stirling series.
pub fn ln_gamma_c(mut z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < 30.0 || z.re < 30.0 {
        shift += z.ln();
        z += 1.0;
    }
    let b = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let mut series = Complex64::new(0.0, 0.0);
    let z2 = z * z;
    let mut zp = z;
    for c in b {
        series += c / zp;
        zp *= z2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

/// `ln c_{γ,ζ}` with `c = Γ(1+z₁)Γ(1+z₂)/Γ(γ)`, `z₁,₂` the roots of `x² − γx + ζ`.
pub fn ln_gnedin_c(gamma: f64, zeta: f64) -> f64 {
    let disc = Complex64::new(gamma * gamma - 4.0 * zeta, 0.0).sqrt();
    let z1 = (Complex64::new(gamma, 0.0) + disc) / 2.0;
    let z2 = (Complex64::new(gamma, 0.0) - disc) / 2.0;
    let v = ln_gamma_c(z1 + 1.0) + ln_gamma_c(z2 + 1.0) - ln_gamma(gamma);
    v.re
}

/// `ρ_m` straight from its product form.
pub fn gnedin_rho_direct(gamma: f64, zeta: f64, m: usize) -> f64 {
    let mut acc = ln_gnedin_c(gamma, zeta);
    for l in 1..m {
        let lf = l as f64;
        acc += (lf * lf - gamma * lf + zeta).ln();
    }
    acc -= ln_gamma(m as f64 + 1.0) + ln_gamma(m as f64);
    acc.exp()
}

fn ln_rising(x: f64, n: usize) -> f64 {
    (0..n).map(|j| (x + j as f64).ln()).sum()
}

// ---------- EPPFs ----------

/// EPPF of one partition by closed forms written independently of the
/// library. MFM uses the Dirichlet-multinomial mixture over `m`.
pub fn eppf_direct(e: &Eppf, sizes: &[usize]) -> f64 {
    let n: usize = sizes.iter().sum();
    let k = sizes.len();
    match e {
        Eppf::PitmanYor { sigma, theta } => {
            let mut v = 1.0;
            for i in 1..k {
                v *= theta + i as f64 * sigma;
            }
            for j in 1..n {
                v /= theta + j as f64;
            }
            for &s in sizes {
                for j in 1..s {
                    v *= j as f64 - sigma;
                }
            }
            v
        }
        Eppf::Gnedin { gamma, zeta } => {
            let mut ln = ln_rising(*gamma, n - k);
            for i in 1..k {
                let f = (i * i) as f64 - gamma * i as f64 + zeta;
                if f <= 0.0 {
                    return 0.0;
                }
                ln += f.ln();
            }
            for m in 1..n {
                ln -= ((m * m) as f64 + gamma * m as f64 + zeta).ln();
            }
            for &s in sizes {
                ln += ln_gamma(s as f64 + 1.0);
            }
            ln.exp()
        }
        Eppf::Mfm { sigma, rho } => {
            let a = sigma.abs();
            let cells: f64 = sizes
                .iter()
                .map(|&s| ln_gamma(s as f64 + a) - ln_gamma(a))
                .sum();
            let term = |m: usize, rho_m: f64| {
                if m < k || rho_m <= 0.0 {
                    return 0.0;
                }
                let mf = m as f64;
                (rho_m.ln() + ln_gamma(mf + 1.0) - ln_gamma((m - k) as f64 + 1.0)
                    + cells
                    + ln_gamma(mf * a)
                    - ln_gamma(mf * a + n as f64))
                .exp()
            };
            match rho {
                Rho::Explicit(w) => w.iter().enumerate().map(|(i, &r)| term(i + 1, r)).sum(),
                Rho::Gnedin { gamma, zeta } => {
                    let mut r = ln_gnedin_c(*gamma, *zeta).exp();
                    let mut total = 0.0;
                    for m in 1..=400_000usize {
                        total += term(m, r);
                        let mf = m as f64;
                        r *= (mf * mf - gamma * mf + zeta) / ((mf + 1.0) * mf);
                        // remaining terms are below r·m/γ
                        if r <= 0.0 || (m > 200 && r * mf < 1e-22 * gamma.max(1.0)) {
                            break;
                        }
                    }
                    total
                }
            }
        }
    }
}

/// Block-count pmf `P(K_n = k)`, `k = 0..=n`, by summing the EPPF over all
/// set partitions.
pub fn block_count_by_enumeration(e: &Eppf, n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    for part in set_partitions(n) {
        let s = sizes_of(&part);
        p[s.len()] += eppf_direct(e, &s);
    }
    p
}

/// Generalized Stirling numbers with `σ = 1/2` in exact integer arithmetic:
/// `S(n,k) = 2^k / (k! 2^n) Σ_i (−1)^i C(k,i) Π_{j<n} (2j − i)`.
pub fn stirling_half(n: usize, k: usize) -> f64 {
    let mut sum: i128 = 0;
    let mut binom: i128 = 1;
    for i in 0..=k as i128 {
        let prod: i128 = (0..n as i128).map(|j| 2 * j - i).product();
        let term = binom * prod;
        sum += if i % 2 == 0 { term } else { -term };
        binom = binom * (k as i128 - i) / (i + 1);
    }
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    sum as f64 * 2f64.powi(k as i32 - n as i32) / fact
}

// ---------- hierarchical laws ----------

/// Sum of `q_{n1}(m1) q_{n2}(m2) q0_{m1+m2}(k)` for two groups, built from
/// the block-count pmfs returned by `bc(spec, n)`.
pub fn total_double_sum(
    bc: impl Fn(&Eppf, usize) -> Vec<f64>,
    top: &Eppf,
    bottom: &Eppf,
    n1: usize,
    n2: usize,
) -> Vec<f64> {
    let q1 = bc(bottom, n1);
    let q2 = bc(bottom, n2);
    let mut out = vec![0.0; n1 + n2 + 1];
    for (m1, &p1) in q1.iter().enumerate().skip(1) {
        for (m2, &p2) in q2.iter().enumerate().skip(1) {
            let w = p1 * p2;
            if w == 0.0 {
                continue;
            }
            let q0 = bc(top, m1 + m2);
            for k in 1..=m1 + m2 {
                out[k] += w * q0[k];
            }
        }
    }
    out
}

/// Probability of one grouped dish labelling by summing over every split of
/// each group into tables and every table-to-dish map consistent with it.
pub fn peppf_brute(top: &Eppf, bottom: &Eppf, dishes: &[Vec<usize>]) -> f64 {
    let splits: Vec<Vec<Vec<usize>>> = dishes
        .iter()
        .map(|ds| {
            set_partitions(ds.len())
                .into_iter()
                .filter(|t| {
                    (0..ds.len()).all(|a| (0..ds.len()).all(|b| t[a] != t[b] || ds[a] == ds[b]))
                })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; dishes.len()];
    loop {
        let mut w = 1.0;
        let mut table_dish = Vec::new();
        for (g, ds) in dishes.iter().enumerate() {
            let t = &splits[g][idx[g]];
            w *= eppf_direct(bottom, &sizes_of(t));
            let k = sizes_of(t).len();
            for c in 0..k {
                let j = t.iter().position(|&x| x == c).unwrap();
                table_dish.push(ds[j]);
            }
        }
        let canon = relabel(&table_dish);
        w *= eppf_direct(top, &sizes_of(&canon));
        total += w;
        let mut g = 0;
        loop {
            if g == idx.len() {
                return total;
            }
            idx[g] += 1;
            if idx[g] < splits[g].len() {
                break;
            }
            idx[g] = 0;
            g += 1;
        }
    }
}

pub fn relabel(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

// ---------- quadrature ----------

/// Composite Simpson rule with `2 * half` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, half: usize) -> f64 {
    let n = 2 * half;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `ln ∫∫ Π N(y | μ, v) N(μ | m0, s2·v) IG(v | a, b) dμ dv` by nested Simpson
/// rules over `ln v` and `μ`.
pub fn nig_marginal_quadrature(h: &NigHyper, ys: &[f64]) -> f64 {
    let ln_ig = |v: f64| h.a * h.b.ln() - ln_gamma(h.a) - (h.a + 1.0) * v.ln() - h.b / v;
    let ln_norm = |x: f64, m: f64, var: f64| {
        -0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * (x - m).powi(2) / var
    };
    let inner = |v: f64| {
        let sd = (h.s2 * v).sqrt();
        let (lo, hi) = (h.m0 - 14.0 * sd - 10.0, h.m0 + 14.0 * sd + 10.0);
        simpson(
            |mu| {
                let l: f64 = ys.iter().map(|&y| ln_norm(y, mu, v)).sum::<f64>()
                    + ln_norm(mu, h.m0, h.s2 * v);
                l.exp()
            },
            lo,
            hi,
            1500,
        )
    };
    // v = e^t, dv = v dt
    simpson(
        |t| {
            let v = t.exp();
            inner(v) * (ln_ig(v)).exp() * v
        },
        -14.0,
        9.0,
        1500,
    )
    .ln()
}

/// `E[S^p]` for the polynomially tilted Mittag-Leffler law by quadrature.
///
/// With `S = T^{−σ}` and `T` positive σ-stable, Zolotarev's integral form
/// of the stable density gives `E[T^{−q}] = Γ(q(1−σ)/σ + 1) / π ·
/// ∫₀^π A(u)^{−q(1−σ)/σ} du` with
/// `A(u) = (sin(σu)^σ sin((1−σ)u)^{1−σ} / sin u)^{1/(1−σ)}`.
/// The tilted moment is the ratio `E[T^{−σp−θ}] / E[T^{−θ}]`. Only the
/// `u` integral is numeric.
pub fn tilted_ml_moment_quadrature(sigma: f64, theta: f64, p: f64) -> f64 {
    let ln_a = |u: f64| {
        (sigma * (sigma * u).sin().ln() + (1.0 - sigma) * ((1.0 - sigma) * u).sin().ln()
            - u.sin().ln())
            / (1.0 - sigma)
    };
    let ln_moment = |q: f64| {
        let e = q * (1.0 - sigma) / sigma;
        // the integrand peaks at u = 0; subtract its log there for stability
        let peak = -e * ln_a(1e-12);
        let i = simpson(
            |u| (-e * ln_a(u) - peak).exp(),
            1e-12,
            std::f64::consts::PI - 1e-9,
            200_000,
        );
        ln_gamma(e + 1.0) + peak + i.ln() - std::f64::consts::PI.ln()
    };
    (ln_moment(sigma * p + theta) - ln_moment(theta)).exp()
}

// ---------- Gibbs posterior ----------

/// Exact posterior over `(table labels, dish labels)` of one group of
/// observations, keyed by canonical per-customer labels.
pub fn gibbs_posterior(
    top: &Eppf,
    bottom: &Eppf,
    hyper: &NigHyper,
    ys: &[f64],
) -> HashMap<(Vec<u32>, Vec<u32>), f64> {
    let mut out = HashMap::new();
    let mut z = 0.0;
    for tables in set_partitions(ys.len()) {
        let tsizes = sizes_of(&tables);
        for dish_of_table in set_partitions(tsizes.len()) {
            let dish: Vec<usize> = tables.iter().map(|&t| dish_of_table[t]).collect();
            let mut w = eppf_direct(bottom, &tsizes) * eppf_direct(top, &sizes_of(&dish_of_table));
            for d in 0..sizes_of(&dish).len() {
                let obs: Vec<f64> = ys
                    .iter()
                    .zip(&dish)
                    .filter(|(_, &x)| x == d)
                    .map(|(y, _)| *y)
                    .collect();
                // library marginal, checked separately against quadrature
                w *= hyper
                    .log_marginal(&SuffStats::from_slice(&obs))
                    .unwrap()
                    .exp();
            }
            z += w;
            let key = (
                tables.iter().map(|&x| x as u32).collect(),
                dish.iter().map(|&x| x as u32).collect(),
            );
            out.insert(key, w);
        }
    }
    out.values_mut().for_each(|w| *w /= z);
    out
}
