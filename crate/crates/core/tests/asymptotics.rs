mod oracles;

use hssm::asymptotics::{
    asym_marginal_moment, exact_vs_asymptotic, hgp_limit_pmf, hpygp_limit_pmf, ml_tilted_moment,
    PyFamily,
};
use hssm::partition::gnedin_rho;
use oracles::*;

fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

#[test]
fn quadrature_oracle_untilted() {
    // E[S^p] = Γ(p+1)/Γ(pσ+1) when θ = 0
    for (s, p) in [(0.5, 1.0), (0.25, 2.0), (0.7, 0.5)] {
        let exact = (ln_gamma(p + 1.0) - ln_gamma(p * s + 1.0)).exp();
        let q = tilted_ml_moment_quadrature(s, 0.0, p);
        assert!(
            (q - exact).abs() < 1e-8 * exact,
            "σ={s} p={p}: {q} vs {exact}"
        );
    }
}

#[test]
fn tilted_moment_matches_quadrature() {
    for (s, t, p) in [
        (0.25, 29.9, 1.0),
        (0.25, 29.9, 2.0),
        (0.67, 8.53, 1.0),
        (0.5, 1.0, 0.7),
        (0.25, 2.0, 1.0),
    ] {
        let lib = ml_tilted_moment(s, t, p).unwrap();
        let q = tilted_ml_moment_quadrature(s, t, p);
        assert!((lib - q).abs() < 1e-4, "σ={s} θ={t} p={p}: {lib} vs {q}");
    }
}

#[test]
fn hpygp_limit_is_gnedin_weights() {
    let (g, z) = (3.2, 290.0);
    let lim = hpygp_limit_pmf(g, z, 50).unwrap();
    let raw = lim.raw_log_mass.clone();
    for m in 1..=50 {
        let direct = gnedin_rho_direct(g, z, m);
        let got = raw[m - 1].exp();
        assert!((got - direct).abs() < 1e-10, "m={m}: {got} vs {direct}");
        assert!((gnedin_rho(g, z, m).unwrap() - direct).abs() < 1e-10);
    }
    // m = 1 term is the constant itself
    assert!((raw[0] - ln_gnedin_c(g, z)).abs() < 1e-10);
}

#[test]
fn gnedin_weights_sum_to_one() {
    // heavy tail: about 2·10^5 terms are needed for 1 − 1e−9
    let (g, z) = (3.2, 290.0);
    let mut r = gnedin_rho(g, z, 1).unwrap();
    let mut sum = 0.0;
    for m in 1..=200_000usize {
        sum += r;
        let mf = m as f64;
        r *= (mf * mf - g * mf + z) / ((mf + 1.0) * mf);
    }
    assert!((sum - 1.0).abs() <= 1e-9, "{sum}");
}

#[test]
fn hgp_limit_partial_sums_increase() {
    let lim = hgp_limit_pmf(15.0, 1450.0, 15.0, 1450.0, 60).unwrap();
    let ps = lim.partial_sums();
    assert!(ps.windows(2).all(|w| w[1] >= w[0]));
    assert!(*ps.last().unwrap() <= 1.0 + 1e-9);
    assert!(lim.raw_log_mass.iter().all(|x| x.exp() >= 0.0));
}

#[test]
fn hgp_limit_with_root_at_one() {
    let lim = hgp_limit_pmf(3.0, 2.0, 15.0, 1450.0, 10).unwrap();
    let p = lim.normalized().unwrap();
    assert!((p.prob(1) - 1.0).abs() < 1e-12);
}

#[test]
fn corollary_item_one_from_quadrature() {
    let f = PyFamily::Hpyp {
        sigma0: 0.25,
        theta0: 29.9,
        sigma1: 0.25,
        theta1: 29.9,
    };
    let m0 = tilted_ml_moment_quadrature(0.25, 29.9, 1.0);
    let m1 = tilted_ml_moment_quadrature(0.25, 29.9, 0.25);
    let expected = 50f64.powf(0.0625) * m0 * m1;
    let got = asym_marginal_moment(&f, 50, 1.0).unwrap();
    assert!(
        (got - expected).abs() < 1e-4 * expected,
        "{got} vs {expected}"
    );
}

#[test]
fn hpyp_ratio_approaches_one() {
    let f = PyFamily::Hpyp {
        sigma0: 0.25,
        theta0: 29.9,
        sigma1: 0.25,
        theta1: 29.9,
    };
    let rows = exact_vs_asymptotic(&f, &[50, 200, 500]).unwrap();
    let gaps: Vec<f64> = rows
        .iter()
        .map(|r| (r.exact / r.asymptotic - 1.0).abs())
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}
