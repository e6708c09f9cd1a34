mod oracles;

use hssm::partition::block_count_pmf;
use hssm::prior::{
    convolve, marginal_cluster_pmf, peppf_log, spike_slab_adjust, spike_slab_distinct_pmf,
    total_cluster_pmf, BaseMeasure, GroupSizes, HssmSpec,
};
use hssm::{Eppf, LogPmf};
use oracles::*;
use proptest::prelude::*;

fn hsm(top: Eppf, bottom: Eppf) -> HssmSpec {
    HssmSpec::diffuse(top, bottom).unwrap()
}

/// The seven models of the three-component simulation setting.
pub fn seven_models() -> Vec<(&'static str, HssmSpec)> {
    let py = |s, t| Eppf::pitman_yor(s, t).unwrap();
    let dp = |t| Eppf::dirichlet(t).unwrap();
    let gn = |g, z| Eppf::gnedin(g, z).unwrap();
    vec![
        ("HDP", hsm(dp(3.5), dp(3.5))),
        ("HPYP", hsm(py(0.25, 2.0), py(0.25, 2.0))),
        ("HGP", hsm(gn(13.5, 140.0), gn(13.5, 140.0))),
        ("HDPYP", hsm(dp(3.3), py(0.23, 2.0))),
        ("HPYDP", hsm(py(0.22, 2.0), dp(3.85))),
        ("HGDP", hsm(gn(14.4, 135.0), dp(3.3))),
        ("HGPYP", hsm(gn(14.71, 130.0), py(0.23, 2.0))),
    ]
}

fn dense(e: &Eppf, n: usize) -> Vec<f64> {
    let p = block_count_pmf(e, n).unwrap();
    (0..=n).map(|k| p.prob(k)).collect()
}

#[test]
fn total_law_matches_double_sum() {
    for (name, h) in seven_models() {
        for (n1, n2) in [(1, 1), (3, 7), (15, 15), (15, 4)] {
            let lib = total_cluster_pmf(&h, &GroupSizes::new(vec![n1, n2]).unwrap()).unwrap();
            let brute = total_double_sum(dense, &h.top, &h.bottom, n1, n2);
            for (k, &p) in brute.iter().enumerate() {
                assert!(
                    (lib.prob(k) - p).abs() <= 1e-12,
                    "{name} ({n1},{n2}) k={k}: {} vs {p}",
                    lib.prob(k)
                );
            }
        }
    }
}

#[test]
fn marginal_law_is_mixture_over_tables() {
    for (name, h) in seven_models() {
        for n in [1, 6, 20] {
            let lib = marginal_cluster_pmf(&h, n).unwrap();
            let tables = dense(&h.bottom, n);
            for k in 1..=n {
                let direct: f64 = (k..=n).map(|m| tables[m] * dense(&h.top, m)[k]).sum();
                assert!((lib.prob(k) - direct).abs() < 1e-12, "{name} n={n} k={k}");
            }
        }
    }
}

fn labelings(sizes: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let n: usize = sizes.iter().sum();
    set_partitions(n)
        .into_iter()
        .map(|flat| {
            let mut out = Vec::new();
            let mut pos = 0;
            for &s in sizes {
                out.push(flat[pos..pos + s].to_vec());
                pos += s;
            }
            out
        })
        .collect()
}

fn counts_of(dishes: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let d = dishes.iter().flatten().max().unwrap() + 1;
    dishes
        .iter()
        .map(|g| {
            let mut c = vec![0; d];
            g.iter().for_each(|&x| c[x] += 1);
            c
        })
        .collect()
}

#[test]
fn peppf_matches_brute_force() {
    let models = seven_models();
    for (name, h) in models.iter().take(4).chain(models.iter().skip(6)) {
        for sizes in [vec![3], vec![2, 2], vec![4, 3], vec![1, 2, 2]] {
            let mut total = 0.0;
            for dishes in labelings(&sizes) {
                let lib = peppf_log(h, &counts_of(&dishes)).unwrap().exp();
                let brute = peppf_brute(&h.top, &h.bottom, &dishes);
                assert!(
                    (lib - brute).abs() <= 1e-10,
                    "{name} {dishes:?}: {lib} vs {brute}"
                );
                total += lib;
            }
            assert!((total - 1.0).abs() < 1e-10, "{name} {sizes:?}: {total}");
        }
    }
}

#[test]
fn spike_slab_mean_identity() {
    for (name, h) in seven_models() {
        let g = GroupSizes::new(vec![20, 20]).unwrap();
        for p in [
            marginal_cluster_pmf(&h, 20).unwrap(),
            total_cluster_pmf(&h, &g).unwrap(),
        ] {
            for a in [0.1, 0.5, 0.9] {
                let adj = spike_slab_adjust(&p, a).unwrap();
                let rhs = 1.0 - p.expect(|d| (1.0 - a).powi(d as i32)) + (1.0 - a) * p.mean();
                assert!((adj.mean() - rhs).abs() < 1e-9, "{name} a={a}");
                assert!(adj.log_total().abs() < 1e-10);
            }
        }
    }
}

#[test]
fn spike_slab_distinct_law_by_enumeration() {
    // each of k atoms is the spike with probability a, independently
    for k in 1..=8 {
        for a in [0.1f64, 0.5, 0.9] {
            let mut brute = vec![0.0; k + 1];
            for mask in 0u32..(1 << k) {
                let spikes = mask.count_ones() as usize;
                let p = a.powi(spikes as i32) * (1.0 - a).powi((k - spikes) as i32);
                let distinct = k - spikes + usize::from(spikes > 0);
                brute[distinct] += p;
            }
            let lib = spike_slab_distinct_pmf(k, a).unwrap();
            for (d, &p) in brute.iter().enumerate() {
                assert!((lib.prob(d) - p).abs() < 1e-13, "k={k} a={a} d={d}");
            }
        }
    }
}

#[test]
fn spike_slab_base_validation() {
    let dp = Eppf::dirichlet(1.0).unwrap();
    let base = |a| BaseMeasure::SpikeSlab {
        a,
        atoms: Default::default(),
    };
    assert!(HssmSpec::new(dp.clone(), dp.clone(), base(0.5)).is_ok());
    assert!(HssmSpec::new(dp.clone(), dp.clone(), base(1.0)).is_err());
    assert!(HssmSpec::new(dp.clone(), dp, base(-0.1)).is_err());
}

#[test]
fn three_component_setting_prior_means() {
    // calibrated to E[D_i] ≈ 5 at n_i = 50; published variances to two decimals
    let published = [2.46, 3.53, 2.04, 2.81, 3.13, 1.97, 2.24];
    for ((name, h), v) in seven_models().into_iter().zip(published) {
        let p = marginal_cluster_pmf(&h, 50).unwrap();
        assert!((p.mean() - 5.0).abs() < 0.2, "{name}: {}", p.mean());
        if name != "HPYP" {
            assert!((p.variance() - v).abs() < 0.015, "{name}: {}", p.variance());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_adds_means(a in prop::collection::vec(0.01f64..1.0, 1..8), b in prop::collection::vec(0.01f64..1.0, 1..8), lo in 0usize..4) {
        let p = LogPmf::from_weights(lo, &a).unwrap();
        let q = LogPmf::from_weights(1, &b).unwrap();
        let c = convolve(&p, &q).unwrap();
        prop_assert!((c.mean() - p.mean() - q.mean()).abs() < 1e-10);
        prop_assert!((c.variance() - p.variance() - q.variance()).abs() < 1e-9);
        prop_assert!(c.log_total().abs() < 1e-12);
    }

    #[test]
    fn total_at_least_marginal(t0 in 0.2f64..10.0, t1 in 0.2f64..10.0, n1 in 1usize..25, n2 in 1usize..25) {
        let h = hsm(Eppf::dirichlet(t0).unwrap(), Eppf::dirichlet(t1).unwrap());
        let tot = total_cluster_pmf(&h, &GroupSizes::new(vec![n1, n2]).unwrap()).unwrap();
        let m1 = marginal_cluster_pmf(&h, n1).unwrap();
        prop_assert!(tot.mean() >= m1.mean() - 1e-12);
        prop_assert!(tot.max_support() <= n1 + n2);
        prop_assert!(tot.log_total().abs() < 1e-10);
    }
}
