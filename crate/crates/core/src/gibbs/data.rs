use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{size, Result};

/// Grouped real observations `Y_{i,j}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    groups: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(groups: Vec<Vec<f64>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(size("a dataset needs at least one group"));
        }
        if let Some(i) = groups.iter().position(|g| g.is_empty()) {
            return Err(size(format!("group {i} has no observations")));
        }
        if groups.iter().flatten().any(|y| !y.is_finite()) {
            return Err(size("observations must be finite"));
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[Vec<f64>] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &[f64] {
        &self.groups[i]
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Observations flattened in `(i, j)` order.
    pub fn flat(&self) -> Vec<f64> {
        self.groups.iter().flatten().copied().collect()
    }
}

/// A finite mixture of unit-variance normals, one per group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMixture {
    /// `(weight, mean, global component id)`
    pub components: Vec<(f64, f64, usize)>,
}

impl GroupMixture {
    pub fn density(&self, y: f64) -> f64 {
        let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        self.components
            .iter()
            .map(|(w, m, _)| w * c * (-0.5 * (y - m) * (y - m)).exp())
            .sum()
    }
}

/// The two simulation settings used to benchmark the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Three groups (100, 50, 50) sharing components at −5, 0 and 5.
    ThreeGroups,
    /// Ten groups of 50 sharing a component at −5, each with its own second
    /// component at `−4 + i`.
    TenGroups,
}

/// Generated data with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub data: Dataset,
    /// Global component of each observation, flattened in `(i, j)` order.
    pub truth: Vec<usize>,
    pub mixtures: Vec<GroupMixture>,
}

impl Preset {
    pub fn mixtures(&self) -> Vec<(usize, GroupMixture)> {
        match self {
            Preset::ThreeGroups => vec![
                (
                    100,
                    GroupMixture {
                        components: vec![(0.3, -5.0, 0), (0.3, 0.0, 1), (0.4, 5.0, 2)],
                    },
                ),
                (
                    50,
                    GroupMixture {
                        components: vec![(0.3, -5.0, 0), (0.7, 0.0, 1)],
                    },
                ),
                (
                    50,
                    GroupMixture {
                        components: vec![(0.8, -5.0, 0), (0.1, 0.0, 1), (0.1, 5.0, 2)],
                    },
                ),
            ],
            Preset::TenGroups => (1..=10)
                .map(|i| {
                    (
                        50,
                        GroupMixture {
                            components: vec![(0.7, -5.0, 0), (0.3, -4.0 + i as f64, i)],
                        },
                    )
                })
                .collect(),
        }
    }

    /// Number of distinct true components.
    pub fn true_clusters(&self) -> usize {
        match self {
            Preset::ThreeGroups => 3,
            Preset::TenGroups => 11,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Synthetic> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = self.mixtures();
        let mut groups = Vec::with_capacity(spec.len());
        let mut truth = Vec::new();
        for (n, mix) in &spec {
            let mut ys = Vec::with_capacity(*n);
            for _ in 0..*n {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = mix.components.len() - 1;
                for (idx, (w, _, _)) in mix.components.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = idx;
                        break;
                    }
                }
                let (_, mean, id) = mix.components[pick];
                let z: f64 = StandardNormal.sample(&mut rng);
                ys.push(mean + z);
                truth.push(id);
            }
            groups.push(ys);
        }
        Ok(Synthetic {
            data: Dataset::new(groups)?,
            truth,
            mixtures: spec.into_iter().map(|(_, m)| m).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_shapes() {
        let a = Preset::ThreeGroups.generate(1).unwrap();
        assert_eq!(a.data.sizes(), vec![100, 50, 50]);
        assert_eq!(a.truth.len(), 200);
        let b = Preset::TenGroups.generate(1).unwrap();
        assert_eq!(b.data.sizes(), vec![50; 10]);
        let ids: std::collections::BTreeSet<_> = Preset::TenGroups
            .mixtures()
            .iter()
            .flat_map(|(_, m)| m.components.iter().map(|c| c.2).collect::<Vec<_>>())
            .collect();
        assert_eq!(ids.len(), Preset::TenGroups.true_clusters());
        assert_eq!(Preset::ThreeGroups.generate(1).unwrap(), a);
    }

    #[test]
    fn rejects_empty_groups() {
        assert!(Dataset::new(vec![]).is_err());
        assert!(Dataset::new(vec![vec![1.0], vec![]]).is_err());
    }
}
