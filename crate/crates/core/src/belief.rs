//! The two values passed around a protocol: beliefs `{S, P}` going into an
//! inference primitive and candidate sets `{G, E}` coming out of it.

use crate::error::{Error, Result};
use crate::ising::{ClusterSet, IsingProblem, SpinConfiguration};

/// Inferred bit values `S` and per-cluster uncertainties `P` over clusters `R`.
///
/// `P = 0.5` carries no information; `P = 0` means the cluster is certain.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    clusters: ClusterSet,
    values: SpinConfiguration,
    uncertainty: Vec<f64>,
}

impl Belief {
    pub fn new(clusters: ClusterSet, values: SpinConfiguration, uncertainty: Vec<f64>) -> Result<Self> {
        if values.len() != clusters.n_bits() {
            return Err(Error::Dimension {
                expected: clusters.n_bits(),
                got: values.len(),
            });
        }
        if uncertainty.len() != clusters.len() {
            return Err(Error::Dimension {
                expected: clusters.len(),
                got: uncertainty.len(),
            });
        }
        if let Some(i) = uncertainty.iter().position(|p| !(0.0..=0.5).contains(p)) {
            return Err(Error::Domain(format!(
                "uncertainty P_{i} = {} outside [0, 0.5]",
                uncertainty[i]
            )));
        }
        Ok(Self {
            clusters,
            values,
            uncertainty,
        })
    }

    /// All `P = 0.5`, all `S = +1`.
    pub fn uninformed(clusters: ClusterSet) -> Self {
        let n = clusters.n_bits();
        let m = clusters.len();
        Self {
            clusters,
            values: SpinConfiguration::uniform(n, 1),
            uncertainty: vec![0.5; m],
        }
    }

    /// Same uncertainty `p` on every cluster around `values`.
    pub fn uniform(clusters: ClusterSet, values: SpinConfiguration, p: f64) -> Result<Self> {
        let m = clusters.len();
        Self::new(clusters, values, vec![p; m])
    }

    pub fn clusters(&self) -> &ClusterSet {
        &self.clusters
    }

    pub fn values(&self) -> &SpinConfiguration {
        &self.values
    }

    pub fn uncertainty(&self) -> &[f64] {
        &self.uncertainty
    }

    pub fn n_bits(&self) -> usize {
        self.values.len()
    }

    /// Per-bit uncertainty: the largest `P` among the clusters holding the bit.
    pub fn bit_uncertainty(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.n_bits()];
        for (c, members) in self.clusters.iter().enumerate() {
            for &m in members {
                out[m] = out[m].max(self.uncertainty[c]);
            }
        }
        out
    }
}

/// Candidates `G` with their energies `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    configs: Vec<SpinConfiguration>,
    energies: Vec<f64>,
}

impl CandidateSet {
    pub fn new(configs: Vec<SpinConfiguration>, energies: Vec<f64>) -> Result<Self> {
        if configs.len() != energies.len() {
            return Err(Error::Dimension {
                expected: configs.len(),
                got: energies.len(),
            });
        }
        if let Some(first) = configs.first() {
            if let Some(bad) = configs.iter().find(|c| c.len() != first.len()) {
                return Err(Error::Dimension {
                    expected: first.len(),
                    got: bad.len(),
                });
            }
        }
        Ok(Self { configs, energies })
    }

    /// Builds the set with energies evaluated on `problem`.
    pub fn evaluate(problem: &IsingProblem, configs: Vec<SpinConfiguration>) -> Result<Self> {
        let energies = configs
            .iter()
            .map(|c| problem.energy(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { configs, energies })
    }

    pub fn configs(&self) -> &[SpinConfiguration] {
        &self.configs
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Index of the lowest energy, first index on ties.
    pub fn best_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (j, &e) in self.energies.iter().enumerate() {
            if best.is_none_or(|b| e < self.energies[b]) {
                best = Some(j);
            }
        }
        best
    }

    pub fn best(&self) -> Option<(&SpinConfiguration, f64)> {
        self.best_index().map(|j| (&self.configs[j], self.energies[j]))
    }

    pub fn min_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn into_parts(self) -> (Vec<SpinConfiguration>, Vec<f64>) {
        (self.configs, self.energies)
    }
}
