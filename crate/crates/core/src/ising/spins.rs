use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A classical assignment of every spin to +1 or -1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(pos) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!(
                "spin {pos} has value {}, expected +1 or -1",
                spins[pos]
            )));
        }
        Ok(Self(spins))
    }

    pub fn uniform(n: usize, value: i8) -> Self {
        debug_assert!(value == 1 || value == -1);
        Self(vec![value; n])
    }

    /// Bit `k` of `mask` set means spin `k` is -1.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self((0..n).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub(crate) fn from_vec_unchecked(spins: Vec<i8>) -> Self {
        debug_assert!(spins.iter().all(|&s| s == 1 || s == -1));
        Self(spins)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn into_vec(self) -> Vec<i8> {
        self.0
    }

    /// Spins restricted to `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Vec<i8> {
        indices.iter().map(|&i| self.0[i]).collect()
    }
}

impl TryFrom<Vec<i8>> for SpinConfiguration {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpinConfiguration> for Vec<i8> {
    fn from(c: SpinConfiguration) -> Self {
        c.0
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Negates every spin.
pub fn global_flip(config: &SpinConfiguration) -> SpinConfiguration {
    SpinConfiguration(config.0.iter().map(|s| -s).collect())
}

/// Number of positions at which two spin lists differ.
pub fn hamming_distance(a: &[i8], b: &[i8]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// The cluster list `R`: groups of bits that share one uncertainty value.
///
/// Every bit must belong to at least one cluster, clusters are non-empty
/// and no two clusters contain the same set of bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSet {
    n: usize,
    clusters: Vec<Vec<usize>>,
}

impl ClusterSet {
    pub fn new(n: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut covered = vec![false; n];
        let mut out = Vec::with_capacity(clusters.len());
        for (c, mut members) in clusters.into_iter().enumerate() {
            if members.is_empty() {
                return Err(Error::Domain(format!("cluster {c} is empty")));
            }
            members.sort_unstable();
            members.dedup();
            if let Some(&bad) = members.iter().find(|&&m| m >= n) {
                return Err(Error::Index { index: bad, len: n });
            }
            if !seen.insert(members.clone()) {
                return Err(Error::Domain(format!("cluster {c} duplicates an earlier cluster")));
            }
            for &m in &members {
                covered[m] = true;
            }
            out.push(members);
        }
        if let Some(bit) = covered.iter().position(|c| !c) {
            return Err(Error::Domain(format!("bit {bit} belongs to no cluster")));
        }
        Ok(Self { n, clusters: out })
    }

    /// One singleton cluster per bit, in bit order.
    pub fn singletons(n: usize) -> Self {
        Self {
            n,
            clusters: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn n_bits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.clusters[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.clusters.iter().map(Vec::as_slice)
    }

    pub fn all_singletons(&self) -> bool {
        self.clusters.iter().all(|c| c.len() == 1)
    }

    pub fn as_lists(&self) -> &[Vec<usize>] {
        &self.clusters
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(v: &[i8]) -> SpinConfiguration {
        SpinConfiguration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_spin_values() {
        assert!(SpinConfiguration::new(vec![1, 0]).is_err());
        assert!(serde_json::from_str::<SpinConfiguration>("[1,2]").is_err());
        assert_eq!(
            serde_json::from_str::<SpinConfiguration>("[1,-1]").unwrap(),
            cfg(&[1, -1])
        );
    }

    #[test]
    fn flip_examples() {
        assert_eq!(global_flip(&cfg(&[1, -1])), cfg(&[-1, 1]));
        let x = cfg(&[1, 1, -1, 1]);
        assert_eq!(global_flip(&global_flip(&x)), x);
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&[1, 1, 1], &[1, -1, 1]).unwrap(), 1);
        let x = [1, -1, -1, 1, 1];
        assert_eq!(hamming_distance(&x, &x).unwrap(), 0);
        let fx = global_flip(&cfg(&x));
        assert_eq!(hamming_distance(&x, fx.as_slice()).unwrap(), x.len());
        assert!(matches!(
            hamming_distance(&[1], &[1, 1]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn mask_roundtrip() {
        let c = SpinConfiguration::from_mask(3, 0b101);
        assert_eq!(c.as_slice(), &[-1, 1, -1]);
    }

    #[test]
    fn cluster_validation() {
        assert!(ClusterSet::new(2, vec![vec![0], vec![1], vec![0, 1]]).is_ok());
        assert!(ClusterSet::new(2, vec![vec![0], vec![]]).is_err());
        assert!(ClusterSet::new(2, vec![vec![0], vec![1], vec![1, 0]])
            .map(|r| r.len())
            .is_ok());
        assert!(ClusterSet::new(2, vec![vec![0, 1], vec![1, 0]]).is_err());
        assert!(ClusterSet::new(2, vec![vec![0]]).is_err());
        assert!(ClusterSet::new(2, vec![vec![0], vec![2]]).is_err());
        let r = ClusterSet::singletons(4);
        assert_eq!(r.len(), 4);
        assert!(r.all_singletons());
    }
}
