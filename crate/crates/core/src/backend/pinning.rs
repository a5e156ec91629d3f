use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::ising::{ClusterSet, IsingProblem, SpinConfiguration};

/// A problem with its certain bits folded into fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub reduced: IsingProblem,
    /// `free[k]` is the full-problem index of reduced spin `k`.
    pub free: Vec<usize>,
    /// Pinned value per full-problem bit, `None` where the bit is free.
    pub pinned: Vec<Option<i8>>,
    /// The belief restricted to the free bits.
    pub belief: Belief,
    /// For each cluster of the reduced belief, its index in the original belief.
    pub kept_clusters: Vec<usize>,
}

impl Reduction {
    pub fn lift(&self, reduced: &SpinConfiguration) -> SpinConfiguration {
        debug_assert_eq!(reduced.len(), self.free.len());
        let mut full: Vec<i8> = self.pinned.iter().map(|p| p.unwrap_or(1)).collect();
        for (k, &i) in self.free.iter().enumerate() {
            full[i] = reduced.get(k);
        }
        SpinConfiguration::from_vec_unchecked(full)
    }

    pub fn is_identity(&self) -> bool {
        self.pinned.iter().all(Option::is_none)
    }
}

/// Removes every bit whose singleton cluster has `P = 0`, clamping it to `S`.
///
/// A multi-bit cluster with `P = 0` is rejected: a collective certainty has
/// no single-spin field representation.
pub fn apply_fixed_spins(problem: &IsingProblem, belief: &Belief) -> Result<Reduction> {
    let n = problem.n();
    if belief.n_bits() != n {
        return Err(Error::Dimension {
            expected: n,
            got: belief.n_bits(),
        });
    }
    for (c, members) in belief.clusters().iter().enumerate() {
        if members.len() > 1 && belief.uncertainty()[c] == 0.0 {
            return Err(Error::Unsupported(format!(
                "multi-bit cluster {c} has P = 0; only singleton clusters can be pinned"
            )));
        }
    }
    let bit_p = belief.bit_uncertainty();
    let values = belief.values();
    let pinned: Vec<Option<i8>> = (0..n)
        .map(|i| (bit_p[i] == 0.0).then(|| values.get(i)))
        .collect();

    let mut reduced = problem.clone();
    for i in (0..n).rev() {
        if let Some(v) = pinned[i] {
            reduced = reduced.fix_spin(i, v)?;
        }
    }

    let free: Vec<usize> = (0..n).filter(|&i| pinned[i].is_none()).collect();
    let mut position = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        position[i] = k;
    }
    let mut lists = Vec::new();
    let mut p = Vec::new();
    let mut kept_clusters = Vec::new();
    for (c, members) in belief.clusters().iter().enumerate() {
        if members.iter().all(|&m| pinned[m].is_none()) {
            lists.push(members.iter().map(|&m| position[m]).collect());
            p.push(belief.uncertainty()[c]);
            kept_clusters.push(c);
        }
    }
    let reduced_belief = Belief::new(
        ClusterSet::new(free.len(), lists)?,
        SpinConfiguration::from_vec_unchecked(values.select(&free)),
        p,
    )?;
    Ok(Reduction {
        reduced,
        free,
        pinned,
        belief: reduced_belief,
        kept_clusters,
    })
}
