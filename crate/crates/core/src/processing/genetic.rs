use rand::Rng;
use serde::{Deserialize, Serialize};

use super::flatten;
use crate::belief::{Belief, CandidateSet};
use crate::error::{Error, Result};
use crate::ising::{global_flip, ClusterSet, IsingProblem, SpinConfiguration};
use crate::seed::rng_from;

/// How to break the global-flip symmetry between candidate sets before
/// combining them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlignMode {
    /// Flip any set holding more `-1` than `+1` entries overall.
    Majority {},
    /// Choose the flip pattern maximizing pairwise correlation of the sets'
    /// best candidates: exhaustive up to 12 sets, annealed beyond.
    Search {
        #[serde(default)]
        seed: u64,
    },
}

const EXHAUSTIVE_SETS: usize = 12;

fn flip_set(set: &CandidateSet) -> CandidateSet {
    CandidateSet::new(set.configs().iter().map(global_flip).collect(), set.energies().to_vec())
        .expect("shape preserved")
}

/// Aligns candidate sets under the global flip. Problems with any nonzero
/// field have no flip symmetry and are returned unchanged.
pub fn align_inversions(sets: &[CandidateSet], problem: &IsingProblem, mode: &AlignMode) -> Result<Vec<CandidateSet>> {
    if !problem.is_field_free() || sets.len() < 2 {
        return Ok(sets.to_vec());
    }
    let flips = match mode {
        AlignMode::Majority {} => sets
            .iter()
            .map(|s| {
                let total: i64 = s
                    .configs()
                    .iter()
                    .flat_map(|c| c.as_slice())
                    .map(|&x| x as i64)
                    .sum();
                total < 0
            })
            .collect(),
        AlignMode::Search { seed } => search_flips(sets, *seed)?,
    };
    Ok(sets
        .iter()
        .zip(flips)
        .map(|(s, f)| if f { flip_set(s) } else { s.clone() })
        .collect())
}

fn correlations(sets: &[CandidateSet]) -> Result<Vec<Vec<f64>>> {
    let best: Vec<&SpinConfiguration> = sets
        .iter()
        .map(|s| s.best().map(|b| b.0).ok_or(Error::EmptyInput("candidate set")))
        .collect::<Result<_>>()?;
    let k = best.len();
    let mut c = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let dot: i64 = best[a]
                .as_slice()
                .iter()
                .zip(best[b].as_slice())
                .map(|(&x, &y)| (x * y) as i64)
                .sum();
            c[a][b] = dot as f64;
            c[b][a] = dot as f64;
        }
    }
    Ok(c)
}

fn score(c: &[Vec<f64>], flips: &[bool]) -> f64 {
    let sign = |f: bool| if f { -1.0 } else { 1.0 };
    let mut s = 0.0;
    for a in 0..flips.len() {
        for b in a + 1..flips.len() {
            s += sign(flips[a]) * sign(flips[b]) * c[a][b];
        }
    }
    s
}

fn search_flips(sets: &[CandidateSet], seed: u64) -> Result<Vec<bool>> {
    let c = correlations(sets)?;
    let k = sets.len();
    if k <= EXHAUSTIVE_SETS {
        let mut best = (vec![false; k], f64::NEG_INFINITY);
        for mask in 0u32..1 << k {
            let flips: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
            let s = score(&c, &flips);
            if s > best.1 {
                best = (flips, s);
            }
        }
        return Ok(best.0);
    }

    let mut rng = rng_from(seed);
    let mut flips = vec![false; k];
    let mut current = score(&c, &flips);
    let mut best = (flips.clone(), current);
    let scale = c.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let steps = 200 * k;
    for step in 0..steps {
        let t = scale * (1e-3f64).powf(step as f64 / steps as f64);
        let i = rng.random_range(0..k);
        // flipping set i negates its contribution to every pair it belongs to
        let sign_i = if flips[i] { -1.0 } else { 1.0 };
        let mut field = 0.0;
        for j in (0..k).filter(|&j| j != i) {
            field += if flips[j] { -1.0 } else { 1.0 } * c[i][j];
        }
        let delta = -2.0 * sign_i * field;
        if delta >= 0.0 || rng.random::<f64>() < (delta / t).exp() {
            flips[i] = !flips[i];
            current += delta;
            if current > best.1 {
                best = (flips.clone(), current);
            }
        }
    }
    Ok(best.0)
}

/// Recombines parents: takes each parent's best candidate; bits on which
/// all of them agree get uncertainty `p_agree`, the rest 0.5. `S` comes
/// from the lowest-energy parent. Multi-bit clusters count as agreeing only
/// if all their bits do.
pub fn genetic_agreement(
    parents: &[CandidateSet],
    clusters: &ClusterSet,
    p_agree: f64,
    align: Option<(&AlignMode, &IsingProblem)>,
) -> Result<Belief> {
    if parents.len() < 2 {
        return Err(Error::Arity(format!("genetic combination needs at least 2 parents, got {}", parents.len())));
    }
    if !(p_agree > 0.0 && p_agree < 0.5) {
        return Err(Error::Domain(format!("p_agree = {p_agree} outside (0, 0.5)")));
    }
    let aligned;
    let parents = match align {
        Some((mode, problem)) => {
            aligned = align_inversions(parents, problem, mode)?;
            &aligned[..]
        }
        None => parents,
    };
    let best: Vec<(&SpinConfiguration, f64)> = parents
        .iter()
        .map(|p| p.best().ok_or(Error::EmptyInput("parent candidate set")))
        .collect::<Result<_>>()?;
    let n = clusters.n_bits();
    if let Some((c, _)) = best.iter().find(|(c, _)| c.len() != n) {
        return Err(Error::Dimension { expected: n, got: c.len() });
    }
    let lead = best
        .iter()
        .enumerate()
        .fold(0, |k, (j, b)| if b.1 < best[k].1 { j } else { k });
    let agrees: Vec<bool> = (0..n)
        .map(|i| best.iter().all(|(c, _)| c.get(i) == best[0].0.get(i)))
        .collect();
    let p = clusters
        .iter()
        .map(|m| if m.iter().all(|&i| agrees[i]) { p_agree } else { 0.5 })
        .collect();
    Belief::new(clusters.clone(), best[lead].0.clone(), p)
}

/// Applies a single-stream processing function to the concatenated parents.
pub fn genetic_flatten<F>(parents: &[CandidateSet], clusters: &ClusterSet, single: F) -> Result<Belief>
where
    F: Fn(&CandidateSet) -> Result<Belief>,
{
    if parents.len() < 2 {
        return Err(Error::Arity(format!("genetic combination needs at least 2 parents, got {}", parents.len())));
    }
    let flat = flatten(parents)?;
    if flat.configs().iter().any(|c| c.len() != clusters.n_bits()) {
        return Err(Error::Dimension {
            expected: clusters.n_bits(),
            got: flat.configs()[0].len(),
        });
    }
    single(&flat)
}
