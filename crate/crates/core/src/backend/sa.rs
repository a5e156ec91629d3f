//! Classical simulated annealing driven by a belief.
//!
//! The base temperature cools geometrically from `t_hot` to
//! `params.temperature` over `2 tau` sweeps. Cluster `c` proposes a flip of
//! all its bits at temperature `2 P_c` times the base temperature, so a
//! cluster with `P = 0.5` anneals normally and one with `P = 0` never moves.

use rand::Rng;
use rayon::prelude::*;

use super::AnnealParams;
use crate::belief::{Belief, CandidateSet};
use crate::error::{Error, Result};
use crate::ising::{IsingProblem, SpinConfiguration};
use crate::seed::{derive_seed, rng_from};

pub fn sa_sample(
    problem: &IsingProblem,
    initial: &SpinConfiguration,
    belief: &Belief,
    params: &AnnealParams,
) -> Result<CandidateSet> {
    params.validate()?;
    let n = problem.n();
    for got in [initial.len(), belief.n_bits()] {
        if got != n {
            return Err(Error::Dimension { expected: n, got });
        }
    }
    let bit_p = belief.bit_uncertainty();
    let pinned: Vec<bool> = bit_p.iter().map(|&p| p == 0.0).collect();
    let moves: Vec<(Vec<usize>, f64)> = belief
        .clusters()
        .iter()
        .zip(belief.uncertainty())
        .filter(|(members, &p)| p > 0.0 && members.iter().all(|&m| !pinned[m]))
        .map(|(members, &p)| (members.to_vec(), 2.0 * p))
        .collect();

    let sweeps = 2 * params.tau;
    let t_cold = params.temperature;
    let t_hot = params.t_hot.unwrap_or_else(|| default_hot_temperature(problem)).max(t_cold);
    let temperature = |k: usize| {
        if sweeps <= 1 {
            t_cold
        } else {
            t_hot * (t_cold / t_hot).powf(k as f64 / (sweeps - 1) as f64)
        }
    };

    let configs: Vec<SpinConfiguration> = (0..params.reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = rng_from(derive_seed(params.seed, read as u64));
            let mut spins = initial.as_slice().to_vec();
            for i in 0..n {
                if bit_p[i] >= 0.5 {
                    spins[i] = if rng.random_bool(0.5) { 1 } else { -1 };
                }
            }
            for k in 0..sweeps {
                let base = temperature(k);
                for (members, factor) in &moves {
                    let t = factor * base;
                    let mut delta = 0.0;
                    for &m in members {
                        delta += problem.flip_delta(m, &spins);
                        spins[m] = -spins[m];
                    }
                    let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp();
                    if !accept {
                        for &m in members {
                            spins[m] = -spins[m];
                        }
                    }
                }
            }
            SpinConfiguration::from_vec_unchecked(spins)
        })
        .collect();
    CandidateSet::evaluate(problem, configs)
}

/// Twice the largest possible single-spin local field.
pub fn default_hot_temperature(problem: &IsingProblem) -> f64 {
    (0..problem.n())
        .map(|i| {
            problem.fields()[i].abs()
                + problem.neighbors(i).iter().map(|(_, w)| w.abs()).sum::<f64>()
        })
        .fold(0.0, f64::max)
        * 2.0
}
