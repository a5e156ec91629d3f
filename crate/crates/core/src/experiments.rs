//! Instance families and the uncertainty-calibration histogram: how often a
//! bit's majority value is wrong, as a function of its raw uncertainty.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{infer, AnnealParams, Backend};
use crate::error::{Error, Result};
use crate::ising::{exhaustive_solve, generate_sk_fixed, ClusterSet, IsingProblem};
use crate::processing::{belief_raw, f_init};
use crate::seed::derive_seed;

/// `count` SK instances of `n` spins with the last spin fixed down; instance
/// `k` is seeded with `derive_seed(seed, k)`.
pub fn sk_fixed_family(n: usize, count: usize, seed: u64) -> Result<Vec<IsingProblem>> {
    (0..count).map(|k| generate_sk_fixed(n, derive_seed(seed, k as u64))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Config {
    pub instances: usize,
    /// Spins before fixing the last one.
    pub n: usize,
    pub bins: usize,
    pub seed: u64,
    /// Annealer settings; `reads` is the number of reads per instance.
    pub anneal: AnnealParams,
}

impl Fig2Config {
    /// 100 instances, `n = 12`, 201 reads, 10 bins.
    pub fn desk() -> Self {
        Self {
            instances: 100,
            n: 12,
            bins: 10,
            seed: 0,
            anneal: AnnealParams::standard().with_reads(201),
        }
    }

    /// 1500 instances, `n = 17`, 1001 reads.
    pub fn full_scale() -> Self {
        Self {
            instances: 1500,
            n: 17,
            ..Self::desk()
        }
        .with_reads(1001)
    }

    pub fn with_reads(mut self, reads: usize) -> Self {
        self.anneal.reads = reads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(Error::InvalidParams("instance count must be positive".into()));
        }
        if self.bins < 2 {
            return Err(Error::InvalidParams("at least two bins are required".into()));
        }
        self.anneal.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Bin {
    pub lo: f64,
    pub hi: f64,
    pub total: usize,
    pub agree: usize,
    pub disagree: usize,
}

impl Fig2Bin {
    pub fn error_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.disagree as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Result {
    pub bins: Vec<Fig2Bin>,
}

/// Bin `k` covers `[k w, (k+1) w)` with `w = 0.5 / bins`; the last bin is
/// closed so `P = 0.5` lands in it.
pub fn bin_index(p: f64, bins: usize) -> usize {
    ((p / (0.5 / bins as f64)) as usize).min(bins - 1)
}

/// Per-bit `(P_i, S_i agrees with the ground state)` for one instance, from
/// an uninformed PIQA call. Instances without a unique ground state are
/// rejected.
pub fn fig2_instance(problem: &IsingProblem, anneal: &AnnealParams) -> Result<Vec<(f64, bool)>> {
    let ground = exhaustive_solve(problem)?;
    if ground.configs.len() != 1 {
        return Err(Error::DegenerateGroundState {
            count: ground.configs.len(),
        });
    }
    let clusters = ClusterSet::singletons(problem.n());
    let reads = infer(&Backend::piqa_linear(), &f_init(&clusters), problem, anneal)?;
    let belief = belief_raw(&reads, &clusters)?;
    Ok((0..problem.n())
        .map(|i| (belief.uncertainty()[i], belief.values().get(i) == ground.configs[0].get(i)))
        .collect())
}

pub fn fig2(config: &Fig2Config) -> Result<Fig2Result> {
    config.validate()?;
    let problems = sk_fixed_family(config.n, config.instances, config.seed)?;
    let per_instance: Vec<Vec<(f64, bool)>> = problems
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let anneal = config.anneal.clone().with_seed(derive_seed(config.seed ^ 0xF162, k as u64));
            fig2_instance(p, &anneal)
        })
        .collect::<Result<_>>()?;

    let w = 0.5 / config.bins as f64;
    let mut bins: Vec<Fig2Bin> = (0..config.bins)
        .map(|k| Fig2Bin {
            lo: k as f64 * w,
            hi: (k + 1) as f64 * w,
            total: 0,
            agree: 0,
            disagree: 0,
        })
        .collect();
    for (p, agree) in per_instance.into_iter().flatten() {
        let b = &mut bins[bin_index(p, config.bins)];
        b.total += 1;
        if agree {
            b.agree += 1;
        } else {
            b.disagree += 1;
        }
    }
    Ok(Fig2Result { bins })
}

/// Columns `bin,p_lo,p_hi,total,agree,disagree,error_fraction`.
pub fn fig2_csv(result: &Fig2Result, config_comment: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {config_comment}");
    out.push_str("# every bit of every instance is counted, whether or not the ground state was sampled\n");
    out.push_str("bin,p_lo,p_hi,total,agree,disagree,error_fraction\n");
    for (k, b) in result.bins.iter().enumerate() {
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{},{}",
            b.lo,
            b.hi,
            b.total,
            b.agree,
            b.disagree,
            b.error_fraction()
        );
    }
    out
}
