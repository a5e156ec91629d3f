//! Inference primitives: samplers mapping a belief `{S, P, R}` to candidates `{G, E}`.

mod pinning;
mod piqa;
mod sa;
mod schedule;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use pinning::{apply_fixed_spins, Reduction};
pub use piqa::piqa_sample;
pub use sa::{default_hot_temperature, sa_sample};
pub use schedule::{build_schedule, ScheduleSpec};

use crate::belief::{Belief, CandidateSet};
use crate::bp::{bp_as_primitive, BpParams};
use crate::error::{Error, Result};
use crate::ising::{IsingProblem, SpinConfiguration};
use crate::uncertainty::{ScheduleConfig, ScheduleFunctions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealParams {
    pub temperature: f64,
    /// Sweeps per leg of the reverse-anneal triangle.
    pub tau: usize,
    #[serde(default = "one")]
    pub trotter_slices: usize,
    pub reads: usize,
    #[serde(default)]
    pub seed: u64,
    /// Starting temperature of the classical annealer; defaults to twice the
    /// largest local field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_hot: Option<f64>,
}

fn one() -> usize {
    1
}

impl AnnealParams {
    /// `T = 0.8246`, `tau = 20`, 30 Trotter slices, 1001 reads.
    pub fn standard() -> Self {
        Self {
            temperature: 0.8246,
            tau: 20,
            trotter_slices: 30,
            reads: 1001,
            seed: 0,
            t_hot: None,
        }
    }

    pub fn with_reads(mut self, reads: usize) -> Self {
        self.reads = reads;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParams(format!("temperature {} must be positive", self.temperature)));
        }
        if self.trotter_slices == 0 {
            return Err(Error::InvalidParams("trotter_slices must be at least one".into()));
        }
        if self.reads == 0 {
            return Err(Error::InvalidParams("reads must be at least one".into()));
        }
        if self.tau == 0 {
            return Err(Error::InvalidParams("tau must be at least one sweep".into()));
        }
        if let Some(t) = self.t_hot {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParams(format!("t_hot {t} must be positive")));
            }
        }
        Ok(())
    }
}

/// A resolved backend, ready to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    /// Path-integral annealing with per-cluster reverse-anneal targets and
    /// optional per-cluster freeze offsets (in sweeps).
    Piqa {
        schedule: ScheduleFunctions,
        offsets: Option<Vec<f64>>,
    },
    Sa,
    Bp(BpParams),
}

impl Backend {
    pub fn piqa_linear() -> Self {
        Backend::Piqa {
            schedule: ScheduleFunctions::linear(),
            offsets: None,
        }
    }
}

/// Backend selection as written in a protocol file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    Piqa {
        #[serde(default)]
        schedule: ScheduleConfig,
        #[serde(default)]
        t_phys: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offsets: Option<Vec<f64>>,
    },
    Sa {},
    Bp {
        temperature: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_iters: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        damping: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Piqa {
            schedule: ScheduleConfig::default(),
            t_phys: 0.0,
            offsets: None,
        }
    }
}

impl BackendConfig {
    pub fn resolve(&self) -> Result<Backend> {
        Ok(match self {
            BackendConfig::Piqa {
                schedule,
                t_phys,
                offsets,
            } => Backend::Piqa {
                schedule: schedule.load(*t_phys)?,
                offsets: offsets.clone(),
            },
            BackendConfig::Sa {} => Backend::Sa,
            BackendConfig::Bp {
                temperature,
                max_iters,
                damping,
                tolerance,
            } => {
                let mut p = BpParams::at_temperature(*temperature);
                if let Some(m) = max_iters {
                    p.max_iters = *m;
                }
                if let Some(d) = damping {
                    p.damping = *d;
                }
                if let Some(t) = tolerance {
                    p.tolerance = *t;
                }
                p.validate()?;
                Backend::Bp(p)
            }
        })
    }
}

/// Runs one inference-primitive call: pins certain bits, samples the reduced
/// problem, lifts the reads back and scores them on the full problem.
pub fn infer(backend: &Backend, belief: &Belief, problem: &IsingProblem, params: &AnnealParams) -> Result<CandidateSet> {
    params.validate()?;
    if belief.n_bits() != problem.n() {
        return Err(Error::Dimension {
            expected: problem.n(),
            got: belief.n_bits(),
        });
    }
    if let Backend::Bp(bp) = backend {
        return bp_as_primitive(problem, belief, bp, params.reads, params.seed);
    }

    let red = apply_fixed_spins(problem, belief)?;
    let reads: Vec<SpinConfiguration> = if red.reduced.n() == 0 {
        vec![SpinConfiguration::uniform(0, 1); params.reads]
    } else {
        let initial = red.belief.values().clone();
        match backend {
            Backend::Piqa { schedule, offsets } => {
                let offsets = match offsets {
                    Some(o) if o.len() != belief.clusters().len() => {
                        return Err(Error::Dimension {
                            expected: belief.clusters().len(),
                            got: o.len(),
                        })
                    }
                    Some(o) => Some(red.kept_clusters.iter().map(|&c| o[c]).collect::<Vec<_>>()),
                    None => None,
                };
                let spec = build_schedule(&red.belief, schedule, offsets.as_deref(), params.tau)?;
                piqa_sample(&red.reduced, &initial, &spec, params)?.into_parts().0
            }
            Backend::Sa => sa_sample(&red.reduced, &initial, &red.belief, params)?.into_parts().0,
            Backend::Bp(_) => unreachable!(),
        }
    };
    CandidateSet::evaluate(problem, reads.iter().map(|c| red.lift(c)).collect())
}

/// One row per read: `read,energy,s0,...,s{n-1}`, preceded by a comment line.
pub fn reads_csv(set: &CandidateSet, config_comment: &str) -> String {
    let n = set.configs().first().map_or(0, SpinConfiguration::len);
    let mut out = String::new();
    let _ = writeln!(out, "# {config_comment}");
    out.push_str("read,energy");
    for i in 0..n {
        let _ = write!(out, ",s{i}");
    }
    out.push('\n');
    for (k, (c, e)) in set.configs().iter().zip(set.energies()).enumerate() {
        let _ = write!(out, "{k},{e}");
        for s in c.as_slice() {
            let _ = write!(out, ",{s}");
        }
        out.push('\n');
    }
    out
}
