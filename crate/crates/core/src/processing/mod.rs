//! Processing functions: candidate lists `{G, E}` in, beliefs `{S, P}` out.
//!
//! Signs use `sgn(0) = +1` throughout, matching the all-`+1` initial belief.

mod cluster;
mod genetic;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use cluster::{binomial_weight, cluster_uncertainty, EnergyWeight};
pub use genetic::{align_inversions, genetic_agreement, genetic_flatten, AlignMode};

use crate::belief::{Belief, CandidateSet};
use crate::error::{Error, Result};
use crate::ising::{ClusterSet, IsingProblem, SpinConfiguration};

/// Concatenates candidate sets in order; element `j` of set `k` lands at
/// `k * N_out + j`. All sets must have the same length.
pub fn flatten(sets: &[CandidateSet]) -> Result<CandidateSet> {
    let Some(first) = sets.first() else {
        return CandidateSet::new(vec![], vec![]);
    };
    let mut configs = Vec::with_capacity(sets.len() * first.len());
    let mut energies = Vec::with_capacity(sets.len() * first.len());
    for s in sets {
        if s.len() != first.len() {
            return Err(Error::Dimension {
                expected: first.len(),
                got: s.len(),
            });
        }
        configs.extend_from_slice(s.configs());
        energies.extend_from_slice(s.energies());
    }
    if let Some(c) = configs.iter().find(|c| c.len() != configs[0].len()) {
        return Err(Error::Dimension {
            expected: configs[0].len(),
            got: c.len(),
        });
    }
    CandidateSet::new(configs, energies)
}

/// Keeps the first occurrence of each configuration.
pub fn unique(set: &CandidateSet) -> Result<CandidateSet> {
    let mut seen: HashMap<&SpinConfiguration, f64> = HashMap::new();
    let mut configs = Vec::new();
    let mut energies = Vec::new();
    for (c, &e) in set.configs().iter().zip(set.energies()) {
        match seen.get(c) {
            Some(&prev) => {
                if (prev - e).abs() > 1e-9 * (1.0 + prev.abs()) {
                    return Err(Error::InconsistentEnergy { a: prev, b: e });
                }
            }
            None => {
                seen.insert(c, e);
                configs.push(c.clone());
                energies.push(e);
            }
        }
    }
    CandidateSet::new(configs, energies)
}

/// The no-information belief: every `P = 0.5`, every `S = +1`.
pub fn f_init(clusters: &ClusterSet) -> Belief {
    Belief::uninformed(clusters.clone())
}

fn check_bits(set: &CandidateSet, clusters: &ClusterSet) -> Result<()> {
    if set.is_empty() {
        return Err(Error::EmptyInput("candidate list"));
    }
    for c in set.configs() {
        if c.len() != clusters.n_bits() {
            return Err(Error::Dimension {
                expected: clusters.n_bits(),
                got: c.len(),
            });
        }
    }
    Ok(())
}

fn weighted_signs(set: &CandidateSet, w: &[f64]) -> SpinConfiguration {
    let n = set.configs()[0].len();
    let mut sum = vec![0.0f64; n];
    for (c, &wj) in set.configs().iter().zip(w) {
        for (acc, &s) in sum.iter_mut().zip(c.as_slice()) {
            *acc += wj * s as f64;
        }
    }
    SpinConfiguration::from_vec_unchecked(sum.iter().map(|&x| if x >= 0.0 { 1 } else { -1 }).collect())
}

/// Signs by weighted vote; singleton uncertainty by the weighted fraction
/// of candidates disagreeing with the vote; multi-bit clusters through
/// [`cluster_uncertainty`].
fn weighted_belief(set: &CandidateSet, clusters: &ClusterSet, weight: &EnergyWeight) -> Result<Belief> {
    check_bits(set, clusters)?;
    let w = weight.weights(set.energies())?;
    let z: f64 = w.iter().sum();
    let s = weighted_signs(set, &w);
    let p = clusters
        .iter()
        .map(|members| {
            if let [i] = members {
                let wrong: f64 = set
                    .configs()
                    .iter()
                    .zip(&w)
                    .filter(|(c, _)| c.get(*i) != s.get(*i))
                    .map(|(_, wj)| wj)
                    .sum();
                Ok((wrong / z).min(0.5))
            } else {
                cluster_uncertainty(set, &s, members, weight)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Belief::new(clusters.clone(), s, p)
}

/// Majority vote and disagreement fraction over all candidates.
pub fn belief_raw(set: &CandidateSet, clusters: &ClusterSet) -> Result<Belief> {
    weighted_belief(set, clusters, &EnergyWeight::Uniform)
}

fn elite_subset(set: &CandidateSet, e_elite: f64) -> Result<CandidateSet> {
    let (configs, energies): (Vec<_>, Vec<_>) = set
        .configs()
        .iter()
        .zip(set.energies())
        .filter(|(_, &e)| e < e_elite)
        .map(|(c, &e)| (c.clone(), e))
        .unzip();
    if configs.is_empty() {
        return Err(Error::EmptyEliteSet { threshold: e_elite });
    }
    CandidateSet::new(configs, energies)
}

/// [`belief_raw`] restricted to candidates with `E < e_elite`.
pub fn belief_elite(set: &CandidateSet, clusters: &ClusterSet, e_elite: f64) -> Result<Belief> {
    if set.is_empty() {
        return Err(Error::EmptyInput("candidate list"));
    }
    belief_raw(&elite_subset(set, e_elite)?, clusters)
}

/// Fraction of elite candidates *agreeing* with the elite majority, per bit.
/// This is the literal reading of the elite uncertainty formula; it is at
/// least 0.5 whenever the majority is well defined.
pub fn elite_agreement_fraction(set: &CandidateSet, e_elite: f64) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::EmptyInput("candidate list"));
    }
    let elite = elite_subset(set, e_elite)?;
    let s = weighted_signs(&elite, &vec![1.0; elite.len()]);
    let n = elite.len() as f64;
    Ok((0..s.len())
        .map(|i| elite.configs().iter().filter(|c| c.get(i) == s.get(i)).count() as f64 / n)
        .collect())
}

/// Boltzmann-weighted vote over the unique candidates at temperature `t`.
pub fn belief_thermal(set: &CandidateSet, clusters: &ClusterSet, t: f64) -> Result<Belief> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("thermal temperature {t} must be positive")));
    }
    check_bits(set, clusters)?;
    weighted_belief(&unique(set)?, clusters, &EnergyWeight::Thermal { t })
}

/// Pins bits unanimous across the elite subset (`P = 0`); every other bit
/// gets `P = 0.5`. Only singleton clusters are supported, since a pinned bit
/// must not also sit in an uncertain multi-bit cluster.
pub fn f_fix(set: &CandidateSet, clusters: &ClusterSet, e_elite: f64) -> Result<Belief> {
    if !clusters.all_singletons() {
        return Err(Error::Unsupported("fix heuristic needs singleton clusters".into()));
    }
    check_bits(set, clusters)?;
    let elite = elite_subset(set, e_elite)?;
    let s = weighted_signs(&elite, &vec![1.0; elite.len()]);
    let p = clusters
        .iter()
        .map(|m| {
            let i = m[0];
            if elite.configs().iter().all(|c| c.get(i) == s.get(i)) {
                0.0
            } else {
                0.5
            }
        })
        .collect();
    Belief::new(clusters.clone(), s, p)
}

/// Best candidate as `S`, uniform uncertainty `p_next`.
pub fn f_local_search(set: &CandidateSet, clusters: &ClusterSet, p_next: f64) -> Result<Belief> {
    if !(0.0..=0.5).contains(&p_next) {
        return Err(Error::Domain(format!("local search uncertainty {p_next} outside [0, 0.5]")));
    }
    check_bits(set, clusters)?;
    let (best, _) = set.best().expect("non-empty");
    Belief::uniform(clusters.clone(), best.clone(), p_next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EliteConvention {
    /// Disagreement fraction over the elite subset.
    #[default]
    Disagreement,
    /// Agreement fraction, clamped to 0.5.
    Literal,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// A processing function as named in protocol files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fn", rename_all = "snake_case", deny_unknown_fields)]
pub enum Heuristic {
    Init {},
    Raw {},
    Elite {
        #[serde(rename = "E_elite")]
        e_elite: f64,
        #[serde(default, skip_serializing_if = "is_default")]
        convention: EliteConvention,
    },
    Thermal {
        #[serde(rename = "T")]
        t: f64,
    },
    Fix {
        #[serde(rename = "E_elite")]
        e_elite: f64,
    },
    /// Either a fixed `p` or a ladder indexed by round (the last entry
    /// repeats once the ladder runs out).
    LocalSearch {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_ladder: Option<Vec<f64>>,
    },
    GeneticAgreement {
        p_agree: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        align: Option<AlignMode>,
    },
    GeneticFlatten {
        inner: Box<Heuristic>,
    },
    /// Best candidate with `P = 0`; a terminal read-out.
    Best {},
}

impl Heuristic {
    /// Local search with uncertainty `p_ladder[round]`.
    pub fn ladder(p_ladder: Vec<f64>) -> Self {
        Heuristic::LocalSearch {
            p: None,
            p_ladder: Some(p_ladder),
        }
    }

    /// Minimum number of candidate-set inputs.
    pub fn min_inputs(&self) -> usize {
        match self {
            Heuristic::Init {} => 0,
            Heuristic::GeneticAgreement { .. } | Heuristic::GeneticFlatten { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        match self {
            Heuristic::Thermal { t } if !(*t > 0.0) => bad(format!("thermal T = {t} must be positive")),
            Heuristic::LocalSearch { p, p_ladder } => {
                let ps: Vec<f64> = match (p, p_ladder) {
                    (Some(p), None) => vec![*p],
                    (None, Some(l)) if !l.is_empty() => l.clone(),
                    (None, Some(_)) => return bad("empty p_ladder".into()),
                    _ => return bad("local_search needs exactly one of p or p_ladder".into()),
                };
                match ps.iter().find(|p| !(0.0..=0.5).contains(*p)) {
                    Some(p) => bad(format!("local search p = {p} outside [0, 0.5]")),
                    None => Ok(()),
                }
            }
            Heuristic::GeneticAgreement { p_agree, .. } if !(*p_agree > 0.0 && *p_agree < 0.5) => {
                bad(format!("p_agree = {p_agree} outside (0, 0.5)"))
            }
            Heuristic::GeneticFlatten { inner } => match **inner {
                Heuristic::Init {} | Heuristic::GeneticAgreement { .. } | Heuristic::GeneticFlatten { .. } => {
                    bad("genetic_flatten needs a single-stream heuristic".into())
                }
                ref h => h.validate(),
            },
            _ => Ok(()),
        }
    }

    /// Applies the heuristic to one or more candidate sets. Single-stream
    /// heuristics see the flattened inputs.
    pub fn apply(
        &self,
        inputs: &[CandidateSet],
        clusters: &ClusterSet,
        problem: &IsingProblem,
        round: usize,
    ) -> Result<Belief> {
        if inputs.len() < self.min_inputs() {
            return Err(Error::Arity(format!(
                "{self:?} needs at least {} inputs, got {}",
                self.min_inputs(),
                inputs.len()
            )));
        }
        match self {
            Heuristic::Init {} => Ok(f_init(clusters)),
            Heuristic::GeneticAgreement { p_agree, align } => {
                genetic_agreement(inputs, clusters, *p_agree, align.as_ref().map(|a| (a, problem)))
            }
            Heuristic::GeneticFlatten { inner } => genetic_flatten(inputs, clusters, |g| inner.apply_single(g, clusters, round)),
            h => h.apply_single(&flatten(inputs)?, clusters, round),
        }
    }

    fn apply_single(&self, set: &CandidateSet, clusters: &ClusterSet, round: usize) -> Result<Belief> {
        match self {
            Heuristic::Raw {} => belief_raw(set, clusters),
            Heuristic::Elite {
                e_elite,
                convention: EliteConvention::Disagreement,
            } => belief_elite(set, clusters, *e_elite),
            Heuristic::Elite {
                e_elite,
                convention: EliteConvention::Literal,
            } => {
                let b = belief_elite(set, clusters, *e_elite)?;
                if !clusters.all_singletons() {
                    return Err(Error::Unsupported("literal elite convention needs singleton clusters".into()));
                }
                let agree = elite_agreement_fraction(set, *e_elite)?;
                let p = clusters.iter().map(|m| agree[m[0]].min(0.5)).collect();
                Belief::new(clusters.clone(), b.values().clone(), p)
            }
            Heuristic::Thermal { t } => belief_thermal(set, clusters, *t),
            Heuristic::Fix { e_elite } => f_fix(set, clusters, *e_elite),
            Heuristic::LocalSearch { p, p_ladder } => {
                let p = match (p, p_ladder) {
                    (Some(p), _) => *p,
                    (None, Some(l)) if !l.is_empty() => l[round.min(l.len() - 1)],
                    _ => return Err(Error::InvalidParams("local_search needs p or p_ladder".into())),
                };
                f_local_search(set, clusters, p)
            }
            Heuristic::Best {} => {
                check_bits(set, clusters)?;
                Belief::uniform(clusters.clone(), set.best().expect("non-empty").0.clone(), 0.0)
            }
            Heuristic::Init {} | Heuristic::GeneticAgreement { .. } | Heuristic::GeneticFlatten { .. } => {
                Err(Error::Unsupported(format!("{self:?} is not a single-stream heuristic")))
            }
        }
    }
}
