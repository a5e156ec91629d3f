//! Pool bookkeeping between rounds: Boltzmann parent selection, hybrid
//! replacement and replica exchange. These form the serial barrier between
//! rounds and draw from a single per-round generator.

use rand::Rng;

use super::graph::PexConvention;
use super::record::{Event, EventKind};
use crate::belief::{Belief, CandidateSet};
use crate::error::{Error, Result};
use crate::ising::SpinConfiguration;

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub belief: Belief,
    pub candidates: CandidateSet,
    pub t_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoolState {
    pub members: Vec<Member>,
    pub best: Option<(SpinConfiguration, f64)>,
    pub round: usize,
}

impl PoolState {
    /// Folds a candidate set into the best-so-far; true if it improved.
    pub fn observe(&mut self, set: &CandidateSet) -> bool {
        let Some((c, e)) = set.best() else { return false };
        if self.best.as_ref().is_none_or(|b| e < b.1) {
            self.best = Some((c.clone(), e));
            true
        } else {
            false
        }
    }

    pub fn best_energy(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.1)
    }

    pub fn min_energies(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.candidates.min_energy()).collect()
    }
}

/// `exp(-(E_j - min E) / T)`; the shift cancels after normalization.
pub fn boltzmann_weights(energies: &[f64], t_eff: f64) -> Vec<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    energies.iter().map(|e| (-(e - e0) / t_eff).exp()).collect()
}

pub(crate) fn draw_weighted<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Draws `k` distinct members one at a time with probability proportional
/// to `exp(-min E_j / T_eff)`, renormalizing over those left after each draw.
pub fn pa_select_parents<R: Rng>(min_energies: &[f64], t_eff: f64, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k > min_energies.len() {
        return Err(Error::Arity(format!("cannot draw {k} parents from {} members", min_energies.len())));
    }
    if !(t_eff > 0.0) {
        return Err(Error::Domain(format!("T_eff = {t_eff} must be positive")));
    }
    let mut weights = boltzmann_weights(min_energies, t_eff);
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let i = draw_weighted(&weights, rng);
        chosen.push(i);
        weights[i] = 0.0;
    }
    Ok(chosen)
}

/// `min(1, exp((1/T_a - 1/T_b)(E_a - E_b)))`.
pub fn swap_probability(t_a: f64, e_a: f64, t_b: f64, e_b: f64) -> f64 {
    ((1.0 / t_a - 1.0 / t_b) * (e_a - e_b)).exp().min(1.0)
}

/// One exchange sweep over adjacent temperature pairs, coldest first.
/// Members are laid out temperature-major with `per_temperature` members
/// per rung; the k-th member of a rung pairs with the k-th of the next.
pub fn pt_swap<R: Rng>(pool: &mut PoolState, per_temperature: usize, rng: &mut R, events: &mut Vec<Event>) {
    let rungs = pool.members.len() / per_temperature;
    for r in 0..rungs.saturating_sub(1) {
        for k in 0..per_temperature {
            let a = r * per_temperature + k;
            let b = a + per_temperature;
            let (ta, tb) = (pool.members[a].t_eff, pool.members[b].t_eff);
            let (ea, eb) = (pool.members[a].candidates.min_energy(), pool.members[b].candidates.min_energy());
            let p = swap_probability(ta, ea, tb, eb);
            let accepted = p >= 1.0 || rng.random::<f64>() < p;
            events.push(Event {
                round: pool.round,
                member: a,
                t_eff: Some(ta),
                min_energy: ea,
                kind: EventKind::Swap {
                    partner: b,
                    p_swap: p,
                    accepted,
                },
            });
            if accepted {
                let (lo, hi) = pool.members.split_at_mut(b);
                std::mem::swap(&mut lo[a].candidates, &mut hi[0].candidates);
                std::mem::swap(&mut lo[a].belief, &mut hi[0].belief);
            }
        }
    }
}

pub fn replacement_probability(min_hybrid: f64, min_member: f64, t_eff: f64, convention: PexConvention) -> f64 {
    let x = match convention {
        PexConvention::Literal => (min_hybrid - min_member) / t_eff,
        PexConvention::Metropolis => (min_member - min_hybrid) / t_eff,
    };
    x.exp().min(1.0)
}

/// Output of a hybridization-pool call.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridOutput {
    /// Ladder rung the parents came from.
    pub source: usize,
    pub t_eff: f64,
    pub belief: Belief,
    pub candidates: CandidateSet,
}

/// Offers each hybrid output, coldest source first, to the main-pool members
/// in order of increasing `T_eff` (ties by index). The first accepted
/// attempt replaces that member; an output nobody accepts is discarded.
pub fn hybrid_replace<R: Rng>(
    pool: &mut PoolState,
    mut outputs: Vec<HybridOutput>,
    convention: PexConvention,
    rng: &mut R,
    events: &mut Vec<Event>,
) {
    outputs.sort_by(|a, b| a.t_eff.total_cmp(&b.t_eff));
    let mut order: Vec<usize> = (0..pool.members.len()).collect();
    order.sort_by(|&a, &b| pool.members[a].t_eff.total_cmp(&pool.members[b].t_eff));
    for out in outputs {
        let e_hyb = out.candidates.min_energy();
        for &m in &order {
            let member = &pool.members[m];
            let p = replacement_probability(e_hyb, member.candidates.min_energy(), member.t_eff, convention);
            let accepted = p >= 1.0 || rng.random::<f64>() < p;
            events.push(Event {
                round: pool.round,
                member: m,
                t_eff: Some(member.t_eff),
                min_energy: e_hyb,
                kind: EventKind::Replace {
                    source: out.source,
                    p_ex: p,
                    accepted,
                },
            });
            if accepted {
                pool.members[m].belief = out.belief;
                pool.members[m].candidates = out.candidates;
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::ClusterSet;
    use crate::seed::rng_from;

    fn member(e: f64, t: f64) -> Member {
        let c = SpinConfiguration::uniform(1, 1);
        Member {
            belief: Belief::uninformed(ClusterSet::singletons(1)),
            candidates: CandidateSet::new(vec![c], vec![e]).unwrap(),
            t_eff: t,
        }
    }

    #[test]
    fn selection_is_distinct() {
        let mut rng = rng_from(1);
        for _ in 0..100 {
            let mut p = pa_select_parents(&[0.0, 1.0, 2.0, 3.0], 1.0, 4, &mut rng).unwrap();
            p.sort();
            assert_eq!(p, vec![0, 1, 2, 3]);
        }
        assert!(matches!(pa_select_parents(&[0.0], 1.0, 2, &mut rng), Err(Error::Arity(_))));
    }

    #[test]
    fn swap_probability_cases() {
        assert_eq!(swap_probability(0.5, -1.0, 1.0, -1.0), 1.0);
        assert!(swap_probability(0.5, -2.0, 1.0, -1.0) < 1.0);
        assert_eq!(swap_probability(0.5, -1.0, 1.0, -2.0), 1.0);
    }

    #[test]
    fn replacement_probability_cases() {
        let t = 0.7;
        assert_eq!(replacement_probability(-1.0, -2.0, t, PexConvention::Literal), 1.0);
        let p = replacement_probability(-2.0 - t * 2f64.ln(), -2.0, t, PexConvention::Literal);
        assert!((p - 0.5).abs() < 1e-12);
        assert_eq!(replacement_probability(-3.0, -2.0, t, PexConvention::Metropolis), 1.0);
    }

    #[test]
    fn worse_hybrid_replaces_coldest_member_first() {
        let mut pool = PoolState {
            members: vec![member(-1.0, 2.0), member(-5.0, 0.5), member(-3.0, 1.0)],
            best: None,
            round: 4,
        };
        let out = HybridOutput {
            source: 0,
            t_eff: 0.5,
            belief: Belief::uninformed(ClusterSet::singletons(1)),
            candidates: CandidateSet::new(vec![SpinConfiguration::uniform(1, -1)], vec![0.0]).unwrap(),
        };
        let mut events = vec![];
        hybrid_replace(&mut pool, vec![out], PexConvention::Literal, &mut rng_from(0), &mut events);
        assert_eq!(pool.members[1].candidates.min_energy(), 0.0);
        assert_eq!(events.len(), 1);
        assert!(matches!(events[0].kind, EventKind::Replace { accepted: true, p_ex, .. } if p_ex == 1.0));

        let before = pool.clone();
        hybrid_replace(&mut pool, vec![], PexConvention::Literal, &mut rng_from(0), &mut events);
        assert_eq!(pool, before);
    }

    #[test]
    fn equal_energies_always_swap() {
        let mut pool = PoolState {
            members: vec![member(-1.0, 0.5), member(-1.0, 1.0), member(-1.0, 2.0)],
            best: None,
            round: 0,
        };
        pool.members[0].candidates = CandidateSet::new(vec![SpinConfiguration::uniform(1, -1)], vec![-1.0]).unwrap();
        let mut events = vec![];
        pt_swap(&mut pool, 1, &mut rng_from(3), &mut events);
        assert_eq!(events.len(), 2);
        // the -1 state bubbles from the coldest rung to the hottest
        assert_eq!(pool.members[2].candidates.configs()[0].get(0), -1);
        assert_eq!(pool.members[0].t_eff, 0.5);
    }
}
