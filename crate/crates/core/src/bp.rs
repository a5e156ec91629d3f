//! Loopy sum-product belief propagation on the pairwise Ising factor graph,
//! and conversion of the resulting marginals into beliefs.
//!
//! Messages are stored as cavity fields: `u[i->j]` is the effective field
//! spin `i` exerts on spin `j`, so that the message is proportional to
//! `exp(u s_j / T)`. The update is
//! `u[i->j] = T atanh(tanh(J_ij / T) tanh(H_{i\j} / T))`, exact on trees.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, CandidateSet};
use crate::error::{Error, Result};
use crate::ising::{ClusterSet, IsingProblem, SpinConfiguration};
use crate::seed::{derive_seed, rng_from};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpParams {
    pub temperature: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_max_iters() -> usize {
    1000
}
fn default_damping() -> f64 {
    0.3
}
fn default_tolerance() -> f64 {
    1e-12
}

impl BpParams {
    pub fn at_temperature(temperature: f64) -> Self {
        Self {
            temperature,
            max_iters: default_max_iters(),
            damping: default_damping(),
            tolerance: default_tolerance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParams(format!("BP temperature {} must be positive", self.temperature)));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidParams(format!("damping {} outside [0, 1)", self.damping)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParams("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Per-bit marginals `(b_i(+1), b_i(-1))`, normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl Marginals {
    pub fn new(plus: Vec<f64>, minus: Vec<f64>) -> Result<Self> {
        if plus.len() != minus.len() {
            return Err(Error::Dimension {
                expected: plus.len(),
                got: minus.len(),
            });
        }
        for (i, (p, m)) in plus.iter().zip(&minus).enumerate() {
            if !(*p >= 0.0 && *m >= 0.0 && p + m > 0.0) || !(p + m).is_finite() {
                return Err(Error::Domain(format!("marginal {i} = ({p}, {m}) is not a valid weight pair")));
            }
        }
        Ok(Self {
            plus,
            minus,
            converged: true,
            iterations: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }
}

/// `ln cosh x`, stable for large `|x|`.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn message(coupling: f64, cavity: f64, t: f64) -> f64 {
    if cavity.is_infinite() {
        return coupling * cavity.signum();
    }
    let (a, b) = (coupling / t, cavity / t);
    0.5 * t * (ln_cosh(a + b) - ln_cosh(a - b))
}

pub fn bp_run(problem: &IsingProblem, params: &BpParams) -> Result<Marginals> {
    bp_run_with_prior(problem, &vec![0.0; problem.n()], params)
}

/// Runs BP with extra per-bit fields added to the problem's own fields.
/// Infinite prior fields pin a bit.
pub fn bp_run_with_prior(problem: &IsingProblem, prior: &[f64], params: &BpParams) -> Result<Marginals> {
    params.validate()?;
    let n = problem.n();
    if prior.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: prior.len(),
        });
    }
    if prior.iter().any(|h| h.is_nan()) {
        return Err(Error::Domain("prior field is NaN".into()));
    }
    let t = params.temperature;
    let base: Vec<f64> = (0..n).map(|i| problem.fields()[i] + prior[i]).collect();

    // directed edge 2c is i->j, 2c+1 is j->i for coupler c = (i, j)
    let couplers = problem.couplers();
    let mut msgs = vec![0.0f64; 2 * couplers.len()];
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, cp) in couplers.iter().enumerate() {
        incoming[cp.j].push(2 * c);
        incoming[cp.i].push(2 * c + 1);
    }
    let total_field = |msgs: &[f64], i: usize| -> f64 {
        if base[i].is_infinite() {
            return base[i];
        }
        base[i] + incoming[i].iter().map(|&e| msgs[e]).sum::<f64>()
    };

    let mut converged = couplers.is_empty();
    let mut iterations = 0;
    while !converged && iterations < params.max_iters {
        iterations += 1;
        let totals: Vec<f64> = (0..n).map(|i| total_field(&msgs, i)).collect();
        let mut change = 0.0f64;
        let next: Vec<f64> = (0..msgs.len())
            .map(|e| {
                let cp = &couplers[e / 2];
                let (from, reverse) = if e % 2 == 0 { (cp.i, e + 1) } else { (cp.j, e - 1) };
                let cavity = if totals[from].is_infinite() {
                    totals[from]
                } else {
                    totals[from] - msgs[reverse]
                };
                message(cp.value, cavity, t)
            })
            .collect();
        for (m, new) in msgs.iter_mut().zip(next) {
            let damped = (1.0 - params.damping) * new + params.damping * *m;
            change = change.max((damped - *m).abs());
            *m = damped;
        }
        converged = change < params.tolerance;
    }

    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        let h = total_field(&msgs, i) / t;
        plus.push(1.0 / (1.0 + (-2.0 * h).exp()));
        minus.push(1.0 / (1.0 + (2.0 * h).exp()));
    }
    Ok(Marginals {
        plus,
        minus,
        converged,
        iterations,
    })
}

/// `S_i = sgn(b+ - b-)` (ties to +1), `P_i = (1 - |b+ - b-| / (b+ + b-)) / 2`.
pub fn marginal_to_belief(m: &Marginals, clusters: &ClusterSet) -> Result<Belief> {
    if clusters.n_bits() != m.len() {
        return Err(Error::Dimension {
            expected: m.len(),
            got: clusters.n_bits(),
        });
    }
    if !clusters.all_singletons() {
        return Err(Error::Unsupported("marginal conversion needs singleton clusters".into()));
    }
    let values: Vec<i8> = m
        .plus
        .iter()
        .zip(&m.minus)
        .map(|(p, q)| if p - q >= 0.0 { 1 } else { -1 })
        .collect();
    let p = clusters
        .iter()
        .map(|c| {
            let (bp, bm) = (m.plus[c[0]], m.minus[c[0]]);
            (0.5 * (1.0 - ((bp - bm) / (bp + bm)).abs())).clamp(0.0, 0.5)
        })
        .collect();
    Belief::new(clusters.clone(), SpinConfiguration::from_vec_unchecked(values), p)
}

/// Replaces a belief's `{S, P}` with the values implied by fresh marginals.
pub fn dynamic_update(m: &Marginals, belief: &Belief) -> Result<Belief> {
    marginal_to_belief(m, belief.clusters())
}

/// BP used as an inference primitive: the incoming belief becomes prior
/// fields `S_i (T/2) ln((1-P_i)/P_i)` and reads are drawn independently per
/// bit from the resulting marginals.
pub fn bp_as_primitive(
    problem: &IsingProblem,
    belief_in: &Belief,
    params: &BpParams,
    reads: usize,
    seed: u64,
) -> Result<CandidateSet> {
    if reads == 0 {
        return Err(Error::InvalidParams("reads must be at least one".into()));
    }
    if belief_in.n_bits() != problem.n() {
        return Err(Error::Dimension {
            expected: problem.n(),
            got: belief_in.n_bits(),
        });
    }
    if !belief_in.clusters().all_singletons() {
        return Err(Error::Unsupported("BP priors need singleton clusters".into()));
    }
    let mut prior = vec![0.0; problem.n()];
    for (c, members) in belief_in.clusters().iter().enumerate() {
        prior[members[0]] = prior_field(belief_in.uncertainty()[c], belief_in.values().get(members[0]), params.temperature);
    }
    let m = bp_run_with_prior(problem, &prior, params)?;
    let configs: Vec<SpinConfiguration> = (0..reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = rng_from(derive_seed(seed, read as u64));
            let spins = m
                .plus
                .iter()
                .map(|&bp| if rng.random::<f64>() < bp { 1 } else { -1 })
                .collect();
            SpinConfiguration::from_vec_unchecked(spins)
        })
        .collect();
    CandidateSet::evaluate(problem, configs)
}

pub fn prior_field(p: f64, value: i8, temperature: f64) -> f64 {
    if p == 0.0 {
        return value as f64 * f64::INFINITY;
    }
    value as f64 * 0.5 * temperature * ((1.0 - p) / p).ln()
}

/// CSV with columns `bit,b_plus,b_minus,S,P` and a leading comment line
/// recording convergence.
pub fn marginals_csv(m: &Marginals, belief: &Belief, config_comment: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {config_comment}");
    let _ = writeln!(out, "# converged={} iterations={}", m.converged, m.iterations);
    out.push_str("bit,b_plus,b_minus,S,P\n");
    for i in 0..m.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            i,
            m.plus[i],
            m.minus[i],
            belief.values().get(i),
            belief.uncertainty()[i]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::generate_sk;

    fn exact_plus(problem: &IsingProblem, t: f64) -> Vec<f64> {
        let n = problem.n();
        let mut z = 0.0;
        let mut up = vec![0.0; n];
        let e0 = crate::ising::exhaustive_solve(problem).unwrap().energy;
        for mask in 0..1u64 << n {
            let c = SpinConfiguration::from_mask(n, mask);
            let w = (-(problem.energy(&c).unwrap() - e0) / t).exp();
            z += w;
            for i in 0..n {
                if c.get(i) > 0 {
                    up[i] += w;
                }
            }
        }
        up.iter().map(|u| u / z).collect()
    }

    #[test]
    fn single_site_ratio() {
        let p = IsingProblem::new(1, vec![1.0], vec![]).unwrap();
        let m = bp_run(&p, &BpParams::at_temperature(1.0)).unwrap();
        assert!((m.plus[0] / m.minus[0] - 2f64.exp()).abs() < 1e-12);
        assert!(m.converged);
    }

    #[test]
    fn chain_is_exact() {
        let p = IsingProblem::new(
            4,
            vec![0.3, -0.2, 0.5, 0.1],
            vec![(0, 1, 0.7), (1, 2, -1.1), (2, 3, 0.4)],
        )
        .unwrap();
        let m = bp_run(&p, &BpParams::at_temperature(0.8)).unwrap();
        let exact = exact_plus(&p, 0.8);
        for i in 0..4 {
            assert!((m.plus[i] - exact[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_problem_gives_symmetric_marginals() {
        let p = generate_sk(6, 2).unwrap();
        let m = bp_run(&p, &BpParams::at_temperature(1.0)).unwrap();
        for i in 0..6 {
            assert_eq!(m.plus[i], m.minus[i]);
        }
        let b = marginal_to_belief(&m, &ClusterSet::singletons(6)).unwrap();
        assert_eq!(b, Belief::uninformed(ClusterSet::singletons(6)));
    }

    #[test]
    fn conversion_examples() {
        let r = ClusterSet::singletons(3);
        let m = Marginals::new(vec![0.9, 0.4, 0.0], vec![0.1, 0.4, 1.0]).unwrap();
        let b = marginal_to_belief(&m, &r).unwrap();
        assert_eq!(b.values().as_slice(), &[1, 1, -1]);
        assert!((b.uncertainty()[0] - 0.1).abs() < 1e-15);
        assert_eq!(b.uncertainty()[1], 0.5);
        assert_eq!(b.uncertainty()[2], 0.0);
        assert!(Marginals::new(vec![0.0], vec![0.0]).is_err());
        let multi = ClusterSet::new(2, vec![vec![0, 1]]).unwrap();
        let m2 = Marginals::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert!(matches!(marginal_to_belief(&m2, &multi), Err(Error::Unsupported(_))));
    }

    #[test]
    fn dynamic_update_is_idempotent() {
        let p = IsingProblem::new(3, vec![0.4, 0.0, -0.3], vec![(0, 1, 0.5), (1, 2, 0.5)]).unwrap();
        let m = bp_run(&p, &BpParams::at_temperature(1.0)).unwrap();
        let b0 = Belief::uninformed(ClusterSet::singletons(3));
        let b1 = dynamic_update(&m, &b0).unwrap();
        assert_eq!(dynamic_update(&m, &b1).unwrap(), b1);
    }

    #[test]
    fn priors() {
        assert_eq!(prior_field(0.5, 1, 2.0), 0.0);
        assert_eq!(prior_field(0.0, -1, 2.0), f64::NEG_INFINITY);
        let p = IsingProblem::new(3, vec![0.0; 3], vec![(0, 1, 0.8), (1, 2, -0.6)]).unwrap();
        let b = Belief::new(
            ClusterSet::singletons(3),
            SpinConfiguration::new(vec![-1, 1, 1]).unwrap(),
            vec![0.0, 0.5, 0.5],
        )
        .unwrap();
        let out = bp_as_primitive(&p, &b, &BpParams::at_temperature(1.0), 200, 4).unwrap();
        assert!(out.configs().iter().all(|c| c.get(0) == -1));
        for (c, &e) in out.configs().iter().zip(out.energies()) {
            assert_eq!(p.energy(c).unwrap(), e);
        }
    }

    #[test]
    fn damping_keeps_fixed_point() {
        let p = IsingProblem::new(
            5,
            vec![0.2, -0.4, 0.1, 0.0, 0.3],
            vec![(0, 1, 1.0), (0, 2, -0.5), (2, 3, 0.9), (2, 4, 0.3)],
        )
        .unwrap();
        let mut prm = BpParams::at_temperature(0.7);
        prm.damping = 0.0;
        let a = bp_run(&p, &prm).unwrap();
        prm.damping = 0.5;
        let b = bp_run(&p, &prm).unwrap();
        for i in 0..5 {
            assert!((a.plus[i] - b.plus[i]).abs() < 1e-6);
        }
        prm.damping = 1.0;
        assert!(bp_run(&p, &prm).is_err());
    }
}
