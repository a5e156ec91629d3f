//! Protocols wiring inference primitives and processing functions together,
//! and the engine that runs them.

mod document;
mod graph;
mod pools;
mod record;

use rayon::prelude::*;

pub use document::{parse_protocol, to_document};
pub use graph::{
    template_local_search, template_parallel_tempering, template_population_annealing, template_traditional,
    Dataflow, Node, PexConvention, ProtocolGraph, Structure,
};
pub use pools::{
    boltzmann_weights, hybrid_replace, pa_select_parents, pt_swap, replacement_probability, swap_probability,
    HybridOutput, Member, PoolState,
};
pub use record::{Event, EventKind, RunRecord};

use crate::backend::{infer, AnnealParams, Backend};
use crate::belief::{Belief, CandidateSet};
use crate::error::{Error, Result};
use crate::ising::{ClusterSet, IsingProblem};
use crate::processing::{f_init, f_local_search, genetic_agreement};
use crate::seed::{derive_path, rng_from};
use crate::uncertainty::nishimori_uncertainty;

/// Stream index reserved for the serial between-round generator.
const BARRIER_STREAM: u64 = u64::MAX;

struct Context<'a> {
    problem: &'a IsingProblem,
    backend: Backend,
    params: &'a AnnealParams,
    clusters: ClusterSet,
    seed: u64,
}

impl Context<'_> {
    fn call_seed(&self, round: usize, member: usize) -> u64 {
        derive_path(self.seed, &[round as u64, member as u64])
    }

    fn infer(&self, belief: &Belief, seed: u64) -> Result<CandidateSet> {
        infer(&self.backend, belief, self.problem, &self.params.clone().with_seed(seed))
    }
}

/// Tracks the best-so-far and the patience window.
struct Progress {
    best_history: Vec<f64>,
    stale: usize,
    patience: usize,
}

impl Progress {
    fn end_round(&mut self, pool: &PoolState, improved: bool) -> bool {
        self.best_history.push(pool.best_energy());
        self.stale = if improved { 0 } else { self.stale + 1 };
        self.stale >= self.patience
    }
}

/// Runs a protocol on the current rayon pool.
pub fn run_protocol(graph: &ProtocolGraph, problem: &IsingProblem) -> Result<RunRecord> {
    graph.validate()?;
    let ctx = Context {
        problem,
        backend: graph.backend.resolve()?,
        params: &graph.anneal_params,
        clusters: graph.cluster_set(problem.n())?,
        seed: graph.seed,
    };
    let mut progress = Progress {
        best_history: Vec::new(),
        stale: 0,
        patience: graph.patience(),
    };
    let mut events = Vec::new();
    let mut pool = PoolState::default();
    match &graph.structure {
        Structure::Dataflow(d) => run_dataflow(d, graph.rounds, &ctx, &mut pool, &mut progress, &mut events)?,
        Structure::Population {
            size,
            t_ladder,
            genetic_count,
        } => run_population(*size, t_ladder, *genetic_count, graph.rounds, &ctx, &mut pool, &mut progress, &mut events)?,
        Structure::Tempering { t_ladder, genetic } => run_tempering(
            t_ladder,
            *genetic,
            graph.rounds,
            graph.pex_convention,
            &ctx,
            &mut pool,
            &mut progress,
            &mut events,
        )?,
    }
    let (best_config, best_energy) = pool.best.ok_or(Error::EmptyInput("no primitive call ran"))?;
    Ok(RunRecord {
        seed: graph.seed,
        events,
        rounds_run: progress.best_history.len(),
        best_history: progress.best_history,
        best_config,
        best_energy,
    })
}

/// Runs a protocol on a dedicated pool of `workers` threads. The record does
/// not depend on the worker count.
pub fn run_protocol_with_workers(graph: &ProtocolGraph, problem: &IsingProblem, workers: usize) -> Result<RunRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(|| run_protocol(graph, problem))
}

fn primitive_event(round: usize, member: usize, t_eff: Option<f64>, set: &CandidateSet, seed: u64) -> Event {
    Event {
        round,
        member,
        t_eff,
        min_energy: set.min_energy(),
        kind: EventKind::Primitive { seed },
    }
}

fn run_dataflow(
    d: &Dataflow,
    rounds: usize,
    ctx: &Context,
    pool: &mut PoolState,
    progress: &mut Progress,
    events: &mut Vec<Event>,
) -> Result<()> {
    let n = d.nodes.len();
    let mut feedback: Vec<Option<Belief>> = vec![None; n];
    for round in 0..rounds {
        pool.round = round;
        let mut beliefs: Vec<Option<Belief>> = vec![None; n];
        let mut outputs: Vec<Option<CandidateSet>> = vec![None; n];
        let mut improved = false;
        for (k, node) in d.nodes.iter().enumerate() {
            match node {
                Node::Primitive {} => {
                    let inputs = d.primitive_inputs(k).map_err(|msg| Error::Validation {
                        node: format!("node {k}"),
                        msg,
                    })?;
                    let belief = match inputs.feedback {
                        Some(f) if round > 0 => feedback[f].as_ref(),
                        _ => beliefs[inputs.forward].as_ref(),
                    }
                    .expect("sources run before their targets");
                    let seed = ctx.call_seed(round, k);
                    let set = ctx.infer(belief, seed)?;
                    events.push(primitive_event(round, k, None, &set, seed));
                    improved |= pool.observe(&set);
                    outputs[k] = Some(set);
                }
                Node::Processing { heuristic, .. } => {
                    let inputs: Vec<CandidateSet> = d
                        .processing_inputs(k)
                        .into_iter()
                        .map(|s| outputs[s].clone().expect("sources run before their targets"))
                        .collect();
                    beliefs[k] = Some(heuristic.apply(&inputs, &ctx.clusters, ctx.problem, round)?);
                }
            }
        }
        feedback = beliefs;
        if progress.end_round(pool, improved) {
            break;
        }
    }
    Ok(())
}

/// Uncertainty matched to an effective temperature, kept strictly inside
/// `(0, 0.5)` so it is a valid agreement uncertainty.
fn ladder_uncertainty(t_eff: f64) -> f64 {
    nishimori_uncertainty(t_eff).clamp(1e-12, 0.5 - 1e-12)
}

fn run_members(ctx: &Context, round: usize, beliefs: Vec<Belief>, temps: &[f64]) -> Result<Vec<Member>> {
    beliefs
        .into_par_iter()
        .enumerate()
        .map(|(m, belief)| {
            let candidates = ctx.infer(&belief, ctx.call_seed(round, m))?;
            Ok(Member {
                belief,
                candidates,
                t_eff: temps[m],
            })
        })
        .collect()
}

fn record_members(pool: &mut PoolState, ctx: &Context, events: &mut Vec<Event>) -> bool {
    let mut improved = false;
    for (m, member) in pool.members.iter().enumerate() {
        events.push(primitive_event(
            pool.round,
            m,
            Some(member.t_eff),
            &member.candidates,
            ctx.call_seed(pool.round, m),
        ));
    }
    let sets: Vec<CandidateSet> = pool.members.iter().map(|m| m.candidates.clone()).collect();
    for s in &sets {
        improved |= pool.observe(s);
    }
    improved
}

#[allow(clippy::too_many_arguments)]
fn run_population(
    size: usize,
    t_ladder: &[f64],
    genetic_count: usize,
    rounds: usize,
    ctx: &Context,
    pool: &mut PoolState,
    progress: &mut Progress,
    events: &mut Vec<Event>,
) -> Result<()> {
    let hottest = t_ladder.len() - 1;
    let temperature = |round: usize| t_ladder[hottest - round.min(hottest)];
    for round in 0..rounds {
        pool.round = round;
        let t = temperature(round);
        let beliefs: Vec<Belief> = if round == 0 {
            vec![f_init(&ctx.clusters); size]
        } else {
            let mut rng = rng_from(derive_path(ctx.seed, &[round as u64, BARRIER_STREAM]));
            let energies = pool.min_energies();
            let weights = boltzmann_weights(&energies, t);
            let p = ladder_uncertainty(t);
            let mut next = Vec::with_capacity(size);
            for m in 0..size - genetic_count {
                let parent = pools::draw_weighted(&weights, &mut rng);
                events.push(Event {
                    round,
                    member: m,
                    t_eff: Some(t),
                    min_energy: energies[parent],
                    kind: EventKind::Resample { parent },
                });
                next.push(f_local_search(&pool.members[parent].candidates, &ctx.clusters, p)?);
            }
            for m in size - genetic_count..size {
                let parents = pa_select_parents(&energies, t, 2, &mut rng)?;
                let sets: Vec<CandidateSet> = parents.iter().map(|&i| pool.members[i].candidates.clone()).collect();
                events.push(Event {
                    round,
                    member: m,
                    t_eff: Some(t),
                    min_energy: energies[parents[0]].min(energies[parents[1]]),
                    kind: EventKind::Genetic { parents },
                });
                next.push(genetic_agreement(&sets, &ctx.clusters, p, None)?);
            }
            next
        };
        pool.members = run_members(ctx, round, beliefs, &vec![t; size])?;
        let improved = record_members(pool, ctx, events);
        if progress.end_round(pool, improved) {
            break;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_tempering(
    t_ladder: &[f64],
    genetic: bool,
    rounds: usize,
    convention: PexConvention,
    ctx: &Context,
    pool: &mut PoolState,
    progress: &mut Progress,
    events: &mut Vec<Event>,
) -> Result<()> {
    let per = if genetic { 2 } else { 1 };
    let temps: Vec<f64> = t_ladder.iter().flat_map(|&t| std::iter::repeat_n(t, per)).collect();
    let size = temps.len();
    for round in 0..rounds {
        pool.round = round;
        let beliefs: Vec<Belief> = if round == 0 {
            vec![f_init(&ctx.clusters); size]
        } else {
            pool.members
                .iter()
                .map(|m| f_local_search(&m.candidates, &ctx.clusters, ladder_uncertainty(m.t_eff)))
                .collect::<Result<_>>()?
        };
        pool.members = run_members(ctx, round, beliefs, &temps)?;
        let mut improved = record_members(pool, ctx, events);
        let mut rng = rng_from(derive_path(ctx.seed, &[round as u64, BARRIER_STREAM]));

        if genetic {
            // (1) hybridization pool: one call per rung, seeded from the rung's pair
            let outputs: Vec<HybridOutput> = (0..t_ladder.len())
                .into_par_iter()
                .map(|r| {
                    let pair = [pool.members[2 * r].candidates.clone(), pool.members[2 * r + 1].candidates.clone()];
                    let t = t_ladder[r];
                    let belief = genetic_agreement(&pair, &ctx.clusters, ladder_uncertainty(t), None)?;
                    let candidates = ctx.infer(&belief, ctx.call_seed(round, size + r))?;
                    Ok(HybridOutput {
                        source: r,
                        t_eff: t,
                        belief,
                        candidates,
                    })
                })
                .collect::<Result<_>>()?;
            for out in &outputs {
                events.push(Event {
                    round,
                    member: size + out.source,
                    t_eff: Some(out.t_eff),
                    min_energy: out.candidates.min_energy(),
                    kind: EventKind::Hybrid {
                        parents: vec![2 * out.source, 2 * out.source + 1],
                        seed: ctx.call_seed(round, size + out.source),
                    },
                });
                improved |= pool.observe(&out.candidates);
            }
            // (2) replacements
            hybrid_replace(pool, outputs, convention, &mut rng, events);
        }
        // (3) swaps
        pt_swap(pool, per, &mut rng, events);
        if progress.end_round(pool, improved) {
            break;
        }
    }
    Ok(())
}

/// Convenience: a single primitive call from the uninformed belief.
pub fn traditional_call(
    backend: &Backend,
    problem: &IsingProblem,
    clusters: &ClusterSet,
    params: &AnnealParams,
) -> Result<CandidateSet> {
    infer(backend, &f_init(clusters), problem, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BackendConfig;
    use crate::ising::{exhaustive_solve, generate_sk_fixed};
    use crate::processing::Heuristic;

    fn params(reads: usize) -> AnnealParams {
        AnnealParams {
            temperature: 0.3,
            tau: 10,
            trotter_slices: 4,
            reads,
            seed: 0,
            t_hot: None,
        }
    }

    fn monotone(r: &RunRecord) -> bool {
        r.best_history.windows(2).all(|w| w[1] <= w[0])
    }

    #[test]
    fn traditional_makes_one_call() {
        let p = generate_sk_fixed(5, 1).unwrap();
        let g = template_traditional(params(8)).with_seed(3);
        let r = run_protocol(&g, &p).unwrap();
        assert_eq!(r.primitive_calls(), 1);
        assert_eq!(r.rounds_run, 1);
        assert_eq!(r.best_energy, r.events[0].min_energy);
        assert_eq!(r, run_protocol(&g, &p).unwrap());
    }

    #[test]
    fn local_search_runs_every_round() {
        let p = generate_sk_fixed(10, 2).unwrap();
        let mut g = template_local_search(3, vec![0.3, 0.2, 0.1], params(6)).unwrap();
        g.patience = Some(10);
        let r = run_protocol(&g, &p).unwrap();
        assert_eq!(r.primitive_calls(), 4);
        assert!(monotone(&r));
        let e = exhaustive_solve(&p).unwrap().energy;
        assert!(r.best_energy >= e - 1e-9);
    }

    #[test]
    fn patience_stops_early() {
        let p = IsingProblem::new(2, vec![1.0, 1.0], vec![]).unwrap();
        let mut g = template_local_search(5, vec![0.1; 5], params(4)).unwrap();
        g.patience = Some(1);
        let r = run_protocol(&g, &p).unwrap();
        assert!(r.rounds_run < 6);
    }

    #[test]
    fn population_is_conserved() {
        let p = generate_sk_fixed(8, 4).unwrap();
        let g = template_population_annealing(6, vec![0.3, 0.6, 1.2], 2, 4, params(4)).unwrap().with_seed(9);
        let r = run_protocol(&g, &p).unwrap();
        for round in 0..r.rounds_run {
            let calls = r
                .events
                .iter()
                .filter(|e| e.round == round && matches!(e.kind, EventKind::Primitive { .. }))
                .count();
            assert_eq!(calls, 6);
        }
        let genetic = r.events.iter().filter(|e| matches!(e.kind, EventKind::Genetic { .. })).count();
        assert_eq!(genetic, 2 * (r.rounds_run - 1));
        assert!(monotone(&r));
    }

    #[test]
    fn tempering_orders_steps() {
        let p = generate_sk_fixed(8, 5).unwrap();
        let g = template_parallel_tempering(vec![0.3, 0.6, 1.2], 3, true, params(4))
            .unwrap()
            .with_backend(BackendConfig::Sa {});
        let r = run_protocol(&g, &p).unwrap();
        for round in 0..3 {
            let kinds: Vec<&str> = r.events.iter().filter(|e| e.round == round).map(|e| e.kind.name()).collect();
            let last = |name: &str| kinds.iter().rposition(|k| *k == name);
            let first = |name: &str| kinds.iter().position(|k| *k == name);
            assert!(last("hybrid") < first("replace"));
            assert!(last("replace") < first("swap"));
            assert_eq!(kinds.iter().filter(|k| **k == "swap").count(), 4);
        }
        assert!(monotone(&r));
    }

    #[test]
    fn dataflow_feedback_uses_previous_round() {
        let p = generate_sk_fixed(6, 3).unwrap();
        let d = Dataflow {
            nodes: vec![
                Node::processing(Heuristic::Init {}, 0),
                Node::Primitive {},
                Node::Primitive {},
                Node::processing(
                    Heuristic::GeneticAgreement {
                        p_agree: 0.2,
                        align: None,
                    },
                    2,
                ),
                Node::Primitive {},
                Node::processing(Heuristic::ladder(vec![0.2]), 1),
            ],
            edges: vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 1)],
        };
        let g = ProtocolGraph::new(Structure::Dataflow(d), params(4), 3);
        let r = run_protocol(&g, &p).unwrap();
        assert_eq!(r.primitive_calls(), 9);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let p = generate_sk_fixed(8, 6).unwrap();
        let g = template_population_annealing(4, vec![0.5, 1.0], 1, 3, params(5)).unwrap();
        let a = run_protocol_with_workers(&g, &p, 1).unwrap();
        let b = run_protocol_with_workers(&g, &p, 4).unwrap();
        assert_eq!(a, b);
    }
}
