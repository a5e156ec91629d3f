use serde::{Deserialize, Serialize};

use crate::backend::{AnnealParams, BackendConfig};
use crate::error::{Error, Result};
use crate::ising::ClusterSet;
use crate::processing::Heuristic;

/// A node of a dataflow protocol: an inference primitive (Φ) or a
/// processing function (𝓕) with a declared number of inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Node {
    Primitive {},
    Processing { heuristic: Heuristic, inputs: usize },
}

impl Node {
    pub fn processing(heuristic: Heuristic, inputs: usize) -> Self {
        Node::Processing { heuristic, inputs }
    }

    fn is_primitive(&self) -> bool {
        matches!(self, Node::Primitive {})
    }
}

/// Nodes run in declared order each round. An edge `(a, b)` with `a < b`
/// carries data within a round; one with `a > b` is a feedback edge and
/// carries a processing node's belief into the next round's primitive call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataflow {
    pub nodes: Vec<Node>,
    pub edges: Vec<(usize, usize)>,
}

/// Inputs of a primitive node: its forward source and optional feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PrimitiveInputs {
    pub forward: usize,
    pub feedback: Option<usize>,
}

impl Dataflow {
    /// `init -> Φ -> best`.
    pub fn traditional() -> Self {
        Self {
            nodes: vec![
                Node::processing(Heuristic::Init {}, 0),
                Node::Primitive {},
                Node::processing(Heuristic::Best {}, 1),
            ],
            edges: vec![(0, 1), (1, 2)],
        }
    }

    /// `init -> Φ -> local_search`, with the local-search belief fed back
    /// into the next round's Φ.
    pub fn local_search(p_ladder: Vec<f64>) -> Self {
        Self {
            nodes: vec![
                Node::processing(Heuristic::Init {}, 0),
                Node::Primitive {},
                Node::processing(Heuristic::ladder(p_ladder), 1),
            ],
            edges: vec![(0, 1), (1, 2), (2, 1)],
        }
    }

    pub fn primitive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_primitive()).count()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |node: String, msg: String| Err(Error::Validation { node, msg });
        if self.nodes.is_empty() {
            return fail("graph".into(), "no nodes".into());
        }
        if self.primitive_count() == 0 {
            return fail("graph".into(), "no primitive node".into());
        }
        let len = self.nodes.len();
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            let name = format!("edge {k} ({a} -> {b})");
            if a >= len || b >= len {
                return fail(name, format!("endpoint outside 0..{len}"));
            }
            if a == b {
                return fail(name, "self loop".into());
            }
            if self.nodes[a].is_primitive() == self.nodes[b].is_primitive() {
                return fail(name, "edges must alternate between primitive and processing nodes".into());
            }
            if a > b && self.nodes[a].is_primitive() {
                return fail(name, "feedback edges must run from a processing node to a primitive".into());
            }
            if self.edges[..k].contains(&(a, b)) {
                return fail(name, "duplicate edge".into());
            }
        }
        for (k, node) in self.nodes.iter().enumerate() {
            let name = format!("node {k}");
            match node {
                Node::Primitive {} => {
                    self.primitive_inputs(k).map_err(|msg| Error::Validation { node: name, msg })?;
                }
                Node::Processing { heuristic, inputs } => {
                    let degree = self.edges.iter().filter(|e| e.1 == k).count();
                    if degree != *inputs {
                        return fail(name, format!("declares {inputs} inputs but has in-degree {degree}"));
                    }
                    if matches!(heuristic, Heuristic::Init {}) != (*inputs == 0) {
                        return fail(name, "only the init heuristic takes no inputs".into());
                    }
                    if *inputs < heuristic.min_inputs() {
                        return fail(name, format!("{heuristic:?} needs at least {} inputs", heuristic.min_inputs()));
                    }
                    heuristic.validate().map_err(|e| Error::Validation {
                        node: name.clone(),
                        msg: e.to_string(),
                    })?;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn primitive_inputs(&self, k: usize) -> std::result::Result<PrimitiveInputs, String> {
        let forward: Vec<usize> = self.edges.iter().filter(|e| e.1 == k && e.0 < k).map(|e| e.0).collect();
        let feedback: Vec<usize> = self.edges.iter().filter(|e| e.1 == k && e.0 > k).map(|e| e.0).collect();
        if forward.len() != 1 {
            return Err(format!("primitive needs exactly one forward input, has {}", forward.len()));
        }
        if feedback.len() > 1 {
            return Err(format!("primitive accepts at most one feedback input, has {}", feedback.len()));
        }
        Ok(PrimitiveInputs {
            forward: forward[0],
            feedback: feedback.first().copied(),
        })
    }

    pub(crate) fn processing_inputs(&self, k: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.1 == k).map(|e| e.0).collect()
    }
}

/// Replacement rule for hybrid outputs entering the main pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PexConvention {
    /// `min(exp((min E_hyb - min E) / T), 1)`, taken literally: worse hybrids
    /// always replace.
    #[default]
    Literal,
    /// `min(exp((min E - min E_hyb) / T), 1)`: better hybrids always replace.
    Metropolis,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Dataflow(Dataflow),
    /// `size` members per round, resampled by Boltzmann weight on their best
    /// energy; `genetic_count` of them are recombined from two parents.
    /// The ladder is traversed from its hottest entry to its coldest.
    Population {
        size: usize,
        t_ladder: Vec<f64>,
        genetic_count: usize,
    },
    /// One member per ladder temperature (two when `genetic`), with
    /// neighbour swaps every round and an optional hybridization pool.
    Tempering { t_ladder: Vec<f64>, genetic: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolGraph {
    pub structure: Structure,
    pub backend: BackendConfig,
    pub anneal_params: AnnealParams,
    pub rounds: usize,
    /// Stop after this many rounds without improvement; defaults to `rounds`.
    pub patience: Option<usize>,
    pub seed: u64,
    pub pex_convention: PexConvention,
    pub clusters: Option<Vec<Vec<usize>>>,
}

impl ProtocolGraph {
    pub fn new(structure: Structure, anneal_params: AnnealParams, rounds: usize) -> Self {
        Self {
            structure,
            backend: BackendConfig::default(),
            anneal_params,
            rounds,
            patience: None,
            seed: 0,
            pex_convention: PexConvention::default(),
            clusters: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_backend(mut self, backend: BackendConfig) -> Self {
        self.backend = backend;
        self
    }

    pub fn patience(&self) -> usize {
        self.patience.unwrap_or(self.rounds)
    }

    pub fn cluster_set(&self, n: usize) -> Result<ClusterSet> {
        match &self.clusters {
            Some(lists) => ClusterSet::new(n, lists.clone()),
            None => Ok(ClusterSet::singletons(n)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |node: &str, msg: String| Err(Error::Validation { node: node.into(), msg });
        self.anneal_params.validate().map_err(|e| Error::Validation {
            node: "anneal_params".into(),
            msg: e.to_string(),
        })?;
        self.backend.resolve().map_err(|e| Error::Validation {
            node: "backend".into(),
            msg: e.to_string(),
        })?;
        if self.rounds == 0 {
            return fail("rounds", "at least one round is required".into());
        }
        if self.patience == Some(0) {
            return fail("patience", "patience must be positive".into());
        }
        let check_ladder = |ladder: &[f64], min_len: usize| -> Result<()> {
            if ladder.len() < min_len {
                return fail("pools", format!("temperature ladder needs at least {min_len} entries"));
            }
            if ladder.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return fail("pools", "ladder temperatures must be positive and finite".into());
            }
            if ladder.windows(2).any(|w| w[0] >= w[1]) {
                return fail("pools", "temperature ladder must be strictly increasing".into());
            }
            Ok(())
        };
        match &self.structure {
            Structure::Dataflow(d) => d.validate(),
            Structure::Population {
                size,
                t_ladder,
                genetic_count,
            } => {
                if *size < 2 {
                    return fail("pools", format!("population size {size} below 2"));
                }
                if *genetic_count > size / 2 {
                    return fail("pools", format!("genetic_count {genetic_count} exceeds half the population"));
                }
                check_ladder(t_ladder, 1)
            }
            Structure::Tempering { t_ladder, .. } => check_ladder(t_ladder, 2),
        }
    }
}

pub fn template_traditional(anneal_params: AnnealParams) -> ProtocolGraph {
    ProtocolGraph::new(Structure::Dataflow(Dataflow::traditional()), anneal_params, 1)
}

/// `rounds` refinements after the initial global call, with uncertainty
/// `p_ladder[k]` for refinement `k`.
pub fn template_local_search(rounds: usize, p_ladder: Vec<f64>, anneal_params: AnnealParams) -> Result<ProtocolGraph> {
    if p_ladder.is_empty() || p_ladder.len() != rounds {
        return Err(Error::InvalidParams(format!(
            "p_ladder has {} entries for {rounds} rounds",
            p_ladder.len()
        )));
    }
    let g = ProtocolGraph::new(Structure::Dataflow(Dataflow::local_search(p_ladder)), anneal_params, rounds + 1);
    g.validate()?;
    Ok(g)
}

pub fn template_population_annealing(
    size: usize,
    t_ladder: Vec<f64>,
    genetic_count: usize,
    rounds: usize,
    anneal_params: AnnealParams,
) -> Result<ProtocolGraph> {
    let g = ProtocolGraph::new(
        Structure::Population {
            size,
            t_ladder,
            genetic_count,
        },
        anneal_params,
        rounds,
    );
    g.validate()?;
    Ok(g)
}

pub fn template_parallel_tempering(
    t_ladder: Vec<f64>,
    rounds: usize,
    genetic: bool,
    anneal_params: AnnealParams,
) -> Result<ProtocolGraph> {
    let g = ProtocolGraph::new(Structure::Tempering { t_ladder, genetic }, anneal_params, rounds);
    g.validate()?;
    Ok(g)
}
