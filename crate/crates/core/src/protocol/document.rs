//! JSON protocol files.
//!
//! ```json
//! {
//!   "template": {"kind": "local_search", "p_ladder": [0.3, 0.2, 0.1]},
//!   "backend": {"kind": "piqa"},
//!   "anneal_params": {"temperature": 0.8246, "tau": 20, "trotter_slices": 30, "reads": 201},
//!   "seed": 7
//! }
//! ```
//!
//! Exactly one of `template`, `nodes`/`edges` or `pools` describes the
//! structure. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use super::graph::{Dataflow, Node, PexConvention, ProtocolGraph, Structure};
use crate::backend::{AnnealParams, BackendConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TemplateSpec {
    Traditional {},
    LocalSearch { p_ladder: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PoolSpec {
    Population {
        size: usize,
        t_ladder: Vec<f64>,
        #[serde(default)]
        genetic_count: usize,
    },
    Tempering {
        t_ladder: Vec<f64>,
        #[serde(default)]
        genetic: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    template: Option<TemplateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<Vec<Node>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pools: Option<PoolSpec>,
    #[serde(default)]
    backend: BackendConfig,
    anneal_params: AnnealParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rounds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    patience: Option<usize>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    pex_convention: PexConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clusters: Option<Vec<Vec<usize>>>,
}

fn structure_error(msg: impl Into<String>) -> Error {
    Error::Validation {
        node: "document".into(),
        msg: msg.into(),
    }
}

/// Parses and validates a protocol document.
pub fn parse_protocol(text: &str) -> Result<ProtocolGraph> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let (structure, default_rounds) = match (doc.template, doc.nodes, doc.edges, doc.pools) {
        (Some(TemplateSpec::Traditional {}), None, None, None) => (Structure::Dataflow(Dataflow::traditional()), Some(1)),
        (Some(TemplateSpec::LocalSearch { p_ladder }), None, None, None) => {
            if p_ladder.is_empty() {
                return Err(structure_error("local_search template needs a non-empty p_ladder"));
            }
            let rounds = p_ladder.len() + 1;
            (Structure::Dataflow(Dataflow::local_search(p_ladder)), Some(rounds))
        }
        (None, Some(nodes), edges, None) => (
            Structure::Dataflow(Dataflow {
                nodes,
                edges: edges.unwrap_or_default(),
            }),
            Some(1),
        ),
        (None, None, None, Some(PoolSpec::Population {
            size,
            t_ladder,
            genetic_count,
        })) => (
            Structure::Population {
                size,
                t_ladder,
                genetic_count,
            },
            None,
        ),
        (None, None, None, Some(PoolSpec::Tempering { t_ladder, genetic })) => {
            (Structure::Tempering { t_ladder, genetic }, None)
        }
        (None, None, Some(_), None) => return Err(structure_error("edges given without nodes")),
        (None, None, None, None) => return Err(structure_error("one of template, nodes or pools is required")),
        _ => return Err(structure_error("template, nodes and pools are mutually exclusive")),
    };
    let rounds = match (doc.rounds, default_rounds) {
        (Some(r), _) | (None, Some(r)) => r,
        (None, None) => return Err(structure_error("pool protocols need an explicit rounds count")),
    };
    let graph = ProtocolGraph {
        structure,
        backend: doc.backend,
        anneal_params: doc.anneal_params,
        rounds,
        patience: doc.patience,
        seed: doc.seed,
        pex_convention: doc.pex_convention,
        clusters: doc.clusters,
    };
    graph.validate()?;
    Ok(graph)
}

/// Serializes a graph; dataflow templates are written out as explicit
/// nodes and edges.
pub fn to_document(graph: &ProtocolGraph) -> String {
    let (nodes, edges, pools) = match &graph.structure {
        Structure::Dataflow(d) => (Some(d.nodes.clone()), Some(d.edges.clone()), None),
        Structure::Population {
            size,
            t_ladder,
            genetic_count,
        } => (
            None,
            None,
            Some(PoolSpec::Population {
                size: *size,
                t_ladder: t_ladder.clone(),
                genetic_count: *genetic_count,
            }),
        ),
        Structure::Tempering { t_ladder, genetic } => (
            None,
            None,
            Some(PoolSpec::Tempering {
                t_ladder: t_ladder.clone(),
                genetic: *genetic,
            }),
        ),
    };
    let doc = Document {
        template: None,
        nodes,
        edges,
        pools,
        backend: graph.backend.clone(),
        anneal_params: graph.anneal_params.clone(),
        rounds: Some(graph.rounds),
        patience: graph.patience,
        seed: graph.seed,
        pex_convention: graph.pex_convention,
        clusters: graph.clusters.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::graph::template_traditional;

    const PARAMS: &str = r#""anneal_params": {"temperature": 0.8246, "tau": 20, "trotter_slices": 30, "reads": 11}"#;

    #[test]
    fn minimal_traditional() {
        let g = parse_protocol(&format!(r#"{{"template": {{"kind": "traditional"}}, {PARAMS}}}"#)).unwrap();
        let mut p = AnnealParams::standard();
        p.reads = 11;
        assert_eq!(g, template_traditional(p));
    }

    #[test]
    fn round_trips() {
        let docs = [
            format!(r#"{{"template": {{"kind": "local_search", "p_ladder": [0.3, 0.2]}}, {PARAMS}, "seed": 4}}"#),
            format!(
                r#"{{"pools": {{"kind": "population", "size": 6, "t_ladder": [0.5, 1, 2], "genetic_count": 2}}, "rounds": 5, {PARAMS}, "pex_convention": "metropolis"}}"#
            ),
            format!(r#"{{"pools": {{"kind": "tempering", "t_ladder": [0.5, 1], "genetic": true}}, "rounds": 3, "backend": {{"kind": "sa"}}, {PARAMS}}}"#),
            format!(
                r#"{{"nodes": [{{"type": "processing", "heuristic": {{"fn": "init"}}, "inputs": 0}}, {{"type": "primitive"}},
                    {{"type": "primitive"}}, {{"type": "processing", "heuristic": {{"fn": "genetic_agreement", "p_agree": 0.1, "align": {{"mode": "majority"}}}}, "inputs": 2}}],
                  "edges": [[0, 1], [0, 2], [1, 3], [2, 3]], "rounds": 2, "clusters": [[0], [1], [2], [0, 1]], {PARAMS}}}"#
            ),
        ];
        for doc in docs {
            let g = parse_protocol(&doc).unwrap();
            let again = parse_protocol(&to_document(&g)).unwrap();
            assert_eq!(again, g);
        }
    }

    #[test]
    fn diagnostics() {
        let wrong_degree = format!(
            r#"{{"nodes": [{{"type": "processing", "heuristic": {{"fn": "init"}}, "inputs": 0}}, {{"type": "primitive"}},
                {{"type": "processing", "heuristic": {{"fn": "raw"}}, "inputs": 2}}], "edges": [[0, 1], [1, 2]], {PARAMS}}}"#
        );
        assert!(matches!(parse_protocol(&wrong_degree), Err(Error::Validation { node, .. }) if node == "node 2"));

        let unknown = format!("{{\"template\": {{\"kind\": \"traditional\"}},\n\"colour\": 1, {PARAMS}}}");
        assert!(matches!(parse_protocol(&unknown), Err(Error::Parse { line: 2, .. })));

        let both = format!(r#"{{"template": {{"kind": "traditional"}}, "pools": {{"kind": "tempering", "t_ladder": [1, 2]}}, {PARAMS}}}"#);
        assert!(matches!(parse_protocol(&both), Err(Error::Validation { .. })));

        let no_rounds = format!(r#"{{"pools": {{"kind": "tempering", "t_ladder": [1, 2]}}, {PARAMS}}}"#);
        assert!(parse_protocol(&no_rounds).is_err());
    }
}
