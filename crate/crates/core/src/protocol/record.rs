use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ising::SpinConfiguration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    /// An inference-primitive call by a node or pool member.
    Primitive { seed: u64 },
    /// A population member was drawn from `parent` of the previous round.
    Resample { parent: usize },
    /// A population member was recombined from two previous-round members.
    Genetic { parents: Vec<usize> },
    /// A hybridization-pool call seeded from two main-pool members.
    Hybrid { parents: Vec<usize>, seed: u64 },
    /// A replacement attempt of `member` by the hybrid from ladder slot `source`.
    Replace { source: usize, p_ex: f64, accepted: bool },
    /// A replica-exchange attempt between `member` and `partner`.
    Swap { partner: usize, p_swap: f64, accepted: bool },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Primitive { .. } => "primitive",
            EventKind::Resample { .. } => "resample",
            EventKind::Genetic { .. } => "genetic",
            EventKind::Hybrid { .. } => "hybrid",
            EventKind::Replace { .. } => "replace",
            EventKind::Swap { .. } => "swap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub round: usize,
    pub member: usize,
    #[serde(rename = "T_eff", skip_serializing_if = "Option::is_none")]
    pub t_eff: Option<f64>,
    pub min_energy: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Everything a run did, in order. Two runs with the same graph, problem and
/// seed produce equal records.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub events: Vec<Event>,
    /// Best energy seen so far, after each completed round.
    pub best_history: Vec<f64>,
    pub best_config: SpinConfiguration,
    pub best_energy: f64,
    pub rounds_run: usize,
}

impl RunRecord {
    pub fn primitive_calls(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Primitive { .. } | EventKind::Hybrid { .. }))
            .count()
    }

    /// One JSON object per event, then a final `best` line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        let best = serde_json::json!({
            "event": "best",
            "seed": self.seed,
            "rounds": self.rounds_run,
            "energy": self.best_energy,
            "config": self.best_config.as_slice(),
        });
        out.push_str(&best.to_string());
        out.push('\n');
        out
    }

    /// Columns `round,member,T_eff,min_energy,event`; `T_eff` is empty for
    /// dataflow nodes.
    pub fn summary_csv(&self, config_comment: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {config_comment}");
        out.push_str("round,member,T_eff,min_energy,event\n");
        for e in &self.events {
            let t = e.t_eff.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", e.round, e.member, t, e.min_energy, e.kind.name());
        }
        out
    }
}
