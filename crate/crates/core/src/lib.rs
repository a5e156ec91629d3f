//! Hybrid annealing algorithms in the inference-primitive formalism.
//!
//! An inference primitive ([`backend::infer`]) turns a belief `{S, P}` over
//! clusters `R` into candidates `{G, E}`; processing functions
//! ([`processing`]) turn candidates back into beliefs. [`protocol`] wires the
//! two into loops: local search, population annealing and parallel
//! tempering, with optional genetic recombination.

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backend;
pub mod belief;
pub mod bp;
pub mod error;
pub mod experiments;
pub mod ising;
pub mod processing;
pub mod protocol;
pub mod seed;
pub mod uncertainty;

pub use backend::{infer, AnnealParams, Backend, BackendConfig};
pub use belief::{Belief, CandidateSet};
pub use error::{Error, Result};
pub use ising::{ClusterSet, IsingProblem, SpinConfiguration};
