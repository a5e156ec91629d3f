//! Problem representation, energies, SK instances and the exhaustive oracle.

mod exhaustive;
mod format;
mod problem;
mod spins;

pub use exhaustive::{exhaustive_solve, exhaustive_solve_capped, GroundStates, DEFAULT_EXHAUSTIVE_CAP};
pub use format::{parse_instance, read_instance, save_instance, write_instance, SIGN_CONVENTION};
pub use problem::{generate_sk, generate_sk_fixed, lift_fixed, Coupler, IsingProblem};
pub use spins::{global_flip, hamming_distance, ClusterSet, SpinConfiguration};
