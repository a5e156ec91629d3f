use super::problem::IsingProblem;
use super::spins::SpinConfiguration;
use crate::error::{Error, Result};

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 24;
const HARD_CAP: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStates {
    /// Every minimum-energy configuration, in ascending mask order.
    pub configs: Vec<SpinConfiguration>,
    pub energy: f64,
}

pub fn exhaustive_solve(problem: &IsingProblem) -> Result<GroundStates> {
    exhaustive_solve_capped(problem, DEFAULT_EXHAUSTIVE_CAP)
}

/// Enumerates all `2^n` configurations in Gray-code order with incremental
/// energy updates. Near-minimal candidates are re-evaluated directly at the
/// end, so the reported energy is exactly `problem.energy(config)`.
pub fn exhaustive_solve_capped(problem: &IsingProblem, cap: usize) -> Result<GroundStates> {
    let n = problem.n();
    if n > cap.min(HARD_CAP) {
        return Err(Error::ExhaustiveCap {
            n,
            cap: cap.min(HARD_CAP),
        });
    }
    let scale = 1.0 + problem.magnitude();
    // drift of the running sum is bounded well below this
    let loose = 1e-7 * scale;
    let tight = 1e-9 * scale;

    let mut spins = vec![1i8; n];
    let mut mask: u64 = 0;
    let mut e = problem.energy_of(&spins);
    let mut best = e;
    let mut cands: Vec<u64> = vec![0];

    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        e += problem.flip_delta(i, &spins);
        spins[i] = -spins[i];
        mask ^= 1 << i;
        if e < best - loose {
            best = e;
            cands.clear();
            cands.push(mask);
        } else if e <= best + loose {
            if e < best {
                best = e;
            }
            cands.push(mask);
        }
    }

    let exact: Vec<(u64, f64)> = cands
        .into_iter()
        .map(|m| (m, problem.energy_of(SpinConfiguration::from_mask(n, m).as_slice())))
        .collect();
    let energy = exact.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
    let mut masks: Vec<u64> = exact
        .into_iter()
        .filter(|&(_, e)| e <= energy + tight)
        .map(|(m, _)| m)
        .collect();
    masks.sort_unstable();
    Ok(GroundStates {
        configs: masks
            .into_iter()
            .map(|m| SpinConfiguration::from_mask(n, m))
            .collect(),
        energy,
    })
}
