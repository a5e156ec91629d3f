//! Path-integral quantum annealing.
//!
//! The transverse-field model is Trotterized into `P` coupled replicas
//! (slices) simulated at temperature `P T`. Slices interact through
//! `J_perp = -(P T / 2) ln tanh(Gamma / (P T))`, with `Gamma_i = A(s_i)`, and
//! each slice sees the problem energy with spin `i`'s local field scaled by
//! `B(s_i)`. A sweep is one local Metropolis pass over every (slice, spin)
//! pair followed by one global move per spin that flips it in all slices.

use rand::Rng;
use rayon::prelude::*;

use super::schedule::ScheduleSpec;
use super::AnnealParams;
use crate::belief::CandidateSet;
use crate::error::{Error, Result};
use crate::ising::{IsingProblem, SpinConfiguration};
use crate::seed::{derive_seed, rng_from};

pub fn piqa_sample(
    problem: &IsingProblem,
    initial: &SpinConfiguration,
    schedule: &ScheduleSpec,
    params: &AnnealParams,
) -> Result<CandidateSet> {
    params.validate()?;
    let n = problem.n();
    if initial.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: initial.len(),
        });
    }
    if schedule.n_spins() != n {
        return Err(Error::Dimension {
            expected: n,
            got: schedule.n_spins(),
        });
    }
    let configs: Vec<SpinConfiguration> = (0..params.reads)
        .into_par_iter()
        .map(|read| single_read(problem, initial, schedule, params, derive_seed(params.seed, read as u64)))
        .collect();
    CandidateSet::evaluate(problem, configs)
}

fn inter_slice_coupling(gamma: f64, pt: f64) -> f64 {
    if gamma <= 0.0 {
        f64::INFINITY
    } else {
        -0.5 * pt * (gamma / pt).tanh().ln()
    }
}

fn single_read(
    problem: &IsingProblem,
    initial: &SpinConfiguration,
    schedule: &ScheduleSpec,
    params: &AnnealParams,
    seed: u64,
) -> SpinConfiguration {
    let n = problem.n();
    let slices = params.trotter_slices;
    let pt = slices as f64 * params.temperature;
    let functions = schedule.functions();
    let targets = schedule.spin_targets();
    let mut rng = rng_from(seed);

    // spins with s' = 1 are never proposed
    let movable: Vec<usize> = (0..n).filter(|&i| targets[i] < 1.0).collect();

    let mut start = initial.as_slice().to_vec();
    for i in 0..n {
        if targets[i] == 0.0 {
            start[i] = if rng.random_bool(0.5) { 1 } else { -1 };
        }
    }
    let mut spins: Vec<i8> = Vec::with_capacity(slices * n);
    for _ in 0..slices {
        spins.extend_from_slice(&start);
    }

    let mut scale = vec![0.0f64; n];
    let mut j_perp = vec![0.0f64; n];
    for sweep in 0..schedule.total_sweeps() {
        let t = (sweep + 1) as f64;
        for &i in &movable {
            let s = schedule.spin_s(i, t);
            scale[i] = functions.b(s);
            j_perp[i] = inter_slice_coupling(functions.a(s), pt);
        }

        for k in 0..slices {
            let up = if k == 0 { slices - 1 } else { k - 1 };
            let down = if k + 1 == slices { 0 } else { k + 1 };
            for &i in &movable {
                if j_perp[i].is_infinite() && slices > 1 {
                    continue;
                }
                let slice = &spins[k * n..(k + 1) * n];
                let si = slice[i] as f64;
                let mut delta = 2.0 * scale[i] * si * problem.local_field(i, slice);
                if slices > 1 {
                    let ring = (spins[up * n + i] + spins[down * n + i]) as f64;
                    delta += 2.0 * j_perp[i] * si * ring;
                }
                if delta <= 0.0 || rng.random::<f64>() < (-delta / pt).exp() {
                    spins[k * n + i] = -spins[k * n + i];
                }
            }
        }

        for &i in &movable {
            let mut delta = 0.0;
            for k in 0..slices {
                let slice = &spins[k * n..(k + 1) * n];
                delta += 2.0 * slice[i] as f64 * problem.local_field(i, slice);
            }
            delta *= scale[i];
            if delta <= 0.0 || rng.random::<f64>() < (-delta / pt).exp() {
                for k in 0..slices {
                    spins[k * n + i] = -spins[k * n + i];
                }
            }
        }
    }

    let best = (0..slices)
        .map(|k| (k, problem.energy_of(&spins[k * n..(k + 1) * n])))
        .fold((0, f64::INFINITY), |acc, (k, e)| if e < acc.1 { (k, e) } else { acc })
        .0;
    SpinConfiguration::from_vec_unchecked(spins[best * n..(best + 1) * n].to_vec())
}
