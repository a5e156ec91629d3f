use proptest::prelude::*;

use infprim::backend::{build_schedule, ScheduleSpec};
use infprim::bp::{bp_as_primitive, bp_run, BpParams};
use infprim::ising::{global_flip, ClusterSet, IsingProblem, SpinConfiguration};
use infprim::processing::{belief_raw, cluster_uncertainty, EnergyWeight};
use infprim::uncertainty::ScheduleFunctions;
use infprim::{Belief, CandidateSet};

fn spins(n: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n)
}

/// `m` candidates over `n` bits with arbitrary energies.
fn candidates(n: usize, m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = CandidateSet> {
    prop::collection::vec((spins(n), -5.0f64..5.0), m).prop_map(|rows| {
        let (c, e): (Vec<_>, Vec<_>) = rows
            .into_iter()
            .map(|(s, e)| (SpinConfiguration::new(s).unwrap(), e))
            .unzip();
        CandidateSet::new(c, e).unwrap()
    })
}

fn flipped(set: &CandidateSet) -> CandidateSet {
    CandidateSet::new(set.configs().iter().map(global_flip).collect(), set.energies().to_vec()).unwrap()
}

fn weight() -> impl Strategy<Value = EnergyWeight> {
    prop_oneof![
        Just(EnergyWeight::Uniform),
        (0.1f64..5.0).prop_map(|t| EnergyWeight::Thermal { t }),
        (-5.0f64..6.0).prop_map(|e_elite| EnergyWeight::Elite { e_elite }),
    ]
}

fn tree(n: usize) -> impl Strategy<Value = IsingProblem> {
    (
        prop::collection::vec(-1.0f64..1.0, n),
        prop::collection::vec((any::<prop::sample::Index>(), -1.5f64..1.5), n - 1),
    )
        .prop_map(move |(h, edges)| {
            let couplers = edges.iter().enumerate().map(|(k, (p, j))| (p.index(k + 1), k + 1, *j)).collect();
            IsingProblem::new(n, h, couplers).unwrap()
        })
}

proptest! {
    #[test]
    fn raw_belief_is_flip_equivariant(set in (1usize..7).prop_flat_map(|n| candidates(n, 1..=5))
        .prop_filter("odd count", |s| s.len() % 2 == 1)) {
        let clusters = ClusterSet::singletons(set.configs()[0].len());
        let a = belief_raw(&set, &clusters).unwrap();
        let b = belief_raw(&flipped(&set), &clusters).unwrap();
        prop_assert_eq!(&global_flip(a.values()), b.values());
        prop_assert_eq!(a.uncertainty(), b.uncertainty());
        prop_assert!(a.uncertainty().iter().all(|p| (0.0..=0.5).contains(p)));
    }

    #[test]
    fn cluster_uncertainty_is_flip_symmetric(
        (set, s, members) in (2usize..8).prop_flat_map(|n| (
            candidates(n, 1..=10),
            spins(n),
            prop::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n),
        )),
        w in weight(),
    ) {
        let s = SpinConfiguration::new(s).unwrap();
        let a = cluster_uncertainty(&set, &s, &members, &w);
        let b = cluster_uncertainty(&flipped(&set), &global_flip(&s), &members, &w);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!((0.0..=0.5).contains(&a));
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn bp_marginals_ignore_offset_and_scale(problem in (2usize..10).prop_flat_map(tree), t in 0.3f64..3.0,
        offset in -10.0f64..10.0, scale in 0.2f64..5.0) {
        let params = BpParams::at_temperature(t);
        let base = bp_run(&problem, &params).unwrap();
        for (p, m) in base.plus.iter().zip(&base.minus) {
            prop_assert!((p + m - 1.0).abs() < 1e-12);
        }
        let shifted = IsingProblem::with_offset(
            problem.n(),
            problem.fields().to_vec(),
            problem.couplers().iter().map(|c| (c.i, c.j, c.value)).collect(),
            offset,
        ).unwrap();
        let scaled = IsingProblem::new(
            problem.n(),
            problem.fields().iter().map(|h| h * scale).collect(),
            problem.couplers().iter().map(|c| (c.i, c.j, c.value * scale)).collect(),
        ).unwrap();
        let a = bp_run(&shifted, &params).unwrap();
        let b = bp_run(&scaled, &BpParams::at_temperature(t * scale)).unwrap();
        for i in 0..problem.n() {
            prop_assert!((a.plus[i] - base.plus[i]).abs() < 1e-10);
            prop_assert!((b.plus[i] - base.plus[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn spin_paths_follow_the_clamped_triangle(targets in prop::collection::vec(0.0f64..=1.0, 1..6),
        offsets in prop::collection::vec(-3.0f64..3.0, 6), tau in 1usize..30) {
        let n = targets.len();
        let offsets = offsets[..n].to_vec();
        let spec = ScheduleSpec::from_spin_targets(ScheduleFunctions::linear(), targets.clone(), offsets.clone(), tau).unwrap();
        let s_min = targets.iter().copied().fold(1.0, f64::min);
        let tau = tau as f64;
        for i in 0..n {
            let mut prev = 1.0;
            let turn = tau + offsets[i];
            for k in 0..=200 {
                let t = -4.0 + (2.0 * tau + 8.0) * k as f64 / 200.0;
                let s = spec.spin_s(i, t);
                let u = t - offsets[i];
                let global = if u <= 0.0 || u >= 2.0 * tau { 1.0 } else { 1.0 - (1.0 - s_min) * (1.0 - (u - tau).abs() / tau) };
                prop_assert!((s - global.max(targets[i])).abs() < 1e-12);
                prop_assert!(s >= targets[i] && s <= 1.0);
                // falling up to the turn, rising after it
                let prev_t = -4.0 + (2.0 * tau + 8.0) * (k as f64 - 1.0) / 200.0;
                if k > 0 && t <= turn {
                    prop_assert!(s <= prev + 1e-12);
                } else if k > 0 && prev_t >= turn {
                    prop_assert!(s >= prev - 1e-12);
                }
                prev = s;
            }
        }
    }

    #[test]
    fn certain_bits_never_leave_s_one(p in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..=0.5], 1..8), tau in 1usize..20) {
        let n = p.len();
        let belief = Belief::new(ClusterSet::singletons(n), SpinConfiguration::uniform(n, 1), p.clone()).unwrap();
        let spec = build_schedule(&belief, &ScheduleFunctions::linear(), None, tau).unwrap();
        for i in (0..n).filter(|&i| p[i] == 0.0) {
            for t in 0..=spec.total_sweeps() {
                prop_assert_eq!(spec.spin_s(i, t as f64), 1.0);
            }
        }
    }
}

#[test]
fn bp_primitive_samples_tree_marginals() {
    let problem = IsingProblem::new(
        4,
        vec![0.4, -0.2, 0.0, 0.1],
        vec![(0, 1, 0.7), (1, 2, -0.5), (1, 3, 0.3)],
    )
    .unwrap();
    let params = BpParams::at_temperature(1.0);
    let m = bp_run(&problem, &params).unwrap();
    let reads = 10_000;
    let belief = Belief::uninformed(ClusterSet::singletons(4));
    let set = bp_as_primitive(&problem, &belief, &params, reads, 17).unwrap();
    for i in 0..4 {
        let ups = set.configs().iter().filter(|c| c.get(i) == 1).count() as f64;
        let p = m.plus[i];
        let sigma = (reads as f64 * p * (1.0 - p)).sqrt();
        assert!((ups - reads as f64 * p).abs() <= 3.0 * sigma, "bit {i}: {ups} vs {}", reads as f64 * p);
    }
}
