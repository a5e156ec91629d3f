use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::uncertainty::ScheduleFunctions;

/// Per-spin reverse-anneal schedule.
///
/// The global parameter runs the triangle `1 -> s_min -> 1` with `tau` sweeps
/// per leg, where `s_min` is the smallest target. Spin `i` follows
/// `s_i(t) = max(s_global(t - offset_i), s'_i)`: it stays at `s'_i` until the
/// global parameter climbs back past it. Positive offsets retard a spin,
/// negative ones advance it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    functions: ScheduleFunctions,
    cluster_targets: Vec<f64>,
    cluster_offsets: Vec<f64>,
    targets: Vec<f64>,
    offsets: Vec<f64>,
    tau: usize,
    s_min: f64,
}

impl ScheduleSpec {
    /// Builds a schedule directly from per-spin targets and offsets.
    pub fn from_spin_targets(
        functions: ScheduleFunctions,
        targets: Vec<f64>,
        offsets: Vec<f64>,
        tau: usize,
    ) -> Result<Self> {
        if targets.len() != offsets.len() {
            return Err(Error::Dimension {
                expected: targets.len(),
                got: offsets.len(),
            });
        }
        if tau == 0 {
            return Err(Error::InvalidParams("tau must be at least one sweep".into()));
        }
        if let Some(s) = targets.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Domain(format!("target s' = {s} outside [0, 1]")));
        }
        if offsets.iter().any(|d| !d.is_finite()) {
            return Err(Error::Domain("schedule offsets must be finite".into()));
        }
        let s_min = targets.iter().copied().fold(1.0, f64::min);
        Ok(Self {
            functions,
            cluster_targets: targets.clone(),
            cluster_offsets: offsets.clone(),
            targets,
            offsets,
            tau,
            s_min,
        })
    }

    pub fn functions(&self) -> &ScheduleFunctions {
        &self.functions
    }

    pub fn n_spins(&self) -> usize {
        self.targets.len()
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Per-cluster targets `s'_i`.
    pub fn cluster_targets(&self) -> &[f64] {
        &self.cluster_targets
    }

    pub fn cluster_offsets(&self) -> &[f64] {
        &self.cluster_offsets
    }

    /// Per-spin targets: the lowest target among clusters holding the spin.
    pub fn spin_targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    /// Sweeps needed for every spin to finish its forward leg.
    pub fn total_sweeps(&self) -> usize {
        let delay = self.offsets.iter().copied().fold(0.0, f64::max);
        2 * self.tau + delay.ceil() as usize
    }

    pub fn s_global(&self, t: f64) -> f64 {
        let tau = self.tau as f64;
        let depth = 1.0 - self.s_min;
        if t <= 0.0 || t >= 2.0 * tau {
            1.0
        } else if t <= tau {
            1.0 - depth * t / tau
        } else {
            self.s_min + depth * (t - tau) / tau
        }
    }

    pub fn spin_s(&self, i: usize, t: f64) -> f64 {
        self.s_global(t - self.offsets[i]).max(self.targets[i])
    }
}

/// Maps every cluster's uncertainty to a reverse-anneal target through the
/// schedule's uncertainty heuristic. `offsets` are per cluster, in sweeps.
pub fn build_schedule(
    belief: &Belief,
    functions: &ScheduleFunctions,
    offsets: Option<&[f64]>,
    tau: usize,
) -> Result<ScheduleSpec> {
    let clusters = belief.clusters();
    let offsets: Vec<f64> = match offsets {
        Some(o) if o.len() != clusters.len() => {
            return Err(Error::Dimension {
                expected: clusters.len(),
                got: o.len(),
            })
        }
        Some(o) => o.to_vec(),
        None => vec![0.0; clusters.len()],
    };
    let cluster_targets = belief
        .uncertainty()
        .iter()
        .map(|&p| functions.s_from_uncertainty(p))
        .collect::<Result<Vec<_>>>()?;

    let n = belief.n_bits();
    let mut targets = vec![f64::INFINITY; n];
    let mut spin_offsets = vec![0.0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &m in members {
            if cluster_targets[c] < targets[m] {
                targets[m] = cluster_targets[c];
                spin_offsets[m] = offsets[c];
            }
        }
    }
    let mut spec = ScheduleSpec::from_spin_targets(functions.clone(), targets, spin_offsets, tau)?;
    spec.cluster_targets = cluster_targets;
    spec.cluster_offsets = offsets;
    Ok(spec)
}
