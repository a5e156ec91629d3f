use serde::{Deserialize, Serialize};

use crate::belief::CandidateSet;
use crate::error::{Error, Result};
use crate::ising::SpinConfiguration;

/// Energy part `Ŵ` of a candidate's weight. The bit part is always the
/// binomial Hamming weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "weight", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergyWeight {
    Uniform,
    Thermal {
        #[serde(rename = "T")]
        t: f64,
    },
    Elite {
        #[serde(rename = "E_elite")]
        e_elite: f64,
    },
}

impl EnergyWeight {
    /// Weights for a whole list; thermal weights are shifted by the minimum
    /// energy so the largest is exactly one.
    pub fn weights(&self, energies: &[f64]) -> Result<Vec<f64>> {
        Ok(match *self {
            EnergyWeight::Uniform => vec![1.0; energies.len()],
            EnergyWeight::Thermal { t } => {
                if !(t > 0.0) {
                    return Err(Error::Domain(format!("thermal weight temperature {t} must be positive")));
                }
                let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
                energies.iter().map(|e| (-(e - e0) / t).exp()).collect()
            }
            EnergyWeight::Elite { e_elite } => energies
                .iter()
                .map(|&e| if e < e_elite { 1.0 } else { 0.0 })
                .collect(),
        })
    }
}

/// `1 / C(size, distance)`.
pub fn binomial_weight(size: usize, distance: usize) -> Result<f64> {
    if distance > size {
        return Err(Error::Domain(format!("distance {distance} exceeds cluster size {size}")));
    }
    let d = distance.min(size - distance);
    let mut c = 1.0f64;
    for k in 0..d {
        c = c * (size - k) as f64 / (k + 1) as f64;
    }
    Ok(1.0 / c.round())
}

/// Uncertainty of cluster `members` given values `s`: the weighted fraction
/// of candidates whose overlap with `s` on the cluster is negative, clamped
/// to 0.5. Zero-overlap candidates only enter the denominator.
pub fn cluster_uncertainty(
    candidates: &CandidateSet,
    s: &SpinConfiguration,
    members: &[usize],
    weight: &EnergyWeight,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("candidate list"));
    }
    if members.is_empty() {
        return Err(Error::EmptyInput("cluster"));
    }
    let w_hat = weight.weights(candidates.energies())?;
    let k = members.len();
    let mut below = 0.0;
    let mut total = 0.0;
    for (g, wh) in candidates.configs().iter().zip(w_hat) {
        if g.len() != s.len() {
            return Err(Error::Dimension {
                expected: s.len(),
                got: g.len(),
            });
        }
        let mut overlap = 0i64;
        let mut distance = 0;
        for &m in members {
            let agree = g.get(m) == s.get(m);
            overlap += if agree { 1 } else { -1 };
            distance += usize::from(!agree);
        }
        let w = wh * binomial_weight(k, distance)?;
        total += w;
        if overlap < 0 {
            below += w;
        }
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateWeight { cluster: members[0] });
    }
    Ok((below / total).min(0.5))
}
