use std::collections::HashSet;

use rand::Rng;

use super::spins::SpinConfiguration;
use crate::error::{Error, Result};
use crate::seed::rng_from;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupler {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// An Ising problem with energy
/// `E(s) = offset - sum_i h_i s_i - sum_{i<j} J_ij s_i s_j`.
///
/// Couplers are stored as a sparse edge list; an adjacency view is built once
/// at construction. Instances are immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    n: usize,
    fields: Vec<f64>,
    couplers: Vec<Coupler>,
    offset: f64,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl IsingProblem {
    pub fn new(n: usize, fields: Vec<f64>, couplers: Vec<(usize, usize, f64)>) -> Result<Self> {
        Self::with_offset(n, fields, couplers, 0.0)
    }

    pub fn with_offset(
        n: usize,
        fields: Vec<f64>,
        couplers: Vec<(usize, usize, f64)>,
        offset: f64,
    ) -> Result<Self> {
        if fields.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: fields.len(),
            });
        }
        if let Some(i) = fields.iter().position(|h| !h.is_finite()) {
            return Err(Error::InvalidProblem(format!("field h_{i} is not finite")));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidProblem("offset is not finite".into()));
        }
        let mut seen = HashSet::with_capacity(couplers.len());
        let mut adjacency = vec![Vec::new(); n];
        let mut stored = Vec::with_capacity(couplers.len());
        for (a, b, value) in couplers {
            if a == b {
                return Err(Error::InvalidProblem(format!("self-coupling on spin {a}")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= n {
                return Err(Error::Index { index: j, len: n });
            }
            if !value.is_finite() {
                return Err(Error::InvalidProblem(format!("coupler J_{i},{j} is not finite")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidProblem(format!("duplicate coupler ({i}, {j})")));
            }
            adjacency[i].push((j, value));
            adjacency[j].push((i, value));
            stored.push(Coupler { i, j, value });
        }
        Ok(Self {
            n,
            fields,
            couplers: stored,
            offset,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplers(&self) -> &[Coupler] {
        &self.couplers
    }

    /// Constant energy carried over from spins that were fixed out of the problem.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// True when every field is exactly zero, i.e. the problem is invariant
    /// under a global spin flip.
    pub fn is_field_free(&self) -> bool {
        self.fields.iter().all(|&h| h == 0.0)
    }

    /// `h_i + sum_j J_ij s_j`.
    #[inline]
    pub fn local_field(&self, i: usize, spins: &[i8]) -> f64 {
        let mut f = self.fields[i];
        for &(j, w) in &self.adjacency[i] {
            f += w * spins[j] as f64;
        }
        f
    }

    /// Energy change caused by flipping spin `i`.
    #[inline]
    pub fn flip_delta(&self, i: usize, spins: &[i8]) -> f64 {
        2.0 * spins[i] as f64 * self.local_field(i, spins)
    }

    pub fn energy(&self, config: &SpinConfiguration) -> Result<f64> {
        if config.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: config.len(),
            });
        }
        Ok(self.energy_of(config.as_slice()))
    }

    /// Energy of a raw spin slice; the caller guarantees the length.
    pub fn energy_of(&self, s: &[i8]) -> f64 {
        debug_assert_eq!(s.len(), self.n);
        let field: f64 = self
            .fields
            .iter()
            .zip(s)
            .map(|(h, &si)| h * si as f64)
            .sum();
        let coupling: f64 = self
            .couplers
            .iter()
            .map(|c| c.value * (s[c.i] * s[c.j]) as f64)
            .sum();
        self.offset - field - coupling
    }

    /// Sum of absolute coefficients; a scale for numerical tolerances.
    pub fn magnitude(&self) -> f64 {
        self.offset.abs()
            + self.fields.iter().map(|h| h.abs()).sum::<f64>()
            + self.couplers.iter().map(|c| c.value.abs()).sum::<f64>()
    }

    /// Removes spin `index` by clamping it to `value`.
    ///
    /// Each coupler `J_k,index` becomes a field contribution `J_k,index * value`
    /// on spin `k`, and `-h_index * value` moves into the offset, so the reduced
    /// energy of any configuration equals the original energy of that
    /// configuration with the removed spin reinserted. Spins above `index`
    /// shift down by one.
    pub fn fix_spin(&self, index: usize, value: i8) -> Result<IsingProblem> {
        if index >= self.n {
            return Err(Error::Index {
                index,
                len: self.n,
            });
        }
        if value != 1 && value != -1 {
            return Err(Error::Domain(format!("fixed value {value} is not +1 or -1")));
        }
        let v = value as f64;
        let remap = |k: usize| if k > index { k - 1 } else { k };
        let mut fields: Vec<f64> = self
            .fields
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != index)
            .map(|(_, &h)| h)
            .collect();
        let mut couplers = Vec::with_capacity(self.couplers.len());
        for c in &self.couplers {
            if c.i == index {
                fields[remap(c.j)] += c.value * v;
            } else if c.j == index {
                fields[remap(c.i)] += c.value * v;
            } else {
                couplers.push((remap(c.i), remap(c.j), c.value));
            }
        }
        let offset = self.offset - self.fields[index] * v;
        IsingProblem::with_offset(self.n - 1, fields, couplers, offset)
    }
}

/// Inserts `value` at position `index`, inverse of the index shift done by
/// [`IsingProblem::fix_spin`].
pub fn lift_fixed(reduced: &[i8], index: usize, value: i8) -> Vec<i8> {
    let mut out = Vec::with_capacity(reduced.len() + 1);
    out.extend_from_slice(&reduced[..index]);
    out.push(value);
    out.extend_from_slice(&reduced[index..]);
    out
}

/// Fully connected problem with zero fields and every `J_ij` uniform in [-1, 1].
pub fn generate_sk(n: usize, seed: u64) -> Result<IsingProblem> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("SK instance needs n >= 2, got {n}")));
    }
    let mut rng = rng_from(seed);
    let mut couplers = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            couplers.push((i, j, rng.random_range(-1.0..=1.0)));
        }
    }
    IsingProblem::new(n, vec![0.0; n], couplers)
}

/// SK instance of `n` spins with the last spin fixed down, leaving `n - 1`
/// free spins with fields `-J_{i,n}`.
pub fn generate_sk_fixed(n: usize, seed: u64) -> Result<IsingProblem> {
    if n < 3 {
        return Err(Error::InvalidSize(format!(
            "fixed SK instance needs n >= 3, got {n}"
        )));
    }
    generate_sk(n, seed)?.fix_spin(n - 1, -1)
}
