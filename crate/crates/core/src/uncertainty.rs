//! Mapping between a bit's uncertainty `P` and the reverse-anneal point `s'`.
//!
//! A single qubit `H = -A(s) X + B(s) Z` has ground-state population ratio
//! `x^2` with `x = sqrt(1 + r^2) + r`, `r = B/A`. Matching that ratio to a
//! Boltzmann factor gives the effective temperature `T' = 2 / ln(x^2)`, and
//! equating `T'` with the Nishimori temperature `2 / ln((1-P)/P)` gives
//! `P = 1 / (1 + x^2)`. Note `ln x = asinh(r)`, which is how both are
//! evaluated here.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRID: usize = 1000;
const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    points: Vec<(f64, f64)>,
}

impl Table {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParams("a schedule table needs at least two points".into()));
        }
        if points.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite schedule table entry".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParams("repeated s in schedule table".into()));
        }
        if points[0].0 > 0.0 || points[points.len() - 1].0 < 1.0 {
            return Err(Error::InvalidParams("schedule table must cover [0, 1]".into()));
        }
        Ok(Self { points })
    }

    pub fn eval(&self, s: f64) -> f64 {
        let p = &self.points;
        let k = p.partition_point(|&(x, _)| x <= s);
        if k == 0 {
            return p[0].1;
        }
        if k == p.len() {
            return p[k - 1].1;
        }
        let (x0, y0) = p[k - 1];
        let (x1, y1) = p[k];
        y0 + (y1 - y0) * (s - x0) / (x1 - x0)
    }

    fn knots(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0).filter(|s| (0.0..=1.0).contains(s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleFamily {
    /// `A(s) = gamma0 (1 - s)`, `B(s) = s`.
    Linear { gamma0: f64 },
    Tabulated { a: Table, b: Table },
}

/// Driver and problem scales `A(s)`, `B(s)` plus the bath temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleFunctions {
    family: ScheduleFamily,
    t_phys: f64,
    invertible: bool,
}

impl ScheduleFunctions {
    pub fn linear() -> Self {
        Self::new(ScheduleFamily::Linear { gamma0: 1.0 }, 0.0).expect("linear schedule is valid")
    }

    pub fn new(family: ScheduleFamily, t_phys: f64) -> Result<Self> {
        if !(t_phys >= 0.0 && t_phys.is_finite()) {
            return Err(Error::Domain(format!("T_phys = {t_phys} must be finite and >= 0")));
        }
        if let ScheduleFamily::Linear { gamma0 } = family {
            if !(gamma0 > 0.0 && gamma0.is_finite()) {
                return Err(Error::Domain(format!("gamma0 = {gamma0} must be positive")));
            }
        }
        let mut sf = Self {
            family,
            t_phys,
            invertible: false,
        };
        sf.check_shape()?;
        sf.invertible = sf.strictly_decreasing();
        Ok(sf)
    }

    pub fn with_t_phys(&self, t_phys: f64) -> Result<Self> {
        Self::new(self.family.clone(), t_phys)
    }

    pub fn family(&self) -> &ScheduleFamily {
        &self.family
    }

    pub fn t_phys(&self) -> f64 {
        self.t_phys
    }

    pub fn a(&self, s: f64) -> f64 {
        match &self.family {
            ScheduleFamily::Linear { gamma0 } => gamma0 * (1.0 - s),
            ScheduleFamily::Tabulated { a, .. } => a.eval(s),
        }
    }

    pub fn b(&self, s: f64) -> f64 {
        match &self.family {
            ScheduleFamily::Linear { .. } => s,
            ScheduleFamily::Tabulated { b, .. } => b.eval(s),
        }
    }

    fn sample_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = (0..=GRID).map(|k| k as f64 / GRID as f64).collect();
        if let ScheduleFamily::Tabulated { a, b } = &self.family {
            pts.extend(a.knots());
            pts.extend(b.knots());
            pts.sort_by(f64::total_cmp);
            pts.dedup();
        }
        pts
    }

    fn check_shape(&self) -> Result<()> {
        let pts = self.sample_points();
        let mut prev: Option<(f64, f64)> = None;
        for &s in &pts {
            let (a, b) = (self.a(s), self.b(s));
            if a < 0.0 || b < 0.0 {
                return Err(Error::InvalidParams(format!("negative schedule value at s = {s}")));
            }
            if let Some((pa, pb)) = prev {
                if a > pa || b < pb {
                    return Err(Error::InvalidParams(format!(
                        "A must be non-increasing and B non-decreasing (violated at s = {s})"
                    )));
                }
            }
            prev = Some((a, b));
        }
        let (a0, b0, a1, b1) = (self.a(0.0), self.b(0.0), self.a(1.0), self.b(1.0));
        if !(a0 > 10.0 * b0) || !(b1 > 10.0 * a1) {
            return Err(Error::InvalidParams(
                "schedule must satisfy A(0) > 10 B(0) and B(1) > 10 A(1)".into(),
            ));
        }
        Ok(())
    }

    fn strictly_decreasing(&self) -> bool {
        let vals: Result<Vec<f64>> = self.sample_points().iter().map(|&s| self.uncertainty(s)).collect();
        match vals {
            Ok(v) => v.windows(2).all(|w| w[1] < w[0]),
            Err(_) => false,
        }
    }

    fn check_s(s: f64) -> Result<()> {
        if (0.0..=1.0).contains(&s) {
            Ok(())
        } else {
            Err(Error::Domain(format!("s' = {s} outside [0, 1]")))
        }
    }

    /// `B/A` at `s`, `+inf` where `A = 0`.
    fn ratio(&self, s: f64) -> Result<f64> {
        Self::check_s(s)?;
        let (a, b) = (self.a(s), self.b(s));
        if a == 0.0 && b == 0.0 {
            return Err(Error::DegenerateSchedule { s });
        }
        Ok(if a == 0.0 { f64::INFINITY } else { b / a })
    }

    /// Effective temperature `T'(s')`; `+inf` where `B = 0`, `0` where `A = 0`.
    pub fn effective_temperature(&self, s: f64) -> Result<f64> {
        let r = self.ratio(s)?;
        Ok(if r == 0.0 {
            f64::INFINITY
        } else if r.is_infinite() {
            0.0
        } else {
            1.0 / r.asinh()
        })
    }

    /// Uncertainty implied by the transverse field alone.
    pub fn uncertainty_from_s(&self, s: f64) -> Result<f64> {
        let r = self.ratio(s)?;
        if r.is_infinite() {
            return Ok(0.0);
        }
        let x = r + r.hypot(1.0);
        Ok(1.0 / (1.0 + x * x))
    }

    /// Uncertainty with bath noise `T_phys / B` added in quadrature to `T'`.
    pub fn uncertainty_from_s_thermal(&self, s: f64) -> Result<f64> {
        let t_eff = self.effective_temperature(s)?;
        let b = self.b(s);
        if b == 0.0 {
            return Ok(0.5);
        }
        let thermal = self.t_phys / b;
        let t_n = t_eff.hypot(thermal);
        Ok(1.0 / (1.0 + (2.0 / t_n).exp()))
    }

    /// The uncertainty heuristic in use: thermal form when `T_phys > 0`.
    pub fn uncertainty(&self, s: f64) -> Result<f64> {
        if self.t_phys > 0.0 {
            self.uncertainty_from_s_thermal(s)
        } else {
            self.uncertainty_from_s(s)
        }
    }

    /// Inverts [`Self::uncertainty`] by bisection. Uncertainties above `P(0)`
    /// map to 0 and below `P(1)` map to 1.
    pub fn s_from_uncertainty(&self, p: f64) -> Result<f64> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::Domain(format!("uncertainty {p} outside [0, 0.5]")));
        }
        if p == 0.5 {
            return Ok(0.0);
        }
        if p == 0.0 {
            return Ok(1.0);
        }
        if !self.invertible {
            return Err(Error::InversionUnsupported);
        }
        if p >= self.uncertainty(0.0)? {
            return Ok(0.0);
        }
        if p <= self.uncertainty(1.0)? {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if self.uncertainty(mid)? > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Nishimori temperature `2 / ln((1-P)/P)`, `+inf` at `P = 0.5`.
pub fn nishimori_temperature(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Domain(format!("uncertainty {p} outside (0, 0.5]")));
    }
    if p == 0.5 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 / ((-p).ln_1p() - p.ln()))
}

/// Inverse of [`nishimori_temperature`]: the uncertainty encoded by temperature `t`.
pub fn nishimori_uncertainty(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t.is_infinite() {
        0.5
    } else {
        1.0 / (1.0 + (2.0 / t).exp())
    }
}

/// Schedule selection as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Linear {
        #[serde(default = "one")]
        gamma0: f64,
    },
    Tabulated {
        file: String,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig::Linear { gamma0: 1.0 }
    }
}

impl ScheduleConfig {
    pub fn load(&self, t_phys: f64) -> Result<ScheduleFunctions> {
        let family = match self {
            ScheduleConfig::Linear { gamma0 } => ScheduleFamily::Linear { gamma0: *gamma0 },
            ScheduleConfig::Tabulated { file } => read_tables(file)?,
        };
        ScheduleFunctions::new(family, t_phys)
    }
}

/// Parses a tabulated schedule: an `[A]` section and a `[B]` section, each a
/// list of `s value` rows, linearly interpolated.
pub fn parse_tables(text: &str) -> Result<ScheduleFamily> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut current: Option<&mut Vec<(f64, f64)>> = None;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: k + 1, msg };
        match line {
            "[A]" => current = Some(&mut a),
            "[B]" => current = Some(&mut b),
            _ => {
                let target = current
                    .as_deref_mut()
                    .ok_or_else(|| perr("row before any [A]/[B] section".into()))?;
                let cols: Vec<&str> = line.split_whitespace().collect();
                let [s, v] = cols.as_slice() else {
                    return Err(perr(format!("expected two columns, got `{line}`")));
                };
                let s: f64 = s.parse().map_err(|_| perr(format!("bad s `{s}`")))?;
                let v: f64 = v.parse().map_err(|_| perr(format!("bad value `{v}`")))?;
                target.push((s, v));
            }
        }
    }
    Ok(ScheduleFamily::Tabulated {
        a: Table::new(a)?,
        b: Table::new(b)?,
    })
}

pub fn read_tables(path: impl AsRef<Path>) -> Result<ScheduleFamily> {
    parse_tables(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal_ab() -> ScheduleFunctions {
        // A = B at s = 0.5 on the linear family.
        ScheduleFunctions::linear()
    }

    #[test]
    fn effective_temperature_examples() {
        let sf = equal_ab();
        assert_eq!(sf.effective_temperature(0.0).unwrap(), f64::INFINITY);
        assert_eq!(sf.effective_temperature(1.0).unwrap(), 0.0);
        let want = 2.0 / ((2f64.sqrt() + 1.0).powi(2)).ln();
        assert!((sf.effective_temperature(0.5).unwrap() - want).abs() < 1e-14);
        assert!((want - 1.13459).abs() < 1e-5);
    }

    #[test]
    fn uncertainty_examples() {
        let sf = equal_ab();
        assert_eq!(sf.uncertainty_from_s(0.0).unwrap(), 0.5);
        assert_eq!(sf.uncertainty_from_s(1.0).unwrap(), 0.0);
        let want = 1.0 / (1.0 + (2f64.sqrt() + 1.0).powi(2));
        assert!((sf.uncertainty_from_s(0.5).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.146447).abs() < 1e-6);
        assert!(sf.uncertainty_from_s(1.5).is_err());
    }

    #[test]
    fn nishimori_examples() {
        assert_eq!(nishimori_temperature(0.5).unwrap(), f64::INFINITY);
        let p = 1.0 / (1.0 + 2f64.exp());
        assert!((nishimori_temperature(p).unwrap() - 1.0).abs() < 1e-14);
        assert!(nishimori_temperature(0.1).unwrap() < nishimori_temperature(0.2).unwrap());
        assert!(nishimori_temperature(0.0).is_err());
        assert!(nishimori_temperature(0.6).is_err());
        assert!((nishimori_uncertainty(1.0) - p).abs() < 1e-15);
    }

    #[test]
    fn thermal_limits() {
        let sf = ScheduleFunctions::linear();
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let thermal = sf.uncertainty_from_s_thermal(s).unwrap();
            assert!((thermal - sf.uncertainty_from_s(s).unwrap()).abs() < 1e-12);
        }
        let hot = sf.with_t_phys(1e9).unwrap();
        assert!((hot.uncertainty_from_s_thermal(0.7).unwrap() - 0.5).abs() < 1e-8);
        assert_eq!(hot.uncertainty_from_s_thermal(0.0).unwrap(), 0.5);
    }

    #[test]
    fn inversion_endpoints_and_roundtrip() {
        let sf = ScheduleFunctions::linear();
        assert_eq!(sf.s_from_uncertainty(0.5).unwrap(), 0.0);
        assert_eq!(sf.s_from_uncertainty(0.0).unwrap(), 1.0);
        for k in 1..50 {
            let p = 0.5 * k as f64 / 50.0;
            let s = sf.s_from_uncertainty(p).unwrap();
            assert!((sf.uncertainty_from_s(s).unwrap() - p).abs() < 1e-6);
        }
        assert!(sf.s_from_uncertainty(0.7).is_err());
    }

    #[test]
    fn thermal_inversion_clamps_below_floor() {
        let sf = ScheduleFunctions::linear().with_t_phys(0.5).unwrap();
        let floor = sf.uncertainty(1.0).unwrap();
        assert!(floor > 0.0);
        assert_eq!(sf.s_from_uncertainty(floor / 2.0).unwrap(), 1.0);
        let s = sf.s_from_uncertainty(0.3).unwrap();
        assert!((sf.uncertainty(s).unwrap() - 0.3).abs() < 1e-6);
    }

    #[test]
    fn flat_table_is_not_invertible() {
        let text = "[A]\n0 1\n0.4 0.5\n0.6 0.5\n1 0\n[B]\n0 0\n0.4 0.5\n0.6 0.5\n1 1\n";
        let sf = ScheduleFunctions::new(parse_tables(text).unwrap(), 0.0).unwrap();
        assert_eq!(sf.s_from_uncertainty(0.2), Err(Error::InversionUnsupported));
        assert_eq!(sf.s_from_uncertainty(0.5).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_matches_linear() {
        let text = "# linear\n[A]\n0 1\n1 0\n[B]\n0 0\n1 1\n";
        let sf = ScheduleFunctions::new(parse_tables(text).unwrap(), 0.0).unwrap();
        let lin = ScheduleFunctions::linear();
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            assert!((sf.a(s) - lin.a(s)).abs() < 1e-15);
            assert!((sf.uncertainty(s).unwrap() - lin.uncertainty(s).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn shape_violations_rejected() {
        let rising_a = "[A]\n0 1\n0.5 2\n1 0\n[B]\n0 0\n1 1\n";
        assert!(ScheduleFunctions::new(parse_tables(rising_a).unwrap(), 0.0).is_err());
        let weak_end = "[A]\n0 1\n1 0.5\n[B]\n0 0\n1 1\n";
        assert!(ScheduleFunctions::new(parse_tables(weak_end).unwrap(), 0.0).is_err());
        assert!(parse_tables("0 1\n").is_err());
        assert!(parse_tables("[A]\n0.1 1\n1 0\n[B]\n0 0\n1 1\n").is_err());
    }

    #[test]
    fn config_parsing() {
        let c: ScheduleConfig = serde_json::from_str(r#"{"schedule":"linear"}"#).unwrap();
        assert_eq!(c, ScheduleConfig::Linear { gamma0: 1.0 });
        assert!(serde_json::from_str::<ScheduleConfig>(r#"{"schedule":"linear","x":1}"#).is_err());
        let t: ScheduleConfig =
            serde_json::from_str(r#"{"schedule":"tabulated","file":"a.txt"}"#).unwrap();
        assert!(matches!(t, ScheduleConfig::Tabulated { .. }));
    }
}
