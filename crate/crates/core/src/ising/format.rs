//! Text instance format.
//!
//! ```text
//! ising v1 n=3
//! # E = offset - sum_i h_i s_i - sum_{i<j} J_ij s_i s_j
//! offset 0
//! h 0 0.25
//! J 0 1 -0.5
//! ```
//!
//! Indices are 0-based. Lines starting with `#` and blank lines are ignored.
//! The `offset` line is optional; missing `h` lines mean zero field.

use std::fmt::Write as _;
use std::path::Path;

use super::problem::IsingProblem;
use crate::error::{Error, Result};

pub const SIGN_CONVENTION: &str = "E = offset - sum_i h_i s_i - sum_{i<j} J_ij s_i s_j";

pub fn write_instance(problem: &IsingProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ising v1 n={}", problem.n());
    let _ = writeln!(out, "# {SIGN_CONVENTION}");
    if problem.offset() != 0.0 {
        let _ = writeln!(out, "offset {}", problem.offset());
    }
    for (i, h) in problem.fields().iter().enumerate() {
        let _ = writeln!(out, "h {i} {h}");
    }
    for c in problem.couplers() {
        let _ = writeln!(out, "J {} {} {}", c.i, c.j, c.value);
    }
    out
}

pub fn parse_instance(text: &str) -> Result<IsingProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let n: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["ising", "v1", size] => size
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| perr(hline, format!("bad size token `{size}`")))?,
        ["ising", version, ..] => {
            return Err(perr(hline, format!("unsupported version `{version}`")));
        }
        _ => return Err(perr(hline, "expected `ising v1 n=<N>`".into())),
    };

    let mut fields = vec![0.0; n];
    let mut field_seen = vec![false; n];
    let mut couplers = Vec::new();
    let mut pairs = std::collections::HashSet::new();
    let mut offset: Option<f64> = None;

    let num = |line: usize, tok: &str| -> Result<f64> {
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| perr(line, format!("bad number `{tok}`")))
    };
    let idx = |line: usize, tok: &str| -> Result<usize> {
        let i: usize = tok
            .parse()
            .map_err(|_| perr(line, format!("bad index `{tok}`")))?;
        if i >= n {
            return Err(perr(line, format!("index {i} out of range for n={n}")));
        }
        Ok(i)
    };

    for (line, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["h", i, v] => {
                let i = idx(line, i)?;
                if field_seen[i] {
                    return Err(perr(line, format!("duplicate field for spin {i}")));
                }
                field_seen[i] = true;
                fields[i] = num(line, v)?;
            }
            ["J", i, j, v] => {
                let (i, j) = (idx(line, i)?, idx(line, j)?);
                if i == j {
                    return Err(perr(line, format!("self-coupling on spin {i}")));
                }
                let key = (i.min(j), i.max(j));
                if !pairs.insert(key) {
                    return Err(perr(line, format!("duplicate coupler ({}, {})", key.0, key.1)));
                }
                couplers.push((key.0, key.1, num(line, v)?));
            }
            ["offset", v] => {
                if offset.is_some() {
                    return Err(perr(line, "duplicate offset".into()));
                }
                offset = Some(num(line, v)?);
            }
            _ => return Err(perr(line, format!("unrecognised line `{l}`"))),
        }
    }
    IsingProblem::with_offset(n, fields, couplers, offset.unwrap_or(0.0))
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<IsingProblem> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn save_instance(problem: &IsingProblem, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_instance(problem))?;
    Ok(())
}
