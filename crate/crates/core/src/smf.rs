//! Plain-text simplicial mesh format:
//!
//! ```text
//! smf <d> <n>
//! <#vertices> <#simplices>
//! <n floats per vertex line>
//! <d+1 indices per simplex line> [multiplicity]
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::simplicial::SimplicialManifold;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses an SMF document and validates the mesh.
pub fn read_smf(text: &str) -> Result<SimplicialManifold> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "smf" {
        return Err(parse_err(ln, "expected header `smf <d> <n>`"));
    }
    let d: usize = fields[1].parse().map_err(|_| parse_err(ln, "bad intrinsic dimension"))?;
    let n: usize = fields[2].parse().map_err(|_| parse_err(ln, "bad ambient dimension"))?;
    let (ln, counts) = lines.next().ok_or_else(|| parse_err(ln + 1, "missing counts line"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|c| c.parse().map_err(|_| parse_err(ln, "bad count")))
        .collect::<Result<_>>()?;
    let [nv, ns] = counts[..] else {
        return Err(parse_err(ln, "expected `<#vertices> <#simplices>`"));
    };
    let mut coords = Vec::with_capacity(nv * n);
    for _ in 0..nv {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "missing vertex line"))?;
        let before = coords.len();
        for tok in line.split_whitespace() {
            coords.push(tok.parse::<f64>().map_err(|_| parse_err(ln, format!("bad coordinate `{tok}`")))?);
        }
        if coords.len() - before != n {
            return Err(parse_err(ln, format!("expected {n} coordinates")));
        }
    }
    let mut simplices = Vec::with_capacity(ns * (d + 1));
    let mut mult = Vec::with_capacity(ns);
    for _ in 0..ns {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "missing simplex line"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != d + 1 && toks.len() != d + 2 {
            return Err(parse_err(ln, format!("expected {} indices and an optional multiplicity", d + 1)));
        }
        for tok in &toks[..=d] {
            simplices.push(tok.parse::<usize>().map_err(|_| parse_err(ln, format!("bad index `{tok}`")))?);
        }
        mult.push(match toks.get(d + 1) {
            Some(tok) => tok.parse::<f64>().map_err(|_| parse_err(ln, format!("bad multiplicity `{tok}`")))?,
            None => 1.0,
        });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content"));
    }
    SimplicialManifold::new(n, d, coords, simplices, Some(mult))
}

/// Serializes with shortest round-trip float formatting; multiplicity is
/// written only when it differs from one.
pub fn write_smf(m: &SimplicialManifold) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "smf {} {}", m.intrinsic_dim(), m.ambient_dim());
    let _ = writeln!(out, "{} {}", m.num_vertices(), m.num_simplices());
    for p in m.vertices() {
        let line: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    for (s, simplex) in m.simplices().enumerate() {
        let mut line: Vec<String> = simplex.iter().map(|v| v.to_string()).collect();
        let mult = m.multiplicity(s);
        if mult != 1.0 {
            line.push(mult.to_string());
        }
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn load_smf(path: &Path) -> Result<SimplicialManifold> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_smf(&text)
}
