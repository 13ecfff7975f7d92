//! Plain-text network serialization.
//!
//! Format: header `fdes v1 N L delta`, then `L` blocks of `N` rows of `N`
//! entries, whitespace-separated, written with 17 significant digits so a
//! round trip reproduces every f64 bit for bit.

use crate::error::{Error, Result};
use crate::fdes::{EventMatrix, FdesNetwork};
use std::fmt::Write as _;
use std::path::Path;

pub fn network_to_string(net: &FdesNetwork) -> String {
    let n = net.dim();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "fdes v1 {} {} {:.16e}",
        n,
        net.depth(),
        net.sharpness()
    );
    for layer in net.layers() {
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:.16e}", layer.get(i, j))).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

fn parse_err(origin: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line,
        message: message.into(),
    }
}

/// Parse a network from `lines`, returning it along with the number of
/// lines consumed (header + `L*N` rows). Callers embedding the format in a
/// larger file (the adjuster does) use the count to continue from the tail.
pub fn parse_network_partial(
    lines: &[&str],
    origin: &str,
    line_offset: u64,
) -> Result<(FdesNetwork, usize)> {
    let at = |idx: usize| line_offset + idx as u64 + 1;
    let header = lines
        .first()
        .ok_or_else(|| parse_err(origin, at(0), "missing header"))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 5 || tok[0] != "fdes" || tok[1] != "v1" {
        return Err(parse_err(
            origin,
            at(0),
            format!("bad header, expected `fdes v1 N L delta`, got `{header}`"),
        ));
    }
    let n: usize = tok[2]
        .parse()
        .map_err(|_| parse_err(origin, at(0), format!("bad dimension `{}`", tok[2])))?;
    let depth: usize = tok[3]
        .parse()
        .map_err(|_| parse_err(origin, at(0), format!("bad depth `{}`", tok[3])))?;
    let sharpness: f64 = tok[4]
        .parse()
        .map_err(|_| parse_err(origin, at(0), format!("bad sharpness `{}`", tok[4])))?;
    if n == 0 || depth == 0 {
        return Err(parse_err(origin, at(0), "N and L must be at least 1"));
    }

    let needed = 1 + depth * n;
    if lines.len() < needed {
        return Err(parse_err(
            origin,
            at(lines.len().saturating_sub(1)),
            format!("expected {} entry rows, file ends early", depth * n),
        ));
    }
    let mut layers = Vec::with_capacity(depth);
    for k in 0..depth {
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            let idx = 1 + k * n + r;
            let row = lines[idx];
            let values: Vec<f64> = row
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| parse_err(origin, at(idx), format!("bad entry `{t}`")))
                })
                .collect::<Result<_>>()?;
            if values.len() != n {
                return Err(parse_err(
                    origin,
                    at(idx),
                    format!("expected {n} entries, got {}", values.len()),
                ));
            }
            entries.extend(values);
        }
        let layer = EventMatrix::new(n, entries)
            .map_err(|e| parse_err(origin, at(1 + k * n), e.to_string()))?;
        layers.push(layer);
    }
    let net = FdesNetwork::new(layers, sharpness)
        .map_err(|e| parse_err(origin, at(0), e.to_string()))?;
    Ok((net, needed))
}

/// Strict parse: the whole text must be one network (trailing blank lines
/// allowed).
pub fn parse_network(text: &str, origin: &str) -> Result<FdesNetwork> {
    let lines: Vec<&str> = text.lines().collect();
    let (net, consumed) = parse_network_partial(&lines, origin, 0)?;
    for (idx, rest) in lines[consumed..].iter().enumerate() {
        if !rest.trim().is_empty() {
            return Err(parse_err(
                origin,
                (consumed + idx + 1) as u64,
                "trailing content after network block",
            ));
        }
    }
    Ok(net)
}

pub fn save_network(net: &FdesNetwork, path: &Path) -> Result<()> {
    std::fs::write(path, network_to_string(net))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_network(path: &Path) -> Result<FdesNetwork> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_network(&text, &path.display().to_string())
}
