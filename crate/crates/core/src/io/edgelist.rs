//! Whitespace-separated edge lists.

use crate::error::{Error, Result};
use crate::problems::Graph;

/// Largest vertex index accepted.
pub const MAX_VERTICES: usize = 1 << 20;

/// Parses one edge per line: `u v [weight]`. Lines starting with `%` or `#`
/// are comments. Indices are taken as 0-based if any index is 0, otherwise as
/// 1-based. Weights are ignored; self-loops and repeated edges are dropped.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(perr(format!("expected 'u v [weight]', got {} fields", fields.len())));
        }
        let idx = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| perr(format!("bad vertex index '{s}'")))?;
            if v > MAX_VERTICES {
                return Err(perr(format!("vertex index {v} exceeds {MAX_VERTICES}")));
            }
            Ok(v)
        };
        let (u, v) = (idx(fields[0])?, idx(fields[1])?);
        if let Some(w) = fields.get(2) {
            w.parse::<f64>().map_err(|_| perr(format!("bad weight '{w}'")))?;
        }
        raw.push((u, v));
    }
    if raw.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            msg: "no edges".into(),
        });
    }
    let zero_based = raw.iter().any(|&(u, v)| u == 0 || v == 0);
    let shift = usize::from(!zero_based);
    let n = raw.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0) + 1 - shift;
    Graph::new(n, raw.into_iter().map(|(u, v)| (u - shift, v - shift)))
}

pub fn read_edge_list(path: &std::path::Path) -> Result<Graph> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_based_with_comments() {
        let g = parse_edge_list("% header\n# another\n1 2\n2 3 0.5\n3 1\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn zero_based_detected() {
        let g = parse_edge_list("0 1\n1 2\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn loops_and_duplicates() {
        let g = parse_edge_list("1 1\n1 2\n2 1\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_edge_list("1 2\nx 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_edge_list("% nothing\n").is_err());
        assert!(parse_edge_list("1 2 w\n").is_err());
        assert!(parse_edge_list("1 99999999999\n").is_err());
    }
}
