//! Point clouds as header-less CSV: one point per row.

use crate::error::{Error, Result};

pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points: Vec<Vec<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let perr = |msg: String| Error::Parse { line, msg };
        let row = rec
            .iter()
            .map(|f| {
                let v: f64 = f.parse().map_err(|_| perr(format!("bad number '{f}'")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(perr(format!("non-finite value '{f}'")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = points.first() {
            if row.len() != first.len() {
                return Err(perr(format!("expected {} columns, got {}", first.len(), row.len())));
            }
        }
        points.push(row);
    }
    if points.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no points".into(),
        });
    }
    Ok(points)
}

pub fn read_points(path: &std::path::Path) -> Result<Vec<Vec<f64>>> {
    parse_points(&std::fs::read_to_string(path)?)
}

pub fn write_points(points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
