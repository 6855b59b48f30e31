//! Run records: a `# key = value` header followed by a CSV metric table.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 9] = [
    "k",
    "obj_proxy",
    "cons_violation",
    "lmo_calls",
    "lmo_skipped",
    "sfo_calls",
    "szo_calls",
    "tracking_err",
    "wall_ms",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub k: usize,
    pub obj_proxy: f64,
    pub cons_violation: f64,
    pub lmo_calls: u64,
    pub lmo_skipped: u64,
    pub sfo_calls: u64,
    pub szo_calls: u64,
    pub tracking_err: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    /// Ordered header entries.
    pub header: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

impl RunRecord {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Sets `key`, replacing an existing entry in place. Line breaks in the
    /// value are flattened to spaces.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        match self.header.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.header.push((key.to_string(), value)),
        }
    }

    pub fn last(&self) -> Option<&Row> {
        self.rows.last()
    }

    /// Serialized metric table with `wall_ms` blanked, for determinism checks.
    pub fn body_without_wall(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let mut r = r.clone();
            r.wall_ms = 0.0;
            write_row(&mut out, &r);
        }
        out
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            write_row(&mut out, r);
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<RunRecord> {
        let mut header = Vec::new();
        let mut lines = text.lines().enumerate();
        let mut saw_columns = false;
        for (i, line) in lines.by_ref() {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest.split_once(" = ").ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: "header line must look like '# key = value'".into(),
                })?;
                let k = k.strip_prefix(' ').unwrap_or(k);
                if k.is_empty() || k.contains(char::is_whitespace) {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("bad header key '{k}'"),
                    });
                }
                // a trailing '\r' would be eaten by the line splitter on reread
                header.push((k.to_string(), v.trim_end_matches('\r').to_string()));
                continue;
            }
            if line.split(',').ne(COLUMNS.iter().copied()) {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected column row '{}'", COLUMNS.join(",")),
                });
            }
            saw_columns = true;
            break;
        }
        if !saw_columns {
            return Err(Error::Parse {
                line: text.lines().count() + 1,
                msg: "missing column row".into(),
            });
        }
        let body: String = lines.map(|(_, l)| format!("{l}\n")).collect();
        let first_body_line = header.len() + 2;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(false)
            .from_reader(body.as_bytes());
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = first_body_line + i;
            let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            if rec.len() != COLUMNS.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, got {}", COLUMNS.len(), rec.len()),
                });
            }
            let f = |j: usize| -> Result<f64> {
                rec[j].parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    msg: format!("{}: {e}", COLUMNS[j]),
                })
            };
            let u = |j: usize| -> Result<u64> {
                rec[j].parse::<u64>().map_err(|e| Error::Parse {
                    line,
                    msg: format!("{}: {e}", COLUMNS[j]),
                })
            };
            let row = Row {
                k: u(0)? as usize,
                obj_proxy: f(1)?,
                cons_violation: f(2)?,
                lmo_calls: u(3)?,
                lmo_skipped: u(4)?,
                sfo_calls: u(5)?,
                szo_calls: u(6)?,
                tracking_err: if rec[7].is_empty() { None } else { Some(f(7)?) },
                wall_ms: f(8)?,
            };
            if let Some(prev) = rows.last() {
                let prev: &Row = prev;
                if row.k <= prev.k {
                    return Err(Error::Parse {
                        line,
                        msg: format!("k must increase, got {} after {}", row.k, prev.k),
                    });
                }
            }
            rows.push(row);
        }
        Ok(RunRecord { header, rows })
    }

    /// Writes atomically: the file appears complete or not at all.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }

    pub fn read_from(path: &Path) -> Result<RunRecord> {
        RunRecord::parse_csv(&std::fs::read_to_string(path)?)
    }
}

fn write_row(out: &mut String, r: &Row) {
    let te = r.tracking_err.map(|v| format!("{v:e}")).unwrap_or_default();
    let _ = writeln!(
        out,
        "{},{:e},{:e},{},{},{},{},{},{:e}",
        r.k, r.obj_proxy, r.cons_violation, r.lmo_calls, r.lmo_skipped, r.sfo_calls, r.szo_calls, te, r.wall_ms
    );
}

/// Temp-file-and-rename write into `path`'s directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}
