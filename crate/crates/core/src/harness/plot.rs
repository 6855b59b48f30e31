//! Gnuplot scripts for log-log objective and violation panels.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::record::{write_atomic, RunRecord};

const COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

/// File name used for a record inside an output directory.
pub fn record_file_name(record: &RunRecord) -> String {
    let algo = record.get("algo").unwrap_or("run");
    match record.get("seed") {
        Some(seed) => format!("{algo}-s{seed}.csv"),
        None => format!("{algo}.csv"),
    }
}

/// Writes every record as CSV into `out_dir` plus `plot.gp`, which draws
/// two log-log panels (objective proxy and constraint violation). Records of
/// the same algorithm share a line style. Returns the script path.
pub fn emit_plot_script(records: &[RunRecord], out_dir: &Path) -> Result<PathBuf> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to plot".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let mut name = record_file_name(rec);
        if files.iter().any(|(n, _): &(String, usize)| *n == name) {
            name = format!("{}-{i}.csv", name.trim_end_matches(".csv"));
        }
        write_atomic(&out_dir.join(&name), rec.to_csv_string().as_bytes())?;
        files.push((name, i));
    }
    let script = plot_script(records, &files.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>());
    let path = out_dir.join("plot.gp");
    write_atomic(&path, script.as_bytes())?;
    Ok(path)
}

/// Script text for `records` stored under `files` (same order).
pub fn plot_script(records: &[RunRecord], files: &[&str]) -> String {
    let mut algos: Vec<&str> = Vec::new();
    for r in records {
        let a = r.get("algo").unwrap_or("run");
        if !algos.contains(&a) {
            algos.push(a);
        }
    }
    let problem = records[0].get("problem").unwrap_or("");
    let mut s = String::new();
    s.push_str("# gnuplot plot.gp  ->  plot.png\n");
    s.push_str("set terminal pngcairo size 1200,480 noenhanced\n");
    s.push_str("set output 'plot.png'\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale xy\n");
    s.push_str("set format y '%.0e'\n");
    s.push_str("set xlabel 'k'\n");
    s.push_str("set key top right\n");
    for (i, a) in algos.iter().enumerate() {
        let _ = writeln!(
            s,
            "set style line {} lc rgb '{}' lw 2 dt {}  # {a}",
            i + 1,
            COLORS[i % COLORS.len()],
            i / COLORS.len() + 1
        );
    }
    let _ = writeln!(s, "set multiplot layout 1,2 title '{problem}'");
    for (col, title) in [(2, "obj_proxy"), (3, "cons_violation")] {
        let _ = writeln!(s, "set title '{title}'");
        let mut first_of = vec![true; algos.len()];
        let parts: Vec<String> = records
            .iter()
            .zip(files)
            .map(|(r, f)| {
                let a = r.get("algo").unwrap_or("run");
                let li = algos.iter().position(|x| *x == a).unwrap_or(0);
                let label = if std::mem::take(&mut first_of[li]) {
                    format!("title '{a}'")
                } else {
                    "notitle".to_string()
                };
                // header comments plus the column-name line
                let skip = r.header.len() + 1;
                format!("'{f}' skip {skip} using 1:{col} with lines ls {} {label}", li + 1)
            })
            .collect();
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    }
    s.push_str("unset multiplot\n");
    s
}
