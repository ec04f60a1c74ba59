//! CSV, JSON and gnuplot writers. Files land under a `.partial` name first
//! and are renamed only once complete.

use std::path::{Path, PathBuf};

use serde::Serialize;

use narrowing::trace::RunTrace;

use crate::error::{HarnessError, Result};

/// Fixed column order of per-batch trace CSVs.
pub const TRACE_HEADER: [&str; 11] = [
    "run_id",
    "algo",
    "batch",
    "r_m",
    "n_m",
    "cubes",
    "pulls",
    "cum_pulls",
    "y_max",
    "simple_regret",
    "cum_regret",
];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

/// Write `bytes` to `path` via `path.partial` and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = partial_path(path);
    std::fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

/// Write `bytes` to `path.partial` only; used when a run did not finish.
pub fn write_partial(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = partial_path(path);
    std::fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    Ok(tmp)
}

pub fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// One CSV for many runs, rows tagged with `run_id`.
pub fn trace_csv<'a>(runs: impl IntoIterator<Item = (&'a str, &'a RunTrace)>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(TRACE_HEADER)?;
    for (run_id, trace) in runs {
        for row in &trace.rows {
            w.write_record([
                run_id.to_string(),
                trace.algo.clone(),
                row.batch.to_string(),
                fmt_opt(row.r_m),
                row.n_m.to_string(),
                row.cubes.to_string(),
                row.pulls.to_string(),
                row.cum_pulls.to_string(),
                fmt_num(row.y_max),
                fmt_opt(row.simple_regret),
                fmt_opt(row.cum_regret),
            ])?;
        }
    }
    w.into_inner().map_err(|e| HarnessError::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })
}

/// Generic table writer for report CSVs.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Gnuplot script drawing `simple_regret` against `cum_pulls` for each run in
/// a trace CSV.
pub fn trace_plot_script(csv_name: &str, run_ids: &[String], title: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key outside right\n");
    s.push_str("set logscale xy 2\n");
    s.push_str("set xlabel 'pulls'\n");
    s.push_str("set ylabel 'simple regret'\n");
    s.push_str(&format!("set title '{title}'\n"));
    let plots: Vec<String> = run_ids
        .iter()
        .map(|id| {
            format!(
                "'{csv_name}' using ((strcol(1) eq '{id}') ? $8 : 1/0):10 with linespoints title '{id}'"
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

/// Gnuplot script for a log-log rate sweep CSV with columns `budget,median,...`.
pub fn sweep_plot_script(csv_name: &str, title: &str, slope: f64, intercept: f64) -> String {
    format!(
        "set datafile separator ','\n\
         set logscale xy 2\n\
         set xlabel 'T'\n\
         set ylabel 'median gap'\n\
         set title '{title}'\n\
         fit_line(x) = 2**({intercept} + {slope} * log(x) / log(2))\n\
         plot '{csv_name}' using 1:2 skip 1 with points pt 7 title 'median', \\\n     \
         fit_line(x) title 'fit slope {slope:.3}'\n"
    )
}
