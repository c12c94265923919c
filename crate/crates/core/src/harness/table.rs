//! CSV and aligned-text renderings of run records and aggregate rows.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::metrics::{AggregateRow, RunRecord, Stats};
use crate::error::{Error, Result};

pub const RUNS_SCHEMA: &str = "# vnsclust runs v1";
pub const AGGREGATE_SCHEMA: &str = "# vnsclust aggregate v1";

pub const RUN_COLUMNS: [&str; 7] = ["dataset", "k", "algorithm", "seed", "objective", "epsilon", "time_s"];

/// Aggregate columns; `best` lists the metric columns in which the row is best for its dataset.
pub const AGGREGATE_COLUMNS: [&str; 11] = [
    "dataset",
    "algorithm",
    "succ",
    "total",
    "eps_min",
    "eps_median",
    "eps_max",
    "t_min",
    "t_median",
    "t_max",
    "best",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Text,
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn metric_values(r: &AggregateRow) -> [f64; 6] {
    [r.eps.min, r.eps.median, r.eps.max, r.time.min, r.time.median, r.time.max]
}

/// For each row, the metric columns in which it is best within its dataset.
fn best_markers(rows: &[AggregateRow]) -> Vec<Vec<&'static str>> {
    rows.iter()
        .map(|row| {
            let peers: Vec<&AggregateRow> = rows.iter().filter(|r| r.dataset == row.dataset).collect();
            let mut marks = Vec::new();
            if peers.iter().all(|p| row.succ >= p.succ) {
                marks.push("succ");
            }
            let mine = metric_values(row);
            for (i, name) in AGGREGATE_COLUMNS[4..10].iter().enumerate() {
                if !mine[i].is_nan() && peers.iter().all(|p| !(metric_values(p)[i] < mine[i])) {
                    marks.push(*name);
                }
            }
            marks
        })
        .collect()
}

/// Renders aggregate rows as CSV (with a `best` marker column) or aligned text
/// (best values suffixed with `*`).
pub fn emit_table(rows: &[AggregateRow], format: TableFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::usage("no rows to render"));
    }
    let marks = best_markers(rows);
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(AGGREGATE_COLUMNS)?;
            for (r, m) in rows.iter().zip(&marks) {
                let mut fields = vec![r.dataset.clone(), r.algorithm.clone(), r.succ.to_string(), r.total.to_string()];
                fields.extend(metric_values(r).iter().map(|&v| num(v)));
                fields.push(m.join(";"));
                w.write_record(&fields)?;
            }
            let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                .expect("csv output is utf-8");
            Ok(format!("{AGGREGATE_SCHEMA}\n{body}"))
        }
        TableFormat::Text => {
            let header = [
                "dataset", "algorithm", "#Succ", "eps Min", "eps Median", "eps Max", "#Succ(t)", "t Min", "t Median",
                "t Max",
            ];
            let mut lines: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
            for (r, m) in rows.iter().zip(&marks) {
                let cell = |v: f64, col: &str| {
                    let s = if v.is_nan() { "-".to_string() } else { format!("{v:.2}") };
                    if m.contains(&col) {
                        s + "*"
                    } else {
                        s
                    }
                };
                let succ = format!("{}/{}", r.succ, r.total) + if m.contains(&"succ") { "*" } else { "" };
                lines.push(vec![
                    r.dataset.clone(),
                    r.algorithm.clone(),
                    succ,
                    cell(r.eps.min, "eps_min"),
                    cell(r.eps.median, "eps_median"),
                    cell(r.eps.max, "eps_max"),
                    format!("{}/{}", r.t_succ, r.total),
                    cell(r.time.min, "t_min"),
                    cell(r.time.median, "t_median"),
                    cell(r.time.max, "t_max"),
                ]);
            }
            let widths: Vec<usize> = (0..header.len())
                .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
                .collect();
            let mut out = String::new();
            for l in &lines {
                let cells: Vec<String> = l
                    .iter()
                    .enumerate()
                    .map(|(c, s)| if c < 2 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
                    .collect();
                out.push_str(cells.join("  ").trim_end());
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn parse_f64(field: &str) -> Result<f64> {
    if field.is_empty() {
        return Ok(f64::NAN);
    }
    field
        .parse()
        .map_err(|_| Error::usage(format!("bad number `{field}` in table")))
}

/// Parses CSV produced by [`emit_table`]. `t_succ` is not part of the CSV schema and
/// comes back as 0.
pub fn parse_aggregate_csv(text: &str) -> Result<Vec<AggregateRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != AGGREGATE_COLUMNS {
        return Err(Error::usage(format!("unexpected aggregate header {headers:?}")));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let f = |i: usize| parse_f64(&rec[i]);
        let count = |i: usize| {
            rec[i]
                .parse::<usize>()
                .map_err(|_| Error::usage(format!("bad count `{}`", &rec[i])))
        };
        rows.push(AggregateRow {
            dataset: rec[0].to_string(),
            algorithm: rec[1].to_string(),
            succ: count(2)?,
            total: count(3)?,
            eps: Stats {
                min: f(4)?,
                median: f(5)?,
                max: f(6)?,
            },
            t_succ: 0,
            time: Stats {
                min: f(7)?,
                median: f(8)?,
                max: f(9)?,
            },
        });
    }
    Ok(rows)
}

/// Append-only run-record CSV, flushed after every row.
pub struct RunWriter {
    inner: csv::Writer<File>,
}

impl RunWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let mut file = File::create(path)?;
        writeln!(file, "{RUNS_SCHEMA}")?;
        let mut inner = csv::Writer::from_writer(file);
        inner.write_record(RUN_COLUMNS)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &RunRecord) -> Result<()> {
        self.inner.write_record([
            r.dataset.clone(),
            r.k.to_string(),
            r.algorithm.clone(),
            r.seed.to_string(),
            opt(r.objective),
            opt(r.epsilon),
            num(r.time_s),
        ])?;
        self.inner.flush()?;
        Ok(())
    }
}

/// Reads a run-record CSV. Rows with an empty objective are failed runs.
pub fn read_runs_csv(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let optional = |i: usize| -> Result<Option<f64>> {
            let v = parse_f64(&rec[i])?;
            Ok((!v.is_nan()).then_some(v))
        };
        let objective = optional(4)?;
        out.push(RunRecord {
            dataset: rec[0].to_string(),
            k: rec[1].parse().map_err(|_| Error::usage(format!("bad k `{}`", &rec[1])))?,
            algorithm: rec[2].to_string(),
            seed: rec[3].parse().map_err(|_| Error::usage(format!("bad seed `{}`", &rec[3])))?,
            objective,
            epsilon: optional(5)?,
            time_s: parse_f64(&rec[6])?,
            error: objective.is_none().then(|| "failed".to_string()),
        });
    }
    Ok(out)
}
