//! CSV trace files: `iter,x_0..x_{d-1},f,best,simple_regret,cum_regret,elapsed_s`.
//!
//! Floats are written in shortest round-trip form, so a trace read back is
//! bit-identical to the one written. Missing regret or timing values are
//! empty fields.

use std::io::{Read, Write};
use std::path::Path;

use pseudobo::prelude::*;

use crate::error::{CliError, CliResult};

pub fn header(dim: usize) -> Vec<String> {
    let mut h = vec!["iter".to_string()];
    h.extend((0..dim).map(|i| format!("x_{i}")));
    h.extend(["f", "best", "simple_regret", "cum_regret", "elapsed_s"].map(String::from));
    h
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_trace<W: Write>(out: W, trace: &RunTrace) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| CliError::Trace(e.to_string());
    w.write_record(header(trace.dim)).map_err(err)?;
    for r in &trace.records {
        let mut row = vec![r.iter.to_string()];
        row.extend(r.point.iter().map(|&x| num(x)));
        row.extend([num(r.value), num(r.best_so_far), opt(r.simple_regret), opt(r.cumulative_regret), opt(r.elapsed_s)]);
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Trace(e.to_string()))
}

pub fn write_trace_file(path: &Path, trace: &RunTrace) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_trace(std::io::BufWriter::new(file), trace)
}

/// Reads a trace; the direction is not stored in the file.
pub fn read_trace<R: Read>(input: R, direction: Direction) -> CliResult<RunTrace> {
    let mut rd = csv::Reader::from_reader(input);
    let head = rd.headers().map_err(|e| CliError::Trace(e.to_string()))?.clone();
    let dim = head
        .len()
        .checked_sub(6)
        .ok_or_else(|| CliError::Trace(format!("header has only {} columns", head.len())))?;
    let expected = header(dim);
    if head.iter().ne(expected.iter().map(String::as_str)) {
        return Err(CliError::Trace(format!("unexpected header {:?}", head.iter().collect::<Vec<_>>())));
    }
    let mut trace = RunTrace::new(dim, direction);
    for (line, row) in rd.records().enumerate() {
        let row = row.map_err(|e| CliError::Trace(e.to_string()))?;
        let bad = |what: &str| CliError::Trace(format!("row {}: bad {what}", line + 1));
        let float = |i: usize| -> CliResult<f64> { row[i].parse().map_err(|_| bad(&expected[i])) };
        let optional = |i: usize| -> CliResult<Option<f64>> {
            if row[i].is_empty() {
                Ok(None)
            } else {
                float(i).map(Some)
            }
        };
        let iter: usize = row[0].parse().map_err(|_| bad("iter"))?;
        if iter != trace.len() + 1 {
            return Err(bad("iter"));
        }
        trace.records.push(TraceRecord {
            iter,
            point: (1..=dim).map(float).collect::<CliResult<_>>()?,
            value: float(dim + 1)?,
            best_so_far: float(dim + 2)?,
            simple_regret: optional(dim + 3)?,
            cumulative_regret: optional(dim + 4)?,
            elapsed_s: optional(dim + 5)?,
        });
    }
    Ok(trace)
}

pub fn read_trace_file(path: &Path, direction: Direction) -> CliResult<RunTrace> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_trace(std::io::BufReader::new(file), direction)
}
