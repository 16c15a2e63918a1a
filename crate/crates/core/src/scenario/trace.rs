//! Per-instant trace rows and their CSV form.
//!
//! Columns: `t`, then `h_i,y_i,r_i,e_i,ind_i` for each loop, then
//! `alpha,E`, `J_1..J_n`, `J_SUM`, `misses`. Floats are written in their
//! shortest round-trip form, so parsing an emitted trace reproduces it exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSample {
    pub h: f64,
    pub y: f64,
    pub r: f64,
    /// Signed error `r − y`.
    pub e: f64,
    pub ind: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub loops: Vec<LoopSample>,
    pub alpha: f64,
    pub energy: f64,
    pub costs: Vec<f64>,
    pub j_sum: f64,
    pub misses: usize,
}

const LOOP_FIELDS: [&str; 5] = ["h", "y", "r", "e", "ind"];

pub fn header(n_loops: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for i in 1..=n_loops {
        cols.extend(LOOP_FIELDS.iter().map(|f| format!("{f}_{i}")));
    }
    cols.push("alpha".into());
    cols.push("E".into());
    cols.extend((1..=n_loops).map(|i| format!("J_{i}")));
    cols.push("J_SUM".into());
    cols.push("misses".into());
    cols
}

pub fn write_trace<W: Write>(out: W, trace: &[TraceRecord]) -> Result<()> {
    let n = trace.first().map_or(0, |r| r.loops.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(n))?;
    for rec in trace {
        if rec.loops.len() != n || rec.costs.len() != n {
            return Err(Error::MalformedTrace(format!(
                "row at t={} has {} loops, expected {n}",
                rec.t,
                rec.loops.len()
            )));
        }
        let mut row = Vec::with_capacity(5 * n + 2 * n + 5);
        row.push(rec.t.to_string());
        for s in &rec.loops {
            row.extend([s.h, s.y, s.r, s.e, s.ind].map(|v| v.to_string()));
        }
        row.push(rec.alpha.to_string());
        row.push(rec.energy.to_string());
        row.extend(rec.costs.iter().map(f64::to_string));
        row.push(rec.j_sum.to_string());
        row.push(rec.misses.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn parse_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let cols = rd.headers()?.len();
    if cols < 5 || (cols - 5) % 6 != 0 {
        return Err(Error::MalformedTrace(format!(
            "unexpected column count {cols}"
        )));
    }
    let n = (cols - 5) / 6;
    let expected = header(n);
    if rd.headers()?.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::MalformedTrace("unexpected header".into()));
    }
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec[k].parse().map_err(|_| {
                Error::MalformedTrace(format!(
                    "row {}: bad number `{}` in `{}`",
                    line + 1,
                    &rec[k],
                    expected[k]
                ))
            })
        };
        let loops = (0..n)
            .map(|i| {
                let b = 1 + 5 * i;
                Ok(LoopSample {
                    h: num(b)?,
                    y: num(b + 1)?,
                    r: num(b + 2)?,
                    e: num(b + 3)?,
                    ind: num(b + 4)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let tail = 1 + 5 * n;
        let costs = (0..n)
            .map(|i| num(tail + 2 + i))
            .collect::<Result<Vec<_>>>()?;
        let misses = rec[cols - 1]
            .parse()
            .map_err(|_| Error::MalformedTrace(format!("row {}: bad miss count", line + 1)))?;
        out.push(TraceRecord {
            t: num(0)?,
            loops,
            alpha: num(tail)?,
            energy: num(tail + 1)?,
            costs,
            j_sum: num(cols - 2)?,
            misses,
        });
    }
    Ok(out)
}

pub fn emit_trace(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(std::io::BufWriter::new(file), trace)
}

pub fn load_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_trace(std::io::BufReader::new(file))
}
