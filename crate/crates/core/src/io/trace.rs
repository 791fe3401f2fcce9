//! CSV bound traces: `pass,direction,method,bound,meff,ms`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::trws::{BoundTrace, Direction, TraceRow};

pub const HEADER: [&str; 6] = ["pass", "direction", "method", "bound", "meff", "ms"];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_trace<W: Write>(out: W, trace: &BoundTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for r in &trace.rows {
        w.write_record([
            r.pass.to_string(),
            r.direction.to_string(),
            r.method.clone(),
            format!("{:.16e}", r.bound),
            r.meff.to_string(),
            format!("{:.3}", r.ms),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<BoundTrace> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(HEADER) {
        return Err(Error::Parse { line: 1, message: format!("unexpected trace header {headers:?}") });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let bad = |what: &str| Error::Parse { line, message: format!("bad {what}") };
        let direction = match &rec[1] {
            "forward" => Direction::Forward,
            "backward" => Direction::Backward,
            _ => return Err(bad("direction")),
        };
        rows.push(TraceRow {
            pass: rec[0].parse().map_err(|_| bad("pass"))?,
            direction,
            method: rec[2].to_string(),
            bound: rec[3].parse().map_err(|_| bad("bound"))?,
            meff: rec[4].parse().map_err(|_| bad("meff"))?,
            ms: rec[5].parse().map_err(|_| bad("ms"))?,
        });
    }
    Ok(BoundTrace { rows })
}
