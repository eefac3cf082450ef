//! Plain-text outputs: trace CSV, operator dumps and schedule dumps.
//!
//! Trace CSV schema (version 1):
//!
//! ```text
//! # pst-trace v1; sites=A,B,C; <description>
//! time_s,site_0,site_1,site_2
//! 1.00000000000e-3,9.99975326010e-1,2.46739506307e-5,0.00000000000e0
//! ```
//!
//! One row per sample, every value with 12 significant digits. The trace
//! never contains a t = 0 row; a zero-length run has the two header lines
//! only.

use std::io::{self, Write};

use pst_core::{OperatorMatrix, Schedule, SpinNetwork, TransferTrace};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_trace_csv<W: Write>(out: W, trace: &TransferTrace, net: &SpinNetwork) -> io::Result<()> {
    let mut out = out;
    writeln!(
        out,
        "# pst-trace v{TRACE_SCHEMA_VERSION}; sites={}; {}",
        net.labels().join(","),
        trace.description.replace('\n', " ")
    )?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::from("time_s")];
    header.extend((0..net.len()).map(|k| format!("site_{k}")));
    w.write_record(&header)?;
    for (t, row) in trace.times.iter().zip(&trace.site_probabilities) {
        let mut rec = Vec::with_capacity(row.len() + 1);
        rec.push(sci(*t));
        rec.extend(row.iter().map(|p| sci(*p)));
        w.write_record(&rec)?;
    }
    w.flush()
}

pub fn trace_csv_string(trace: &TransferTrace, net: &SpinNetwork) -> String {
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, trace, net).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Parsed trace file: sample times and one probability row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub version: u32,
    pub sites: usize,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceReadError {
    #[error("missing or malformed schema line")]
    Schema,
    #[error("unsupported trace schema version {0}")]
    Version(u32),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad header")]
    Header,
    #[error("row {0}: bad number")]
    Number(usize),
}

pub fn read_trace_csv(text: &str) -> Result<TraceTable, TraceReadError> {
    let first = text.lines().next().ok_or(TraceReadError::Schema)?;
    let version = first
        .strip_prefix("# pst-trace v")
        .and_then(|r| r.split(';').next())
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or(TraceReadError::Schema)?;
    if version != TRACE_SCHEMA_VERSION {
        return Err(TraceReadError::Version(version));
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.get(0) != Some("time_s")
        || header.iter().skip(1).enumerate().any(|(k, h)| h != format!("site_{k}"))
    {
        return Err(TraceReadError::Header);
    }
    let sites = header.len() - 1;
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| TraceReadError::Number(n + 1))?;
        times.push(vals[0]);
        rows.push(vals[1..].to_vec());
    }
    Ok(TraceTable {
        version,
        sites,
        times,
        rows,
    })
}

/// Text dump of an operator: a header line, then one `row col re im` line
/// per element with modulus above `tol`.
pub fn write_operator<W: Write>(mut out: W, name: &str, op: &OperatorMatrix, tol: f64) -> io::Result<()> {
    let basis = if op.basis().is_full() { "full" } else { "single-excitation" };
    writeln!(out, "# operator {name}; basis={basis}; dim={}; units=rad/s", op.dim())?;
    for (r, c, z) in op.nonzero(tol) {
        writeln!(out, "{r} {c} {} {}", sci(z.re), sci(z.im))?;
    }
    Ok(())
}

/// Structured TOML dump of a schedule.
pub fn schedule_toml(schedule: &Schedule) -> String {
    toml::to_string(schedule).expect("schedule serializes")
}

pub fn parse_schedule(text: &str) -> Result<Schedule, toml::de::Error> {
    toml::from_str(text)
}
