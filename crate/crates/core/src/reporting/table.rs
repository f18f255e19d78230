use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{Measurement, ShiftSeries};
use crate::integrators::{Operation, Status};
use crate::quadrature::fmt_f64;

use super::{ArtifactManifest, ManifestEntry};

pub const CSV_HEADER: [&str; 10] = [
    "testcase",
    "integrator",
    "operation",
    "divisions",
    "value",
    "reference",
    "rel_error",
    "n_points",
    "runtime_s",
    "status",
];

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// The measurements CSV as text: header always present, 17 significant
/// digits, LF line endings, empty fields for absent values.
pub fn measurements_csv_string(measurements: &[Measurement]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for m in measurements {
        w.write_record([
            m.testcase.clone(),
            m.integrator.clone(),
            m.operation.name().to_string(),
            m.divisions.to_string(),
            opt(m.value),
            opt(m.reference),
            opt(m.rel_error),
            m.n_points.to_string(),
            fmt_f64(m.runtime_s),
            m.status.label().to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes the CSV and returns its manifest entry (path relative to `root`).
pub fn write_measurements_csv(measurements: &[Measurement], path: &Path, root: &Path, command: &str) -> Result<ManifestEntry> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, measurements_csv_string(measurements)?).map_err(|e| Error::io(path, e))?;
    let mut m = ArtifactManifest::new(root);
    m.record(path, command)?;
    Ok(m.entries.remove(0))
}

/// One row per (integrator, step) of a shift study:
/// `step,offset_x,offset_y[,offset_z],integrator,value,reference,rel_error,n_points,runtime_s,status`.
pub fn shift_csv_string(series: &[ShiftSeries]) -> Result<String> {
    let dim = series.first().and_then(|s| s.offsets.first()).map_or(2, Vec::len);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["step".to_string()];
    header.extend(["x", "y", "z"][..dim].iter().map(|a| format!("offset_{a}")));
    header.extend(CSV_HEADER[4..].iter().map(|h| h.to_string()));
    header.insert(1 + dim, "integrator".into());
    w.write_record(&header)?;
    for s in series {
        for (k, (off, m)) in s.offsets.iter().zip(&s.measurements).enumerate() {
            let mut rec = vec![k.to_string()];
            rec.extend(off.iter().map(|&v| fmt_f64(v)));
            rec.push(s.integrator.clone());
            rec.extend([
                opt(m.value),
                opt(m.reference),
                opt(m.rel_error),
                m.n_points.to_string(),
                fmt_f64(m.runtime_s),
                m.status.label().to_string(),
            ]);
            w.write_record(&rec)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn parse_opt(s: &str, line: usize, path: &Path) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| parse_err(path, line, format!("bad number '{s}'")))
}

fn parse_err(path: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column: 0,
        message,
    }
}

/// Parses a measurements CSV. Failure messages are not stored in the CSV, so
/// failed rows come back as `Failed("")`.
pub fn read_measurements_csv(path: &Path) -> Result<Vec<Measurement>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::Csv(e),
        })?;
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(parse_err(path, 1, format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != CSV_HEADER.len() {
            return Err(parse_err(path, line, format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len())));
        }
        let operation: Operation = rec[2].parse().map_err(|e: Error| parse_err(path, line, e.to_string()))?;
        let status = match &rec[9] {
            "ok" => Status::Ok,
            "unsupported" => Status::Unsupported,
            "failed" => Status::Failed(String::new()),
            s => return Err(parse_err(path, line, format!("unknown status '{s}'"))),
        };
        let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err(path, line, format!("bad integer '{s}'")));
        out.push(Measurement {
            testcase: rec[0].to_string(),
            integrator: rec[1].to_string(),
            operation,
            divisions: int(&rec[3])?,
            value: parse_opt(&rec[4], line, path)?,
            reference: parse_opt(&rec[5], line, path)?,
            rel_error: parse_opt(&rec[6], line, path)?,
            n_points: int(&rec[7])?,
            runtime_s: parse_opt(&rec[8], line, path)?.unwrap_or(0.0),
            status,
        });
    }
    Ok(out)
}
