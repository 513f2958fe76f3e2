use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::{format_number, read_text, IoError, IoResult};
use crate::dispersion::Orientation;

/// One measured ripple wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub angle_deg: f64,
    pub wavelength_nm: f64,
    pub mode: Orientation,
    pub source: String,
    /// Line in the input file, counting the header as line 1.
    pub line: u64,
}

impl ExperimentRecord {
    /// Only parallel-mode ripples are described by the model; the rotation
    /// to perpendicular ripples at grazing incidence is not.
    pub fn comparable(&self) -> bool {
        self.mode == Orientation::Parallel
    }
}

#[derive(Deserialize)]
struct RawRecord {
    angle_deg: f64,
    wavelength_nm: f64,
    mode: String,
    source: String,
}

const HEADER: [&str; 4] = ["angle_deg", "wavelength_nm", "mode", "source"];

fn parse_records<R: Read>(input: R, name: &str) -> IoResult<Vec<ExperimentRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(IoError::Records {
            path: name.into(),
            messages: vec![format!(
                "line 1: expected header `{}`, found `{}`",
                HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )],
        });
    }
    let mut records = Vec::new();
    let mut messages = Vec::new();
    for result in reader.records() {
        let record = match result {
            Ok(record) => record,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                messages.push(format!("line {line}: {e}"));
                continue;
            }
        };
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let raw: RawRecord = match record.deserialize(Some(&header)) {
            Ok(raw) => raw,
            Err(e) => {
                let reason = match e.kind() {
                    csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                    _ => e.to_string(),
                };
                messages.push(format!("line {line}: {reason}"));
                continue;
            }
        };
        let mut problems = Vec::new();
        if !(raw.wavelength_nm.is_finite() && raw.wavelength_nm > 0.0) {
            problems.push(format!("wavelength must be > 0, got {}", raw.wavelength_nm));
        }
        if !(raw.angle_deg.is_finite() && (0.0..=90.0).contains(&raw.angle_deg)) {
            problems.push(format!("angle {} outside [0, 90] degrees", raw.angle_deg));
        }
        let mode = raw.mode.parse::<Orientation>();
        if let Err(e) = &mode {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            records.push(ExperimentRecord {
                angle_deg: raw.angle_deg,
                wavelength_nm: raw.wavelength_nm,
                mode: mode.expect("checked"),
                source: raw.source,
                line,
            });
        } else {
            messages.push(format!("line {line}: {}", problems.join(", ")));
        }
    }
    if messages.is_empty() {
        Ok(records)
    } else {
        Err(IoError::Records {
            path: name.into(),
            messages,
        })
    }
}

/// Parse measurements from CSV text with header
/// `angle_deg,wavelength_nm,mode,source`.
pub fn ingest_experiment_str(text: &str) -> IoResult<Vec<ExperimentRecord>> {
    parse_records(text.as_bytes(), "<input>")
}

pub fn ingest_experiment(path: &Path) -> IoResult<Vec<ExperimentRecord>> {
    let text = read_text(path)?;
    parse_records(text.as_bytes(), &path.display().to_string())
}

/// `(theta_deg, lambda_full_nm)` pairs from a sweep table; stable rows are
/// skipped.
pub fn read_sweep_wavelengths(path: &Path) -> IoResult<Vec<(f64, f64)>> {
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IoError::Records {
                path: path.display().to_string(),
                messages: vec![format!("line 1: missing column `{name}`")],
            })
    };
    let (theta_at, lambda_at) = (column("theta_deg")?, column("lambda_full_nm")?);
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |what: &str| IoError::Records {
            path: path.display().to_string(),
            messages: vec![format!("line {line}: bad {what}")],
        };
        let theta: f64 = record
            .get(theta_at)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("theta_deg"))?;
        match record.get(lambda_at) {
            Some("") | None => continue,
            Some(s) => points.push((theta, s.parse().map_err(|_| bad("lambda_full_nm"))?)),
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(points)
}

/// Model-vs-data comparison for one record.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualRow {
    pub record: ExperimentRecord,
    /// Linearly interpolated model wavelength; `None` when the record is not
    /// comparable or lies outside the unstable part of the sweep.
    pub model_nm: Option<f64>,
}

impl ResidualRow {
    pub fn residual_nm(&self) -> Option<f64> {
        self.model_nm.map(|m| m - self.record.wavelength_nm)
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let i = points.partition_point(|p| p.0 < x);
    if let Some(p) = points.get(i).filter(|p| p.0 == x) {
        return Some(p.1);
    }
    if i == 0 || i == points.len() {
        return None;
    }
    let ((x0, y0), (x1, y1)) = (points[i - 1], points[i]);
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

pub fn residual_rows(
    records: &[ExperimentRecord],
    sweep: Option<&[(f64, f64)]>,
) -> Vec<ResidualRow> {
    records
        .iter()
        .map(|r| ResidualRow {
            record: r.clone(),
            model_nm: sweep
                .filter(|_| r.comparable())
                .and_then(|points| interpolate(points, r.angle_deg)),
        })
        .collect()
}

pub fn write_residuals<W: Write>(rows: &[ResidualRow], out: W) -> IoResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "angle_deg",
        "wavelength_nm",
        "mode",
        "source",
        "comparable",
        "lambda_model_nm",
        "residual_nm",
    ])?;
    for row in rows {
        let r = &row.record;
        w.write_record([
            format_number(r.angle_deg),
            format_number(r.wavelength_nm),
            r.mode.as_str().to_string(),
            r.source.clone(),
            r.comparable().to_string(),
            row.model_nm.map(format_number).unwrap_or_default(),
            row.residual_nm().map(format_number).unwrap_or_default(),
        ])?;
    }
    w.flush()
        .map_err(|e| IoError::file("<residual output>", e))?;
    Ok(())
}
