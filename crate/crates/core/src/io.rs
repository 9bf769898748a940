//! File formats: JSON-Lines datasets (one labelled behaviour per line), CSV
//! mirrors, versioned model files, and the CSV reports emitted by the
//! evaluation and round-protocol pipelines.
//!
//! Every randomized artifact records its seed; a labelled dataset line
//! without one is rejected at read time.

use crate::eval::{SlicePoint, VolumeStats};
use crate::geometry::{Behaviour, Space};
use crate::ml::TrainedModel;
use crate::sampling::{Label, LabelledPoint, Method, PointMeta};
use crate::seesaw::RoundRow;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: missing seed field (randomized outputs must record their seed)")]
    MissingSeed { line: usize },
    #[error("line {line}: label {value} is not 0 or 1")]
    BadLabel { line: usize, value: u8 },
    #[error("unsupported model format version {0} (expected {MODEL_FORMAT_VERSION})")]
    BadModelVersion(u32),
    #[error("behaviour on line {line}: {msg}")]
    BadBehaviour { line: usize, msg: String },
}

/// One dataset line. Field order is the wire format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRecord {
    pub space: Space,
    pub x: Vec<f64>,
    pub label: u8,
    pub method: Method,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub level: String,
    pub seed: u64,
}

impl From<&LabelledPoint> for PointRecord {
    fn from(p: &LabelledPoint) -> Self {
        PointRecord {
            space: p.b.space(),
            x: p.b.coords().to_vec(),
            label: p.label.as_u8(),
            method: p.meta.method,
            epsilon: p.meta.epsilon,
            sigma: p.meta.sigma,
            level: p.meta.oracle.clone(),
            seed: p.meta.seed,
        }
    }
}

impl PointRecord {
    pub fn into_point(self, line: usize) -> Result<LabelledPoint, IoError> {
        let label = Label::from_u8(self.label)
            .ok_or(IoError::BadLabel { line, value: self.label })?;
        if self.x.len() != self.space.dim() {
            return Err(IoError::BadBehaviour {
                line,
                msg: format!("{} coordinates for {:?}", self.x.len(), self.space),
            });
        }
        Ok(LabelledPoint {
            b: Behaviour::new_unchecked(self.space, self.x),
            label,
            meta: PointMeta {
                method: self.method,
                epsilon: self.epsilon,
                sigma: self.sigma,
                seed: self.seed,
                oracle: self.level,
            },
        })
    }
}

pub fn write_points_jsonl(path: &Path, points: &[LabelledPoint]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    for p in points {
        serde_json::to_writer(&mut w, &PointRecord::from(p))
            .map_err(|e| IoError::Parse { line: 0, msg: e.to_string() })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points_jsonl(path: &Path) -> Result<Vec<LabelledPoint>, IoError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        // surface a missing seed as its own error before full parsing
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| IoError::Parse { line: line_no, msg: e.to_string() })?;
        if value.get("seed").is_none() {
            return Err(IoError::MissingSeed { line: line_no });
        }
        let record: PointRecord = serde_json::from_value(value)
            .map_err(|e| IoError::Parse { line: line_no, msg: e.to_string() })?;
        out.push(record.into_point(line_no)?);
    }
    Ok(out)
}

/// Bare behaviour line accepted by the classify pipeline; label and
/// provenance fields are optional on input.
#[derive(Debug, Clone, Deserialize)]
pub struct InputRecord {
    pub space: Space,
    pub x: Vec<f64>,
    #[serde(default)]
    pub label: Option<u8>,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub fn read_behaviours_jsonl(path: &Path) -> Result<Vec<(Behaviour, Option<Label>)>, IoError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: InputRecord = serde_json::from_str(&line)
            .map_err(|e| IoError::Parse { line: line_no, msg: e.to_string() })?;
        if record.x.len() != record.space.dim() {
            return Err(IoError::BadBehaviour {
                line: line_no,
                msg: format!("{} coordinates for {:?}", record.x.len(), record.space),
            });
        }
        let label = match record.label {
            None => None,
            Some(v) => {
                Some(Label::from_u8(v).ok_or(IoError::BadLabel { line: line_no, value: v })?)
            }
        };
        out.push((Behaviour::new_unchecked(record.space, record.x), label));
    }
    Ok(out)
}

/// CSV mirror of the JSONL dataset columns, coordinates expanded.
pub fn write_points_csv(path: &Path, points: &[LabelledPoint]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    let dim = points.first().map_or(4, |p| p.b.coords().len());
    let xs: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    writeln!(w, "space,{},label,method,epsilon,sigma,level,seed", xs.join(","))?;
    for p in points {
        let coords: Vec<String> = p.b.coords().iter().map(|c| format!("{c}")).collect();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            match p.b.space() {
                Space::Corr4 => "corr4",
                Space::Full8 => "full8",
            },
            coords.join(","),
            p.label.as_u8(),
            p.meta.method,
            p.meta.epsilon.map_or(String::new(), |e| format!("{e}")),
            p.meta.sigma.map_or(String::new(), |s| format!("{s}")),
            p.meta.oracle,
            p.meta.seed,
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Versioned model file.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    model: TrainedModel,
}

pub fn write_model(path: &Path, model: &TrainedModel) -> Result<(), IoError> {
    let file = ModelFile { version: MODEL_FORMAT_VERSION, model: model.clone() };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &file)
        .map_err(|e| IoError::Parse { line: 0, msg: e.to_string() })?;
    w.flush()?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<TrainedModel, IoError> {
    let reader = BufReader::new(File::open(path)?);
    let file: ModelFile = serde_json::from_reader(reader)
        .map_err(|e| IoError::Parse { line: 1, msg: e.to_string() })?;
    if file.version != MODEL_FORMAT_VERSION {
        return Err(IoError::BadModelVersion(file.version));
    }
    Ok(file.model)
}

/// Slice grid as CSV: `u,v,label` with an empty label for points outside
/// the polytope (marked, excluded from classification).
pub fn write_slice_csv(path: &Path, grid: &[SlicePoint]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "u,v,label")?;
    for p in grid {
        writeln!(w, "{},{},{}", p.u, p.v, p.label.map_or(String::new(), |l| l.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_slice_json(path: &Path, grid: &[SlicePoint]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, grid)
        .map_err(|e| IoError::Parse { line: 0, msg: e.to_string() })?;
    w.flush()?;
    Ok(())
}

/// Volume rows as CSV: `level,ratio,stderr,tPerPoint`.
pub fn write_volume_csv(path: &Path, rows: &[(String, VolumeStats)]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "level,ratio,stderr,tPerPoint")?;
    for (level, stats) in rows {
        writeln!(w, "{},{},{},{}", level, stats.ratio, stats.stderr, stats.mean_time_per_point)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_volume_json(path: &Path, rows: &[(String, VolumeStats)]) -> Result<(), IoError> {
    #[derive(Serialize)]
    struct Row<'a> {
        level: &'a str,
        #[serde(flatten)]
        stats: &'a VolumeStats,
    }
    let rows: Vec<Row> =
        rows.iter().map(|(level, stats)| Row { level, stats }).collect();
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &rows)
        .map_err(|e| IoError::Parse { line: 0, msg: e.to_string() })?;
    w.flush()?;
    Ok(())
}

/// Round-protocol report as CSV: `round,d,seeds,classified,wall`.
pub fn write_rounds_csv(path: &Path, rows: &[RoundRow]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "round,d,seeds,classified,wall")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.round, r.d, r.seeds, r.classified, r.wall_secs)?;
    }
    w.flush()?;
    Ok(())
}
