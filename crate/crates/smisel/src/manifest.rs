//! JSON-lines selection manifests.
//!
//! Each non-empty line is an object:
//!
//! ```json
//! {"sample_id": "v001", "frames_path": "v001.frames.emb1", "queries_path": "v001.queries.emb1",
//!  "budget": 8, "objective": "flmi", "params": {"eta": 1.0}}
//! ```
//!
//! `params` is optional and accepts only `eta`, `lambda` and `seed`.

use std::io::{self, Read};
use std::path::PathBuf;

use serde_json::{Map, Value};

use crate::pipeline::Strategy;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("failed to read manifest: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: not valid UTF-8")]
    Utf8 { line: usize },
    #[error("line {line}: malformed JSON: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: expected a JSON object")]
    NotAnObject { line: usize },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: field `{field}` has the wrong type")]
    WrongType { line: usize, field: &'static str },
    #[error("line {line}: budget must be an integer >= 1")]
    InvalidBudget { line: usize },
    #[error("line {line}: unknown objective `{name}`")]
    UnknownObjective { line: usize, name: String },
    #[error("line {line}: field `{field}` must not be empty")]
    EmptyPath { line: usize, field: &'static str },
    #[error("line {line}: sample_id `{id}` is not usable as a file name")]
    InvalidSampleId { line: usize, id: String },
    #[error("line {line}: unknown parameter `{name}`")]
    UnknownParam { line: usize, name: String },
    #[error("line {line}: parameter `{name}` is invalid")]
    InvalidParam { line: usize, name: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntryParams {
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionManifestEntry {
    /// 1-based line in the manifest.
    pub line: usize,
    pub sample_id: String,
    pub frames_path: PathBuf,
    pub queries_path: PathBuf,
    pub budget: usize,
    pub objective: Strategy,
    pub params: EntryParams,
}

/// Parses every entry, stopping at the first invalid line.
pub fn parse_manifest<R: Read>(mut source: R) -> Result<Vec<SelectionManifestEntry>, ManifestError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut entries = Vec::new();
    for (i, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = i + 1;
        let text = std::str::from_utf8(raw).map_err(|_| ManifestError::Utf8 { line })?;
        if text.trim().is_empty() {
            continue;
        }
        entries.push(parse_line(text, line)?);
    }
    Ok(entries)
}

fn parse_line(text: &str, line: usize) -> Result<SelectionManifestEntry, ManifestError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ManifestError::Json {
        line,
        message: e.to_string(),
    })?;
    let Value::Object(obj) = value else {
        return Err(ManifestError::NotAnObject { line });
    };
    let sample_id = string_field(&obj, "sample_id", line)?;
    if !is_safe_file_stem(&sample_id) {
        return Err(ManifestError::InvalidSampleId { line, id: sample_id });
    }
    let frames_path = string_field(&obj, "frames_path", line)?;
    let queries_path = string_field(&obj, "queries_path", line)?;
    for (field, path) in [("frames_path", &frames_path), ("queries_path", &queries_path)] {
        if path.is_empty() {
            return Err(ManifestError::EmptyPath { line, field });
        }
    }
    let budget = match obj.get("budget") {
        None => return Err(ManifestError::MissingField { line, field: "budget" }),
        Some(Value::Number(n)) => match n.as_u64() {
            Some(b) if b >= 1 => usize::try_from(b).map_err(|_| ManifestError::InvalidBudget { line })?,
            _ => return Err(ManifestError::InvalidBudget { line }),
        },
        Some(_) => return Err(ManifestError::WrongType { line, field: "budget" }),
    };
    let name = string_field(&obj, "objective", line)?;
    let objective = Strategy::from_manifest_name(&name)
        .ok_or(ManifestError::UnknownObjective { line, name })?;
    let params = match obj.get("params") {
        None | Some(Value::Null) => EntryParams::default(),
        Some(Value::Object(p)) => parse_params(p, line)?,
        Some(_) => return Err(ManifestError::WrongType { line, field: "params" }),
    };
    Ok(SelectionManifestEntry {
        line,
        sample_id,
        frames_path: frames_path.into(),
        queries_path: queries_path.into(),
        budget,
        objective,
        params,
    })
}

fn string_field(obj: &Map<String, Value>, field: &'static str, line: usize) -> Result<String, ManifestError> {
    match obj.get(field) {
        None => Err(ManifestError::MissingField { line, field }),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(ManifestError::WrongType { line, field }),
    }
}

fn parse_params(p: &Map<String, Value>, line: usize) -> Result<EntryParams, ManifestError> {
    let mut params = EntryParams::default();
    for (key, value) in p {
        match key.as_str() {
            "eta" => params.eta = Some(nonnegative(value, "eta", line)?),
            "lambda" => params.lambda = Some(nonnegative(value, "lambda", line)?),
            "seed" => {
                params.seed = Some(value.as_u64().ok_or(ManifestError::InvalidParam { line, name: "seed" })?)
            }
            other => {
                return Err(ManifestError::UnknownParam {
                    line,
                    name: other.to_string(),
                })
            }
        }
    }
    Ok(params)
}

fn nonnegative(value: &Value, name: &'static str, line: usize) -> Result<f64, ManifestError> {
    match value.as_f64() {
        Some(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(ManifestError::InvalidParam { line, name }),
    }
}

pub(crate) fn is_safe_file_stem(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && !id.contains(['/', '\\', '\0'])
}
