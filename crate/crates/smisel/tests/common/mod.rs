#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use smisel::emb1::write_emb1_file;
use smisel_core::{EmbeddingKind, EmbeddingMatrix};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn smisel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smisel")).args(args).output().expect("spawn smisel")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn load_schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Validates `instance` against `schema/<name>`; returns the error messages.
pub fn schema_errors(name: &str, instance: &Value) -> Vec<String> {
    let selection = load_schema("selection_report.v1.json");
    let id = selection["$id"].as_str().unwrap().to_string();
    let validator = jsonschema::options()
        .with_resource(id, jsonschema::Resource::from_contents(selection).unwrap())
        .build(&load_schema(name))
        .unwrap();
    validator.iter_errors(instance).map(|e| e.to_string()).collect()
}

/// Eight orthonormal frames in 8 dimensions and one query equal to frame 3.
pub fn write_orthogonal(dir: &Path) -> (PathBuf, PathBuf) {
    let mut frames = vec![0.0f32; 64];
    for i in 0..8 {
        frames[i * 8 + i] = 1.0;
    }
    let mut query = vec![0.0f32; 8];
    query[3] = 1.0;
    let frames = EmbeddingMatrix::new(EmbeddingKind::Frames, 8, 8, frames).unwrap();
    let queries = EmbeddingMatrix::new(EmbeddingKind::Queries, 1, 8, query).unwrap();
    let (fp, qp) = (dir.join("ortho.frames.emb1"), dir.join("ortho.queries.emb1"));
    write_emb1_file(&frames, &fp).unwrap();
    write_emb1_file(&queries, &qp).unwrap();
    (fp, qp)
}
