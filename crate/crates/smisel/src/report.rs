//! JSON report types. The published schemas live in `schema/`.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parameters echoed back for the strategy that used them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportParams {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

/// Wall-clock timings in milliseconds; `null` when omitted for reproducible output.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub kernel_ms: Option<f64>,
    pub select_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub sample_id: String,
    pub objective: String,
    pub params: ReportParams,
    pub transform: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mode: Option<String>,
    pub budget: usize,
    pub n_candidates: usize,
    pub n_queries: usize,
    /// Indices in selection order.
    pub selected: Vec<usize>,
    pub selected_sorted: Vec<usize>,
    pub gains: Vec<f64>,
    /// `null` for the uniform and random baselines.
    pub objective_value: Option<f64>,
    /// `Σ_{i ∈ selected} max_q s_iq`
    pub query_relevance: f64,
    pub timings: Timings,
    pub evaluations: usize,
    pub engine_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOverlap {
    /// Positions in `strategies`.
    pub first: usize,
    pub second: usize,
    pub overlap: usize,
    /// `query_relevance[first] − query_relevance[second]`
    pub relevance_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceRank {
    pub position: usize,
    pub strategy: String,
    pub query_relevance: f64,
    /// 1 = highest relevance; equal relevance shares a rank.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub sample_id: String,
    pub budget: usize,
    pub n_candidates: usize,
    pub n_queries: usize,
    pub transform: String,
    /// Single shared kernel build for all strategies.
    pub kernel_ms: Option<f64>,
    pub strategies: Vec<SelectionReport>,
    pub overlaps: Vec<PairOverlap>,
    pub relevance_ranking: Vec<RelevanceRank>,
    pub engine_version: String,
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types always serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> io::Result<()> {
    std::fs::write(path, to_json(value))
}
