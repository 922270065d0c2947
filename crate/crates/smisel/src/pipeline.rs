//! End-to-end selection: load embeddings, build one kernel, run a strategy,
//! and produce reports.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use smisel_core::embedding::DEFAULT_ZERO_TOLERANCE;
use smisel_core::{
    build_kernel, greedy_select, random_select, synth, uniform_select, Budget, EmbeddingKind,
    EmbeddingMatrix, GreedyMode, KernelTransform, Objective, SimilarityKernel, SmiConfig,
};

use crate::emb1::{read_emb1_file, write_emb1_file};
use crate::manifest::{parse_manifest, SelectionManifestEntry};
use crate::report::{
    to_json, write_json, CompareReport, PairOverlap, RelevanceRank, ReportParams, SelectionReport,
    Timings, ENGINE_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Flmi,
    Gcmi,
    FacilityLocation,
    Uniform,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Flmi,
        Strategy::Gcmi,
        Strategy::FacilityLocation,
        Strategy::Uniform,
        Strategy::Random,
    ];

    /// Name used in manifests and reports.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Flmi => "flmi",
            Strategy::Gcmi => "gcmi",
            Strategy::FacilityLocation => "facility_location",
            Strategy::Uniform => "uniform",
            Strategy::Random => "random",
        }
    }

    pub fn from_manifest_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn objective(self) -> Option<Objective> {
        match self {
            Strategy::Flmi => Some(Objective::Flmi),
            Strategy::Gcmi => Some(Objective::Gcmi),
            Strategy::FacilityLocation => Some(Objective::FacilityLocation),
            Strategy::Uniform | Strategy::Random => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    /// Accepts both `facility-location` (CLI) and `facility_location` (manifest).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_manifest_name(&s.replace('-', "_")).ok_or_else(|| format!("unknown objective `{s}`"))
    }
}

/// Strategy parameters plus kernel and greedy settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    pub eta: f64,
    pub lambda: f64,
    pub seed: u64,
    pub transform: KernelTransform,
    pub mode: GreedyMode,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            eta: smisel_core::smi::DEFAULT_ETA,
            lambda: smisel_core::smi::DEFAULT_LAMBDA,
            seed: 0,
            transform: KernelTransform::ClampZero,
            mode: GreedyMode::Lazy,
        }
    }
}

impl SelectionParams {
    fn echo(&self, strategy: Strategy) -> ReportParams {
        match strategy {
            Strategy::Flmi => ReportParams { eta: Some(self.eta), ..Default::default() },
            Strategy::Gcmi => ReportParams { lambda: Some(self.lambda), ..Default::default() },
            Strategy::Random => ReportParams { seed: Some(self.seed), ..Default::default() },
            Strategy::FacilityLocation | Strategy::Uniform => ReportParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub selected: Vec<usize>,
    pub gains: Vec<f64>,
    pub objective_value: Option<f64>,
    pub evaluations: usize,
}

/// Runs one strategy against a prepared kernel.
pub fn run_strategy(
    kernel: &SimilarityKernel,
    strategy: Strategy,
    budget: Budget,
    params: &SelectionParams,
) -> smisel_core::Result<Selection> {
    match strategy.objective() {
        Some(objective) => {
            let config = SmiConfig::new(objective)
                .with_eta(params.eta)
                .with_lambda(params.lambda);
            let (state, trace) = greedy_select(kernel, &config, budget, params.mode)?;
            Ok(Selection {
                selected: state.chosen().to_vec(),
                gains: state.gains().to_vec(),
                objective_value: Some(state.objective_value()),
                evaluations: trace.evaluations,
            })
        }
        None => {
            let selected = match strategy {
                Strategy::Uniform => uniform_select(kernel.n(), budget)?,
                _ => random_select(kernel.n(), budget, params.seed)?,
            };
            Ok(Selection {
                selected,
                gains: Vec::new(),
                objective_value: None,
                evaluations: 0,
            })
        }
    }
}

/// `Σ_{i ∈ selected} max_q s_iq`, summed in selection order.
pub fn query_relevance(kernel: &SimilarityKernel, selected: &[usize]) -> f64 {
    selected.iter().map(|&i| kernel.max_query_similarity(i)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    ReadManifest,
    ReadFrames,
    ReadQueries,
    Normalize,
    Kernel,
    Select,
    WriteReport,
    DumpKernel,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::ReadManifest => "read-manifest",
            Stage::ReadFrames => "read-frames",
            Stage::ReadQueries => "read-queries",
            Stage::Normalize => "normalize",
            Stage::Kernel => "kernel",
            Stage::Select => "select",
            Stage::WriteReport => "write-report",
            Stage::DumpKernel => "dump-kernel",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    pub fn new(stage: Stage, source: impl Into<Box<dyn std::error::Error + Send + Sync>>) -> Self {
        Self {
            stage,
            source: source.into(),
        }
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<Box<dyn std::error::Error + Send + Sync>>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::new(stage, e))
    }
}

/// Reads one EMB1 file and normalizes it unless its normalized flag is set.
pub fn load_embeddings(path: &Path, kind: EmbeddingKind) -> Result<EmbeddingMatrix, PipelineError> {
    let stage = match kind {
        EmbeddingKind::Frames => Stage::ReadFrames,
        EmbeddingKind::Queries => Stage::ReadQueries,
    };
    let matrix = read_emb1_file(path, kind)
        .map_err(|e| PipelineError::new(stage, format!("{}: {e}", path.display())))?;
    if matrix.is_normalized() {
        Ok(matrix)
    } else {
        matrix.normalize(DEFAULT_ZERO_TOLERANCE).at(Stage::Normalize)
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Inputs of a single selection.
#[derive(Debug, Clone)]
pub struct SelectRequest {
    pub sample_id: String,
    pub frames: PathBuf,
    pub queries: PathBuf,
    pub strategy: Strategy,
    pub budget: usize,
    pub params: SelectionParams,
    /// Emit `null` timings so the report is byte-reproducible.
    pub stable: bool,
}

struct Prepared {
    kernel: SimilarityKernel,
    kernel_ms: f64,
}

fn prepare(frames: &Path, queries: &Path, transform: KernelTransform) -> Result<Prepared, PipelineError> {
    let frames = load_embeddings(frames, EmbeddingKind::Frames)?;
    let queries = load_embeddings(queries, EmbeddingKind::Queries)?;
    let start = Instant::now();
    let kernel = build_kernel(&frames, &queries, transform).at(Stage::Kernel)?;
    Ok(Prepared {
        kernel,
        kernel_ms: elapsed_ms(start),
    })
}

fn build_report(
    sample_id: &str,
    kernel: &SimilarityKernel,
    strategy: Strategy,
    budget: usize,
    params: &SelectionParams,
    kernel_ms: Option<f64>,
    stable: bool,
) -> Result<SelectionReport, PipelineError> {
    let budget_value = Budget::new(budget).at(Stage::Select)?;
    let start = Instant::now();
    let selection = run_strategy(kernel, strategy, budget_value, params).at(Stage::Select)?;
    let select_ms = elapsed_ms(start);
    let mut selected_sorted = selection.selected.clone();
    selected_sorted.sort_unstable();
    Ok(SelectionReport {
        sample_id: sample_id.to_string(),
        objective: strategy.name().to_string(),
        params: params.echo(strategy),
        transform: params.transform.name().to_string(),
        mode: strategy.objective().map(|_| params.mode.name().to_string()),
        budget,
        n_candidates: kernel.n(),
        n_queries: kernel.q(),
        query_relevance: query_relevance(kernel, &selection.selected),
        selected: selection.selected,
        selected_sorted,
        gains: selection.gains,
        objective_value: selection.objective_value,
        timings: if stable {
            Timings::default()
        } else {
            Timings {
                kernel_ms,
                select_ms: Some(select_ms),
            }
        },
        evaluations: selection.evaluations,
        engine_version: ENGINE_VERSION.to_string(),
    })
}

/// Loads, builds the kernel, selects; does not write anything.
pub fn select_report(req: &SelectRequest) -> Result<SelectionReport, PipelineError> {
    let prepared = prepare(&req.frames, &req.queries, req.params.transform)?;
    build_report(
        &req.sample_id,
        &prepared.kernel,
        req.strategy,
        req.budget,
        &req.params,
        Some(prepared.kernel_ms),
        req.stable,
    )
}

/// `select`: writes the report to `output`, or standard output when `None`.
pub fn cmd_select(
    req: &SelectRequest,
    output: Option<&Path>,
    dump_prefix: Option<&Path>,
) -> Result<SelectionReport, PipelineError> {
    let prepared = prepare(&req.frames, &req.queries, req.params.transform)?;
    if let Some(prefix) = dump_prefix {
        dump_kernel(&prepared.kernel, prefix).at(Stage::DumpKernel)?;
    }
    let report = build_report(
        &req.sample_id,
        &prepared.kernel,
        req.strategy,
        req.budget,
        &req.params,
        Some(prepared.kernel_ms),
        req.stable,
    )?;
    emit(&report, output)?;
    Ok(report)
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<(), PipelineError> {
    match output {
        Some(path) => write_json(value, path).at(Stage::WriteReport),
        None => {
            print!("{}", to_json(value));
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct BatchSummary {
    pub ok: usize,
    pub failed: usize,
}

#[derive(Debug, Serialize)]
struct EntryError<'a> {
    sample_id: &'a str,
    line: usize,
    stage: String,
    message: String,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn entry_request(entry: &SelectionManifestEntry, base: &Path, defaults: &SelectionParams, stable: bool) -> SelectRequest {
    let p = &entry.params;
    SelectRequest {
        sample_id: entry.sample_id.clone(),
        frames: resolve(base, &entry.frames_path),
        queries: resolve(base, &entry.queries_path),
        strategy: entry.objective,
        budget: entry.budget,
        params: SelectionParams {
            eta: p.eta.unwrap_or(defaults.eta),
            lambda: p.lambda.unwrap_or(defaults.lambda),
            seed: p.seed.unwrap_or(defaults.seed),
            ..*defaults
        },
        stable,
    }
}

/// `batch`: one `<sample_id>.json` per good entry, `<sample_id>.error.json` per failed one.
///
/// Relative paths in the manifest are resolved against the manifest's directory.
pub fn cmd_batch(
    manifest: &Path,
    out_dir: &Path,
    defaults: &SelectionParams,
    stable: bool,
) -> Result<BatchSummary, PipelineError> {
    let file = File::open(manifest)
        .map_err(|e| PipelineError::new(Stage::ReadManifest, format!("{}: {e}", manifest.display())))?;
    let entries = parse_manifest(BufReader::new(file)).at(Stage::ReadManifest)?;
    std::fs::create_dir_all(out_dir).at(Stage::WriteReport)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut summary = BatchSummary::default();
    let mut seen = HashSet::new();
    for entry in &entries {
        let outcome = if seen.insert(entry.sample_id.as_str()) {
            let req = entry_request(entry, base, defaults, stable);
            select_report(&req).and_then(|report| {
                write_json(&report, &out_dir.join(format!("{}.json", entry.sample_id))).at(Stage::WriteReport)
            })
        } else {
            Err(PipelineError::new(Stage::ReadManifest, "duplicate sample_id"))
        };
        match outcome {
            Ok(()) => summary.ok += 1,
            Err(err) => {
                summary.failed += 1;
                let record = EntryError {
                    sample_id: &entry.sample_id,
                    line: entry.line,
                    stage: err.stage.to_string(),
                    message: err.source.to_string(),
                };
                // an unwritable error record is still counted as a failure
                let _ = write_json(&record, &out_dir.join(format!("{}.error.json", entry.sample_id)));
            }
        }
    }
    Ok(summary)
}

/// Inputs of a strategy comparison.
#[derive(Debug, Clone)]
pub struct CompareRequest {
    pub sample_id: String,
    pub frames: PathBuf,
    pub queries: PathBuf,
    pub strategies: Vec<Strategy>,
    pub budget: usize,
    pub params: SelectionParams,
    pub stable: bool,
}

/// `compare`: every strategy runs on one shared kernel.
pub fn compare_report(req: &CompareRequest) -> Result<CompareReport, PipelineError> {
    if req.strategies.len() < 2 {
        return Err(PipelineError::new(Stage::Select, "compare needs at least two strategies"));
    }
    let prepared = prepare(&req.frames, &req.queries, req.params.transform)?;
    let kernel = &prepared.kernel;
    let reports = req
        .strategies
        .iter()
        .map(|&s| build_report(&req.sample_id, kernel, s, req.budget, &req.params, None, req.stable))
        .collect::<Result<Vec<_>, _>>()?;

    let mut overlaps = Vec::new();
    for first in 0..reports.len() {
        let set: HashSet<usize> = reports[first].selected.iter().copied().collect();
        for second in first + 1..reports.len() {
            overlaps.push(PairOverlap {
                first,
                second,
                overlap: reports[second].selected.iter().filter(|i| set.contains(i)).count(),
                relevance_delta: reports[first].query_relevance - reports[second].query_relevance,
            });
        }
    }

    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&a, &b| {
        reports[b]
            .query_relevance
            .total_cmp(&reports[a].query_relevance)
            .then(a.cmp(&b))
    });
    let mut relevance_ranking: Vec<RelevanceRank> = Vec::with_capacity(order.len());
    for (place, &pos) in order.iter().enumerate() {
        let relevance = reports[pos].query_relevance;
        let rank = match relevance_ranking.last() {
            Some(prev) if prev.query_relevance == relevance => prev.rank,
            _ => place + 1,
        };
        relevance_ranking.push(RelevanceRank {
            position: pos,
            strategy: reports[pos].objective.clone(),
            query_relevance: relevance,
            rank,
        });
    }

    Ok(CompareReport {
        sample_id: req.sample_id.clone(),
        budget: req.budget,
        n_candidates: kernel.n(),
        n_queries: kernel.q(),
        transform: req.params.transform.name().to_string(),
        kernel_ms: (!req.stable).then_some(prepared.kernel_ms),
        strategies: reports,
        overlaps,
        relevance_ranking,
        engine_version: ENGINE_VERSION.to_string(),
    })
}

pub fn cmd_compare(req: &CompareRequest, output: Option<&Path>) -> Result<CompareReport, PipelineError> {
    let report = compare_report(req)?;
    emit(&report, output)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
struct KernelSidecar {
    transform: &'static str,
    n: usize,
    q: usize,
    ground_ground: String,
    ground_query: String,
}

/// Diagnostic dump: `<prefix>.gg.emb1` (N×N), `<prefix>.gq.emb1` (N×Q) and `<prefix>.kernel.json`.
///
/// Entries are narrowed to `f32`.
pub fn dump_kernel(kernel: &SimilarityKernel, prefix: &Path) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let with_suffix = |suffix: &str| {
        let mut name = prefix.as_os_str().to_owned();
        name.push(suffix);
        PathBuf::from(name)
    };
    let narrow = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<f32>>();
    let gg = EmbeddingMatrix::new(EmbeddingKind::Frames, kernel.n(), kernel.n(), narrow(kernel.ground().as_slice()))?;
    let gq = EmbeddingMatrix::new(EmbeddingKind::Frames, kernel.n(), kernel.q(), narrow(kernel.ground_query_slice()))?;
    let gg_path = with_suffix(".gg.emb1");
    let gq_path = with_suffix(".gq.emb1");
    write_emb1_file(&gg, &gg_path)?;
    write_emb1_file(&gq, &gq_path)?;
    let file_name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let sidecar = KernelSidecar {
        transform: kernel.transform().name(),
        n: kernel.n(),
        q: kernel.q(),
        ground_ground: file_name(&gg_path),
        ground_query: file_name(&gq_path),
    };
    write_json(&sidecar, &with_suffix(".kernel.json"))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BenchRequest {
    pub n: usize,
    pub d: usize,
    pub q: usize,
    pub budget: usize,
    pub objective: Strategy,
    pub repetitions: usize,
    pub seed: u64,
    pub params: SelectionParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub n: usize,
    pub d: usize,
    pub q: usize,
    pub budget: usize,
    pub objective: String,
    pub repetitions: usize,
    /// Medians over repetitions.
    pub kernel_ms: f64,
    pub select_ms: f64,
    pub total_ms: f64,
    /// `N · repetitions / total seconds` over kernel build plus selection.
    pub frames_per_second: f64,
    pub selected: Vec<usize>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// `bench`: times kernel build and selection on a seeded synthetic instance.
pub fn cmd_bench(req: &BenchRequest) -> smisel_core::Result<BenchSummary> {
    if req.n == 0 || req.d == 0 || req.q == 0 || req.repetitions == 0 {
        return Err(smisel_core::Error::InvalidParameter {
            name: "bench size",
            value: 0.0,
        });
    }
    let budget = Budget::new(req.budget)?;
    let (frames, queries) = synth::random_embeddings(req.seed, req.n, req.q, req.d)?;
    let mut kernel_ms = Vec::with_capacity(req.repetitions);
    let mut select_ms = Vec::with_capacity(req.repetitions);
    let mut total_ms = Vec::with_capacity(req.repetitions);
    let mut selected = Vec::new();
    for _ in 0..req.repetitions {
        let start = Instant::now();
        let kernel = build_kernel(&frames, &queries, req.params.transform)?;
        let built = Instant::now();
        let selection = run_strategy(&kernel, req.objective, budget, &req.params)?;
        let done = Instant::now();
        kernel_ms.push((built - start).as_secs_f64() * 1e3);
        select_ms.push((done - built).as_secs_f64() * 1e3);
        total_ms.push((done - start).as_secs_f64() * 1e3);
        selected = selection.selected;
    }
    let total_seconds: f64 = total_ms.iter().sum::<f64>() / 1e3;
    Ok(BenchSummary {
        n: req.n,
        d: req.d,
        q: req.q,
        budget: req.budget,
        objective: req.objective.name().to_string(),
        repetitions: req.repetitions,
        kernel_ms: median(&mut kernel_ms),
        select_ms: median(&mut select_ms),
        total_ms: median(&mut total_ms),
        frames_per_second: (req.n * req.repetitions) as f64 / total_seconds.max(f64::MIN_POSITIVE),
        selected,
    })
}
