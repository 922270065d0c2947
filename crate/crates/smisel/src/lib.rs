//! File formats, reports, batch harness and self-test for query-driven frame
//! selection. The selection math lives in [`smisel_core`].

pub mod emb1;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod verify;

pub use emb1::{read_emb1, write_emb1, Emb1Error, Emb1Header};
pub use manifest::{parse_manifest, ManifestError, SelectionManifestEntry};
pub use pipeline::{
    cmd_batch, cmd_bench, cmd_compare, cmd_select, BatchSummary, BenchRequest, BenchSummary,
    CompareRequest, PipelineError, SelectRequest, SelectionParams, Stage, Strategy,
};
pub use report::{CompareReport, SelectionReport};
