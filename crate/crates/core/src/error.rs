use crate::embedding::EmbeddingKind;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("data length {len} does not match {count} x {dim}")]
    ShapeMismatch { count: usize, dim: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("row {0} has zero norm")]
    ZeroVector(usize),
    #[error("row {row} of the {kind} matrix is not unit-normalized (norm {norm})")]
    NotNormalized {
        kind: EmbeddingKind,
        row: usize,
        norm: f64,
    },
    #[error("the {0} matrix is empty")]
    Empty(EmbeddingKind),
    #[error("similarity block is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },
    #[error("negative similarity at ({row}, {col}) under a non-negative transform")]
    NegativeSimilarity { row: usize, col: usize },
    #[error("objective requires a non-negative kernel transform")]
    NonNegativeKernelRequired,
    #[error("index {index} is out of range for a ground set of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),
    #[error("candidate {0} is already selected")]
    AlreadyChosen(usize),
    #[error("query set and selected set overlap at element {0}")]
    OverlappingSets(usize),
    #[error("budget must be at least 1")]
    InvalidBudget,
    #[error("ground set must contain at least one element")]
    EmptyGroundSet,
    #[error("parameter {name} must be finite and non-negative, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("state and kernel sizes differ ({state} vs {kernel})")]
    StateMismatch { state: usize, kernel: usize },
    #[error("exhaustive search over {subsets} subsets exceeds the limit of {limit}")]
    InstanceTooLarge { subsets: u128, limit: u64 },
    #[error("strategy is not an objective-driven selection")]
    NotAnObjective,
}
