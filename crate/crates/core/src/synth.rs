//! Seeded random instances for self-tests and benchmarks.

use alloc::vec::Vec;

use crate::embedding::{EmbeddingKind, EmbeddingMatrix, DEFAULT_ZERO_TOLERANCE};
use crate::error::Result;
use crate::kernel::{build_kernel, KernelTransform, SimilarityKernel};
use crate::rng::SeededRng;

/// `count` unit vectors with components drawn uniformly from `[-1, 1)` before normalization.
pub fn random_unit_matrix(
    rng: &mut SeededRng,
    kind: EmbeddingKind,
    count: usize,
    dim: usize,
) -> Result<EmbeddingMatrix> {
    let data: Vec<f32> = (0..count * dim).map(|_| rng.symmetric_f32()).collect();
    EmbeddingMatrix::new(kind, count, dim, data)?.normalize(DEFAULT_ZERO_TOLERANCE)
}

/// Frames followed by queries, both drawn from one generator seeded with `seed`.
pub fn random_embeddings(
    seed: u64,
    n: usize,
    q: usize,
    dim: usize,
) -> Result<(EmbeddingMatrix, EmbeddingMatrix)> {
    let mut rng = SeededRng::new(seed);
    let frames = random_unit_matrix(&mut rng, EmbeddingKind::Frames, n, dim)?;
    let queries = random_unit_matrix(&mut rng, EmbeddingKind::Queries, q, dim)?;
    Ok((frames, queries))
}

pub fn random_kernel(
    seed: u64,
    n: usize,
    q: usize,
    dim: usize,
    transform: KernelTransform,
) -> Result<SimilarityKernel> {
    let (frames, queries) = random_embeddings(seed, n, q, dim)?;
    build_kernel(&frames, &queries, transform)
}

/// Symmetric kernel with independent uniform `[0, 1)` entries; not embedding-derived.
pub fn random_nonnegative_kernel(seed: u64, n: usize, q: usize) -> Result<SimilarityKernel> {
    let mut rng = SeededRng::new(seed);
    let mut gg = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.unit_f64();
            gg[i * n + j] = v;
            gg[j * n + i] = v;
        }
    }
    let gq = (0..n * q).map(|_| rng.unit_f64()).collect();
    SimilarityKernel::from_blocks(n, q, gg, gq, KernelTransform::ClampZero)
}
