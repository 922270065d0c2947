//! Pairwise similarity blocks between frames and queries.
//!
//! Every entry is a single dot product accumulated in `f64` in ascending
//! component order. Parallel builds only split work across entries, so the
//! kernel is bit-identical regardless of thread count.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::embedding::{EmbeddingKind, EmbeddingMatrix};
use crate::error::{Error, Result};

/// Symmetry tolerance accepted by [`SquareKernel::from_vec`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Band beyond ±1 that [`cosine`] folds back onto ±1.
pub const COSINE_CLAMP_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum KernelTransform {
    /// `max(cos, 0)`
    #[default]
    ClampZero,
    /// `(1 + cos) / 2`
    AffineUnit,
    /// `cos`; diagnostics only, rejected by coverage-style objectives.
    Raw,
}

impl KernelTransform {
    pub fn apply(self, cos: f64) -> f64 {
        match self {
            KernelTransform::ClampZero => cos.max(0.0),
            KernelTransform::AffineUnit => (1.0 + cos) / 2.0,
            KernelTransform::Raw => cos,
        }
    }

    pub fn is_nonnegative(self) -> bool {
        !matches!(self, KernelTransform::Raw)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelTransform::ClampZero => "clamp_zero",
            KernelTransform::AffineUnit => "affine_unit",
            KernelTransform::Raw => "raw",
        }
    }
}

impl fmt::Display for KernelTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        acc += f64::from(*x) * f64::from(*y);
    }
    acc
}

#[inline]
fn fold_cosine(v: f64) -> f64 {
    if v > 1.0 && v - 1.0 <= COSINE_CLAMP_BAND {
        1.0
    } else if v < -1.0 && -1.0 - v <= COSINE_CLAMP_BAND {
        -1.0
    } else {
        v
    }
}

/// Cosine similarity of two unit vectors.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(fold_cosine(dot(a, b)))
}

/// Dense symmetric similarity matrix over one ground set.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareKernel {
    size: usize,
    data: Vec<f64>,
    transform: KernelTransform,
}

impl SquareKernel {
    /// Wraps a row-major `size × size` matrix after validating it.
    ///
    /// Entries must be finite and symmetric within [`SYMMETRY_TOLERANCE`];
    /// under a non-negative transform they must also be `>= 0`.
    pub fn from_vec(size: usize, data: Vec<f64>, transform: KernelTransform) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::ShapeMismatch {
                count: size,
                dim: size,
                len: data.len(),
            });
        }
        check_entries(&data, size, transform)?;
        for i in 0..size {
            for j in (i + 1)..size {
                if (data[i * size + j] - data[j * size + i]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::Asymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self {
            size,
            data,
            transform,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn transform(&self) -> KernelTransform {
        self.transform
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    /// Row `i`; by symmetry also column `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

fn check_entries(data: &[f64], cols: usize, transform: KernelTransform) -> Result<()> {
    for (pos, &v) in data.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(pos));
        }
        if transform.is_nonnegative() && v < 0.0 {
            return Err(Error::NegativeSimilarity {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
    }
    Ok(())
}

/// Frame–frame and frame–query similarity blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityKernel {
    ground: SquareKernel,
    queries: usize,
    ground_query: Vec<f64>,
}

impl SimilarityKernel {
    /// Assembles a kernel from precomputed blocks (`n × n` and `n × q`, row-major).
    pub fn from_blocks(
        n: usize,
        q: usize,
        ground_ground: Vec<f64>,
        ground_query: Vec<f64>,
        transform: KernelTransform,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty(EmbeddingKind::Frames));
        }
        if q == 0 {
            return Err(Error::Empty(EmbeddingKind::Queries));
        }
        let ground = SquareKernel::from_vec(n, ground_ground, transform)?;
        if ground_query.len() != n * q {
            return Err(Error::ShapeMismatch {
                count: n,
                dim: q,
                len: ground_query.len(),
            });
        }
        check_entries(&ground_query, q, transform)?;
        Ok(Self {
            ground,
            queries: q,
            ground_query,
        })
    }

    /// Number of candidate frames `N`.
    pub fn n(&self) -> usize {
        self.ground.size
    }

    /// Number of query vectors `Q`.
    pub fn q(&self) -> usize {
        self.queries
    }

    pub fn transform(&self) -> KernelTransform {
        self.ground.transform
    }

    pub fn ground(&self) -> &SquareKernel {
        &self.ground
    }

    #[inline]
    pub fn ground_ground(&self, i: usize, j: usize) -> f64 {
        self.ground.get(i, j)
    }

    #[inline]
    pub fn ground_query(&self, i: usize, q: usize) -> f64 {
        self.ground_query[i * self.queries + q]
    }

    #[inline]
    pub fn ground_row(&self, i: usize) -> &[f64] {
        self.ground.row(i)
    }

    #[inline]
    pub fn query_row(&self, i: usize) -> &[f64] {
        &self.ground_query[i * self.queries..(i + 1) * self.queries]
    }

    pub fn ground_query_slice(&self) -> &[f64] {
        &self.ground_query
    }

    /// `max_q s_iq` for frame `i`.
    pub fn max_query_similarity(&self, i: usize) -> f64 {
        self.query_row(i)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same kernel with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: factor,
            });
        }
        Self::from_blocks(
            self.n(),
            self.q(),
            self.ground.data.iter().map(|v| v * factor).collect(),
            self.ground_query.iter().map(|v| v * factor).collect(),
            self.transform(),
        )
    }
}

fn check_inputs(frames: &EmbeddingMatrix, queries: &EmbeddingMatrix) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::Empty(EmbeddingKind::Frames));
    }
    if queries.is_empty() {
        return Err(Error::Empty(EmbeddingKind::Queries));
    }
    if frames.dim() != queries.dim() {
        return Err(Error::DimensionMismatch {
            expected: frames.dim(),
            found: queries.dim(),
        });
    }
    frames.check_unit_rows()?;
    queries.check_unit_rows()
}

/// Fills the upper triangle (including the diagonal) of a square block, then mirrors it.
fn symmetric_block(rows: &[&[f32]], transform: KernelTransform) -> Vec<f64> {
    let n = rows.len();
    let mut data = vec![0.0f64; n * n];
    let fill_row = |i: usize, out: &mut [f64]| {
        for j in i..n {
            out[j] = transform.apply(fold_cosine(dot(rows[i], rows[j])));
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, out)| fill_row(i, out));
    }
    #[cfg(not(feature = "parallel"))]
    for (i, out) in data.chunks_mut(n).enumerate() {
        fill_row(i, out);
    }
    for i in 0..n {
        for j in 0..i {
            data[i * n + j] = data[j * n + i];
        }
    }
    data
}

fn cross_block(left: &EmbeddingMatrix, right: &EmbeddingMatrix, transform: KernelTransform) -> Vec<f64> {
    let cols = right.count();
    let mut data = vec![0.0f64; left.count() * cols];
    let fill_row = |i: usize, out: &mut [f64]| {
        let a = left.row(i);
        for (q, slot) in out.iter_mut().enumerate() {
            *slot = transform.apply(fold_cosine(dot(a, right.row(q))));
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(cols)
            .enumerate()
            .for_each(|(i, out)| fill_row(i, out));
    }
    #[cfg(not(feature = "parallel"))]
    for (i, out) in data.chunks_mut(cols).enumerate() {
        fill_row(i, out);
    }
    data
}

/// Computes `T(cos(f_i, f_j))` and `T(cos(f_i, t_q))` for unit-normalized inputs.
pub fn build_kernel(
    frames: &EmbeddingMatrix,
    queries: &EmbeddingMatrix,
    transform: KernelTransform,
) -> Result<SimilarityKernel> {
    check_inputs(frames, queries)?;
    let rows: Vec<&[f32]> = frames.rows().collect();
    let ground = SquareKernel {
        size: frames.count(),
        data: symmetric_block(&rows, transform),
        transform,
    };
    Ok(SimilarityKernel {
        ground,
        queries: queries.count(),
        ground_query: cross_block(frames, queries, transform),
    })
}

/// Shared kernel over the extended ground set: frames `0..N` followed by queries `N..N+Q`.
///
/// This is the domain on which a base set function is evaluated for the
/// generic mutual-information identity.
pub fn build_extended_kernel(
    frames: &EmbeddingMatrix,
    queries: &EmbeddingMatrix,
    transform: KernelTransform,
) -> Result<SquareKernel> {
    check_inputs(frames, queries)?;
    let rows: Vec<&[f32]> = frames.rows().chain(queries.rows()).collect();
    Ok(SquareKernel {
        size: rows.len(),
        data: symmetric_block(&rows, transform),
        transform,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowStats {
    pub max_query: f64,
    pub mean_ground: f64,
}

pub fn kernel_row_stats(kernel: &SimilarityKernel) -> Vec<RowStats> {
    (0..kernel.n())
        .map(|i| RowStats {
            max_query: kernel.max_query_similarity(i),
            mean_ground: kernel.ground_row(i).iter().sum::<f64>() / kernel.n() as f64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingKind::{Frames, Queries};

    fn m(kind: EmbeddingKind, rows: &[[f32; 2]]) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(kind, rows).unwrap()
    }

    #[test]
    fn cosine_basics() {
        assert!((cosine(&[0.6, 0.8], &[0.6, 0.8]).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), -1.0);
        assert_eq!(
            cosine(&[1.0, 0.0], &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn cosine_folds_only_small_overshoot() {
        assert_eq!(fold_cosine(1.0 + 5e-7), 1.0);
        assert_eq!(fold_cosine(-1.0 - 5e-7), -1.0);
        assert_eq!(fold_cosine(1.01), 1.01);
    }

    #[test]
    fn orthogonal_basis_clamp_zero() {
        let k = build_kernel(
            &m(Frames, &[[1.0, 0.0], [0.0, 1.0]]),
            &m(Queries, &[[1.0, 0.0]]),
            KernelTransform::ClampZero,
        )
        .unwrap();
        assert_eq!(k.ground().as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(k.ground_query_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn antipodal_affine_unit() {
        let k = build_kernel(
            &m(Frames, &[[1.0, 0.0], [-1.0, 0.0]]),
            &m(Queries, &[[1.0, 0.0]]),
            KernelTransform::AffineUnit,
        )
        .unwrap();
        assert_eq!(k.ground().as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(k.ground_query_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn build_rejects_bad_inputs() {
        let frames = m(Frames, &[[1.0, 0.0]]);
        let q3 = EmbeddingMatrix::from_rows(Queries, &[[1.0f32, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            build_kernel(&frames, &q3, KernelTransform::ClampZero),
            Err(Error::DimensionMismatch { .. })
        ));
        let empty = EmbeddingMatrix::new(Queries, 0, 2, Vec::new()).unwrap();
        assert_eq!(
            build_kernel(&frames, &empty, KernelTransform::ClampZero),
            Err(Error::Empty(Queries))
        );
        let unnormalized = m(Frames, &[[2.0, 0.0]]);
        assert!(matches!(
            build_kernel(&unnormalized, &m(Queries, &[[1.0, 0.0]]), KernelTransform::Raw),
            Err(Error::NotNormalized { kind: Frames, row: 0, .. })
        ));
    }

    #[test]
    fn row_stats_on_orthogonal_basis() {
        let k = build_kernel(
            &m(Frames, &[[1.0, 0.0], [0.0, 1.0]]),
            &m(Queries, &[[1.0, 0.0]]),
            KernelTransform::ClampZero,
        )
        .unwrap();
        let stats = kernel_row_stats(&k);
        assert_eq!(stats[0], RowStats { max_query: 1.0, mean_ground: 0.5 });
        assert_eq!(stats[1], RowStats { max_query: 0.0, mean_ground: 0.5 });

        let single = build_kernel(
            &m(Frames, &[[0.6, 0.8]]),
            &m(Queries, &[[0.6, 0.8]]),
            KernelTransform::ClampZero,
        )
        .unwrap();
        let s = kernel_row_stats(&single)[0];
        assert!((s.max_query - 1.0).abs() < 1e-6 && (s.mean_ground - 1.0).abs() < 1e-6);
    }

    #[test]
    fn from_blocks_validation() {
        assert!(matches!(
            SimilarityKernel::from_blocks(2, 1, vec![1.0, 0.5, 0.4, 1.0], vec![0.0, 0.0], KernelTransform::ClampZero),
            Err(Error::Asymmetric { row: 0, col: 1 })
        ));
        assert!(matches!(
            SimilarityKernel::from_blocks(1, 1, vec![1.0], vec![-0.1], KernelTransform::ClampZero),
            Err(Error::NegativeSimilarity { .. })
        ));
        assert!(SimilarityKernel::from_blocks(1, 1, vec![1.0], vec![-0.1], KernelTransform::Raw).is_ok());
    }
}
