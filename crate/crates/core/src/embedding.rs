//! Row-major embedding matrices in the joint image–text space.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Rows whose Euclidean norm falls below this are rejected by [`EmbeddingMatrix::normalize`].
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-12;

/// Maximum deviation of a row norm from 1 for the row to count as unit-normalized.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmbeddingKind {
    Frames,
    Queries,
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingKind::Frames => "frames",
            EmbeddingKind::Queries => "queries",
        })
    }
}

/// `count` vectors of dimension `dim`, stored row-major as `f32`.
///
/// Every value is finite and `data.len() == count * dim`; both are checked on
/// construction, so a matrix in hand is always well-formed.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    kind: EmbeddingKind,
    count: usize,
    dim: usize,
    data: Vec<f32>,
    normalized: bool,
}

impl EmbeddingMatrix {
    pub fn new(kind: EmbeddingKind, count: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if count.checked_mul(dim) != Some(data.len()) {
            return Err(Error::ShapeMismatch {
                count,
                dim,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self {
            kind,
            count,
            dim,
            data,
            normalized: false,
        })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f32]>>(kind: EmbeddingKind, rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(kind, rows.len(), dim, data)
    }

    /// Records whether rows are already unit-normalized (flag bit 0 of EMB1).
    pub fn with_normalized_flag(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: EmbeddingKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Divides every row by its Euclidean norm and sets the normalized flag.
    ///
    /// Norms are accumulated in `f64` in ascending component order. A row whose
    /// norm is below `tolerance` yields [`Error::ZeroVector`].
    pub fn normalize(mut self, tolerance: f64) -> Result<Self> {
        for (i, row) in self.data.chunks_exact_mut(self.dim).enumerate() {
            let norm = row_norm(row);
            if norm < tolerance {
                return Err(Error::ZeroVector(i));
            }
            for v in row.iter_mut() {
                *v = (f64::from(*v) / norm) as f32;
            }
        }
        self.normalized = true;
        Ok(self)
    }

    /// Checks that every row norm is within [`UNIT_NORM_TOLERANCE`] of 1.
    pub fn check_unit_rows(&self) -> Result<()> {
        for (row, values) in self.rows().enumerate() {
            let norm = row_norm(values);
            if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(Error::NotNormalized {
                    kind: self.kind,
                    row,
                    norm,
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn row_norm(row: &[f32]) -> f64 {
    let mut acc = 0.0f64;
    for &v in row {
        let v = f64::from(v);
        acc += v * v;
    }
    libm::sqrt(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn normalize_three_four_five() {
        let m = EmbeddingMatrix::from_rows(EmbeddingKind::Frames, &[[3.0f32, 4.0]])
            .unwrap()
            .normalize(DEFAULT_ZERO_TOLERANCE)
            .unwrap();
        assert!((m.row(0)[0] - 0.6).abs() < 1e-7);
        assert!((m.row(0)[1] - 0.8).abs() < 1e-7);
        assert!(m.is_normalized());
    }

    #[test]
    fn normalize_rejects_zero_row() {
        let m = EmbeddingMatrix::from_rows(EmbeddingKind::Frames, &[[1.0f32, 0.0], [0.0, 0.0]])
            .unwrap();
        assert_eq!(m.normalize(DEFAULT_ZERO_TOLERANCE), Err(Error::ZeroVector(1)));
    }

    #[test]
    fn normalize_keeps_unit_row() {
        let m = EmbeddingMatrix::from_rows(EmbeddingKind::Queries, &[[1.0f32, 0.0]])
            .unwrap()
            .normalize(DEFAULT_ZERO_TOLERANCE)
            .unwrap();
        assert_eq!(m.row(0), &[1.0, 0.0]);
    }

    #[test]
    fn construction_checks_shape_and_values() {
        assert_eq!(
            EmbeddingMatrix::new(EmbeddingKind::Frames, 2, 3, vec![0.0; 5]),
            Err(Error::ShapeMismatch {
                count: 2,
                dim: 3,
                len: 5
            })
        );
        assert_eq!(
            EmbeddingMatrix::new(EmbeddingKind::Frames, 0, 0, vec![]),
            Err(Error::ZeroDimension)
        );
        assert_eq!(
            EmbeddingMatrix::new(EmbeddingKind::Frames, 1, 2, vec![0.0, f32::NAN]),
            Err(Error::NonFinite(1))
        );
        assert!(EmbeddingMatrix::new(EmbeddingKind::Frames, 0, 4, vec![]).is_ok());
    }

    #[test]
    fn unit_row_check() {
        let m = EmbeddingMatrix::from_rows(EmbeddingKind::Frames, &[[1.0f32, 0.0], [0.5, 0.0]])
            .unwrap();
        assert!(matches!(
            m.check_unit_rows(),
            Err(Error::NotNormalized { row: 1, .. })
        ));
    }
}
