//! Naive reference implementations, written directly from the formulas and
//! sharing no code with the library paths they check.
#![allow(dead_code, clippy::needless_range_loop)]

use smisel_core::{EmbeddingMatrix, KernelTransform};

pub fn naive_cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut ab = 0.0f64;
    let mut aa = 0.0f64;
    let mut bb = 0.0f64;
    for k in 0..a.len() {
        ab += a[k] as f64 * b[k] as f64;
        aa += a[k] as f64 * a[k] as f64;
        bb += b[k] as f64 * b[k] as f64;
    }
    ab / (aa.sqrt() * bb.sqrt())
}

pub fn naive_transform(t: KernelTransform, c: f64) -> f64 {
    match t {
        KernelTransform::ClampZero => if c < 0.0 { 0.0 } else { c },
        KernelTransform::AffineUnit => 0.5 + 0.5 * c,
        KernelTransform::Raw => c,
    }
}

/// Full dense matrix `T(cos(x_i, y_j))`.
pub fn naive_block(x: &EmbeddingMatrix, y: &EmbeddingMatrix, t: KernelTransform) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; y.count()]; x.count()];
    for i in 0..x.count() {
        for j in 0..y.count() {
            out[i][j] = naive_transform(t, naive_cosine(x.row(i), y.row(j)));
        }
    }
    out
}

pub struct DenseInstance {
    pub gg: Vec<Vec<f64>>,
    pub gq: Vec<Vec<f64>>,
}

impl DenseInstance {
    pub fn from_kernel(k: &smisel_core::SimilarityKernel) -> Self {
        let gg = (0..k.n()).map(|i| (0..k.n()).map(|j| k.ground_ground(i, j)).collect()).collect();
        let gq = (0..k.n()).map(|i| (0..k.q()).map(|q| k.ground_query(i, q)).collect()).collect();
        Self { gg, gq }
    }

    pub fn n(&self) -> usize {
        self.gg.len()
    }

    pub fn flmi(&self, a: &[usize], eta: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n() {
            let mut cover = 0.0f64;
            for &j in a {
                if self.gg[i][j] > cover {
                    cover = self.gg[i][j];
                }
            }
            let mut best_q = f64::NEG_INFINITY;
            for &s in &self.gq[i] {
                if s > best_q {
                    best_q = s;
                }
            }
            let cap = eta * best_q;
            total += if cover < cap { cover } else { cap };
        }
        total
    }

    pub fn gcmi(&self, a: &[usize], lambda: f64) -> f64 {
        let mut total = 0.0;
        for &i in a {
            for &s in &self.gq[i] {
                total += s;
            }
        }
        2.0 * lambda * total
    }

    pub fn facility_location(&self, a: &[usize]) -> f64 {
        dense_facility_location(&self.gg, a)
    }

    pub fn graph_cut(&self, a: &[usize], lambda: f64) -> f64 {
        dense_graph_cut(&self.gg, a, lambda)
    }

    /// Frames ranked by total query similarity, ties by index.
    pub fn top_k_relevance(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        let rel: Vec<f64> = self.gq.iter().map(|r| r.iter().sum()).collect();
        idx.sort_by(|&a, &b| rel[b].partial_cmp(&rel[a]).unwrap().then(a.cmp(&b)));
        idx.truncate(k);
        idx
    }
}

pub fn dense_facility_location(s: &[Vec<f64>], a: &[usize]) -> f64 {
    let mut total = 0.0;
    for row in s {
        let mut cover = 0.0f64;
        for &j in a {
            cover = cover.max(row[j]);
        }
        total += cover;
    }
    total
}

pub fn dense_graph_cut(s: &[Vec<f64>], a: &[usize], lambda: f64) -> f64 {
    let mut cut = 0.0;
    for row in s {
        for &j in a {
            cut += row[j];
        }
    }
    let mut within = 0.0;
    for &i in a {
        for &j in a {
            within += s[i][j];
        }
    }
    cut - lambda * within
}

/// Every size-`k` subset of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}
