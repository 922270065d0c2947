//! Query-driven frame subset selection.
//!
//! Candidate frame embeddings and query embeddings are turned into a
//! [`SimilarityKernel`], and a subset of frames is chosen by greedily
//! maximizing a submodular mutual-information objective ([`Objective`]),
//! or by one of the uniform/random sampling baselines.
//!
//! The crate is `no_std` (with `alloc`). The `parallel` feature enables
//! `std` and spreads kernel construction and naive-greedy gain evaluation
//! over a rayon pool without changing any result bit.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod embedding;
pub mod error;
pub mod kernel;
pub mod maximizer;
pub mod rng;
pub mod smi;
pub mod synth;

pub use embedding::{EmbeddingKind, EmbeddingMatrix};
pub use error::{Error, Result};
pub use kernel::{build_kernel, cosine, KernelTransform, SimilarityKernel, SquareKernel};
pub use maximizer::{
    brute_force_select, greedy_select, random_select, uniform_select, Budget, GreedyMode,
    GreedyTrace,
};
pub use smi::{Objective, SelectionState, SmiConfig};
