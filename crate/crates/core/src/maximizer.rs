//! Cardinality-constrained maximization and the sampling baselines.
//!
//! Greedy selection breaks ties by the smallest ground index. Lazy mode keeps
//! stale gains in a max-heap ordered by `(gain, -index)` and re-evaluates the
//! top until it is fresh for the current step; because every gain here is
//! monotone non-increasing in floating point as the selection grows, the
//! accepted sequence is identical to naive greedy.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::num::NonZeroUsize;

use crate::error::{Error, Result};
use crate::kernel::SimilarityKernel;
use crate::rng::SeededRng;
use crate::smi::{objective_value, SelectionState, SmiConfig};

/// Upper bound on the number of subsets [`brute_force_select`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 2_000_000;

/// Number of frames to select, `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Budget(NonZeroUsize);

impl Budget {
    pub fn new(k: usize) -> Result<Self> {
        NonZeroUsize::new(k).map(Budget).ok_or(Error::InvalidBudget)
    }

    pub fn get(self) -> usize {
        self.0.get()
    }

    /// `min(k, n)`
    pub fn effective(self, n: usize) -> usize {
        self.get().min(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GreedyMode {
    Naive,
    #[default]
    Lazy,
}

impl GreedyMode {
    pub fn name(self) -> &'static str {
        match self {
            GreedyMode::Naive => "naive",
            GreedyMode::Lazy => "lazy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyStep {
    pub index: usize,
    pub gain: f64,
    /// Gain evaluations performed during this step.
    pub evaluated: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GreedyTrace {
    pub evaluations: usize,
    pub steps: Vec<GreedyStep>,
}

/// Exact evaluation count of naive greedy: `k·N − k(k−1)/2`.
pub fn naive_evaluations(n: usize, k: usize) -> usize {
    let k = k.min(n);
    k * n - k * k.saturating_sub(1) / 2
}

#[inline]
fn beats(gain: f64, index: usize, best_gain: f64, best_index: usize) -> bool {
    match gain.total_cmp(&best_gain) {
        Ordering::Greater => true,
        Ordering::Equal => index < best_index,
        Ordering::Less => false,
    }
}

fn best_candidate(state: &SelectionState, kernel: &SimilarityKernel) -> Option<(usize, f64, usize)> {
    let n = kernel.n();
    let pick = |acc: Option<(usize, f64)>, (e, g): (usize, f64)| match acc {
        Some((bi, bg)) if !beats(g, e, bg, bi) => Some((bi, bg)),
        _ => Some((e, g)),
    };
    let evaluated = n - state.chosen().len();
    #[cfg(feature = "parallel")]
    let best = {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .filter(|&e| !state.contains(e))
            .map(|e| (e, state.gain_unchecked(kernel, e)))
            .fold(|| None, pick)
            .reduce(
                || None,
                |a, b| match (a, b) {
                    (Some(x), Some(y)) => pick(Some(x), y),
                    (x, None) => x,
                    (None, y) => y,
                },
            )
    };
    #[cfg(not(feature = "parallel"))]
    let best = (0..n)
        .filter(|&e| !state.contains(e))
        .map(|e| (e, state.gain_unchecked(kernel, e)))
        .fold(None, pick);
    best.map(|(e, g)| (e, g, evaluated))
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    gain: f64,
    index: usize,
    step: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.index.cmp(&self.index))
    }
}

fn naive_greedy(kernel: &SimilarityKernel, state: &mut SelectionState, picks: usize) -> GreedyTrace {
    let mut trace = GreedyTrace::default();
    for _ in 0..picks {
        let Some((e, gain, evaluated)) = best_candidate(state, kernel) else {
            break;
        };
        state.commit(kernel, e, gain);
        trace.evaluations += evaluated;
        trace.steps.push(GreedyStep {
            index: e,
            gain,
            evaluated,
        });
    }
    trace
}

fn lazy_greedy(kernel: &SimilarityKernel, state: &mut SelectionState, picks: usize) -> GreedyTrace {
    let n = kernel.n();
    let mut heap: BinaryHeap<HeapEntry> = (0..n)
        .map(|e| HeapEntry {
            gain: state.gain_unchecked(kernel, e),
            index: e,
            step: 0,
        })
        .collect();
    let mut trace = GreedyTrace {
        evaluations: 0,
        steps: Vec::with_capacity(picks),
    };
    // the initial heap fill counts toward the first step
    let mut evaluated = n;
    for step in 0..picks {
        while let Some(top) = heap.pop() {
            if top.step == step {
                state.commit(kernel, top.index, top.gain);
                trace.steps.push(GreedyStep {
                    index: top.index,
                    gain: top.gain,
                    evaluated,
                });
                break;
            }
            evaluated += 1;
            heap.push(HeapEntry {
                gain: state.gain_unchecked(kernel, top.index),
                index: top.index,
                step,
            });
        }
        trace.evaluations += evaluated;
        evaluated = 0;
    }
    trace
}

/// Greedily selects `min(k, N)` frames maximizing `config.objective`.
///
/// Returns the final state (selection order, per-step gains, objective value)
/// and an evaluation trace.
pub fn greedy_select(
    kernel: &SimilarityKernel,
    config: &SmiConfig,
    budget: Budget,
    mode: GreedyMode,
) -> Result<(SelectionState, GreedyTrace)> {
    let mut state = SelectionState::new(kernel, config)?;
    let picks = budget.effective(kernel.n());
    let trace = match mode {
        GreedyMode::Naive => naive_greedy(kernel, &mut state, picks),
        GreedyMode::Lazy => lazy_greedy(kernel, &mut state, picks),
    };
    Ok((state, trace))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Exact optimum over all subsets of size `min(k, N)`.
///
/// Ties keep the lexicographically smallest index set.
pub fn brute_force_select(
    kernel: &SimilarityKernel,
    config: &SmiConfig,
    budget: Budget,
) -> Result<(f64, Vec<usize>)> {
    config.check_kernel(kernel)?;
    let n = kernel.n();
    let k = budget.effective(n);
    let subsets = binomial(n, k);
    if subsets > u128::from(BRUTE_FORCE_LIMIT) {
        return Err(Error::InstanceTooLarge {
            subsets,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best_value = objective_value(kernel, config, &combo)?;
    let mut best_set = combo.clone();
    // advance through combinations in lexicographic order
    while let Some(pos) = (0..k).rev().find(|&i| combo[i] < n - k + i) {
        combo[pos] += 1;
        for i in pos + 1..k {
            combo[i] = combo[i - 1] + 1;
        }
        let value = objective_value(kernel, config, &combo)?;
        if value > best_value {
            best_value = value;
            best_set.clone_from(&combo);
        }
    }
    Ok((best_value, best_set))
}

/// Equidistant indices `round(i·(n−1)/(k−1))`, rounding half away from zero.
///
/// Covers both endpoints when `2 <= k <= n`; `k = 1` picks the middle frame.
/// When `k > n` every index is returned.
pub fn uniform_select(n: usize, budget: Budget) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    let k = budget.get();
    let round_ratio = |num: usize, den: usize| (2 * num + den) / (2 * den);
    let mut picked: Vec<usize> = if k == 1 {
        alloc::vec![round_ratio(n - 1, 2)]
    } else {
        (0..k).map(|i| round_ratio(i * (n - 1), k - 1)).collect()
    };
    picked.dedup();
    let target = k.min(n);
    if picked.len() < target {
        let mut used = alloc::vec![false; n];
        for &i in &picked {
            used[i] = true;
        }
        let missing = target - picked.len();
        picked.extend((0..n).filter(|&i| !used[i]).take(missing));
        picked.sort_unstable();
    }
    Ok(picked)
}

/// `min(k, n)` distinct indices drawn without replacement, sorted ascending.
///
/// Uses a partial Fisher–Yates shuffle driven by [`SeededRng`].
pub fn random_select(n: usize, budget: Budget, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    let k = budget.effective(n);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut rng = SeededRng::new(seed);
    for i in 0..k {
        let j = i + rng.below((n - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool.sort_unstable();
    Ok(pool)
}
