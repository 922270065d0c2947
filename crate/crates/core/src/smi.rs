//! Submodular mutual-information objectives between a selected frame set `A`
//! and a query set `B`.
//!
//! * FLMI: `Σ_{i∈V} min(max_{j∈A} s_ij, η·max_{q∈B} s_iq)`, summed over all `N` frames.
//! * GCMI: `2λ·Σ_{i∈A} Σ_{q∈B} s_iq`, modular in `A`.
//! * Facility location: `Σ_{i∈V} max_{j∈A} s_ij`.
//! * Graph cut: `Σ_{i∈V} Σ_{j∈A} s_ij − λ·Σ_{i∈A} Σ_{j∈A} s_ij`.
//!
//! The maximum over an empty set is 0, so every objective vanishes on `A = ∅`.
//! [`SelectionState`] memoizes per-frame coverage so that FLMI and facility
//! location gains cost `O(N)` and GCMI gains cost `O(Q)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::kernel::{SimilarityKernel, SquareKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Flmi,
    Gcmi,
    FacilityLocation,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Flmi => "flmi",
            Objective::Gcmi => "gcmi",
            Objective::FacilityLocation => "facility_location",
        }
    }

    /// Objectives built on `max` coverage need similarities `>= 0`.
    pub fn requires_nonnegative_kernel(self) -> bool {
        !matches!(self, Objective::Gcmi)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const DEFAULT_ETA: f64 = 1.0;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmiConfig {
    pub objective: Objective,
    /// Query-coverage weight of FLMI.
    pub eta: f64,
    /// Scale of GCMI (and the redundancy penalty of the graph-cut base).
    pub lambda: f64,
}

impl SmiConfig {
    pub fn new(objective: Objective) -> Self {
        Self {
            objective,
            eta: DEFAULT_ETA,
            lambda: DEFAULT_LAMBDA,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_param("eta", self.eta)?;
        check_param("lambda", self.lambda)
    }

    /// Validates parameters and the kernel transform for this objective.
    pub fn check_kernel(&self, kernel: &SimilarityKernel) -> Result<()> {
        self.validate()?;
        if self.objective.requires_nonnegative_kernel() && !kernel.transform().is_nonnegative() {
            return Err(Error::NonNegativeKernelRequired);
        }
        Ok(())
    }
}

impl Default for SmiConfig {
    fn default() -> Self {
        Self::new(Objective::Flmi)
    }
}

fn check_param(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

fn check_set(set: &[usize], size: usize) -> Result<()> {
    let mut seen = vec![false; size];
    for &i in set {
        if i >= size {
            return Err(Error::IndexOutOfRange { index: i, size });
        }
        if core::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

#[cfg(feature = "fault-injection")]
pub mod fault {
    //! Test hook that swaps the `min` in FLMI for a `max`.
    use core::sync::atomic::{AtomicBool, Ordering};

    static FLMI_MAX: AtomicBool = AtomicBool::new(false);

    pub fn set_flmi_min_to_max(enabled: bool) {
        FLMI_MAX.store(enabled, Ordering::SeqCst);
    }

    pub(crate) fn flmi_min_to_max() -> bool {
        FLMI_MAX.load(Ordering::SeqCst)
    }
}

#[inline]
fn flmi_term(coverage: f64, cap: f64) -> f64 {
    #[cfg(feature = "fault-injection")]
    if fault::flmi_min_to_max() {
        return coverage.max(cap);
    }
    coverage.min(cap)
}

fn query_caps(kernel: &SimilarityKernel, eta: f64) -> Vec<f64> {
    (0..kernel.n())
        .map(|i| eta * kernel.max_query_similarity(i))
        .collect()
}

fn nonnegative(kernel: &SimilarityKernel) -> Result<()> {
    if kernel.transform().is_nonnegative() {
        Ok(())
    } else {
        Err(Error::NonNegativeKernelRequired)
    }
}

pub fn flmi_value(kernel: &SimilarityKernel, chosen: &[usize], eta: f64) -> Result<f64> {
    nonnegative(kernel)?;
    check_param("eta", eta)?;
    check_set(chosen, kernel.n())?;
    let mut total = 0.0;
    for (i, cap) in query_caps(kernel, eta).into_iter().enumerate() {
        let row = kernel.ground_row(i);
        let coverage = chosen.iter().map(|&j| row[j]).fold(0.0, f64::max);
        total += flmi_term(coverage, cap);
    }
    Ok(total)
}

pub fn gcmi_value(kernel: &SimilarityKernel, chosen: &[usize], lambda: f64) -> Result<f64> {
    check_param("lambda", lambda)?;
    check_set(chosen, kernel.n())?;
    Ok(chosen.iter().map(|&i| gcmi_term(kernel, i, lambda)).sum())
}

#[inline]
fn gcmi_term(kernel: &SimilarityKernel, i: usize, lambda: f64) -> f64 {
    2.0 * lambda * kernel.query_row(i).iter().sum::<f64>()
}

pub fn facility_location_value(kernel: &SimilarityKernel, chosen: &[usize]) -> Result<f64> {
    FacilityLocation::new(kernel.ground())?.evaluate(chosen)
}

pub fn graph_cut_value(kernel: &SimilarityKernel, chosen: &[usize], lambda: f64) -> Result<f64> {
    GraphCut::new(kernel.ground(), lambda)?.evaluate(chosen)
}

/// Value of `config.objective` on `chosen`.
pub fn objective_value(kernel: &SimilarityKernel, config: &SmiConfig, chosen: &[usize]) -> Result<f64> {
    match config.objective {
        Objective::Flmi => flmi_value(kernel, chosen, config.eta),
        Objective::Gcmi => gcmi_value(kernel, chosen, config.lambda),
        Objective::FacilityLocation => facility_location_value(kernel, chosen),
    }
}

/// Incremental greedy state for one objective on one kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    objective: Objective,
    lambda: f64,
    chosen: Vec<usize>,
    member: Vec<bool>,
    // max_{j∈A} s_ij per frame; FLMI and facility location only
    coverage: Vec<f64>,
    // η·max_q s_iq per frame; FLMI only
    query_cap: Vec<f64>,
    objective_value: f64,
    gains: Vec<f64>,
}

impl SelectionState {
    pub fn new(kernel: &SimilarityKernel, config: &SmiConfig) -> Result<Self> {
        config.check_kernel(kernel)?;
        let n = kernel.n();
        let (coverage, query_cap) = match config.objective {
            Objective::Flmi => (vec![0.0; n], query_caps(kernel, config.eta)),
            Objective::FacilityLocation => (vec![0.0; n], Vec::new()),
            Objective::Gcmi => (Vec::new(), Vec::new()),
        };
        Ok(Self {
            objective: config.objective,
            lambda: config.lambda,
            chosen: Vec::new(),
            member: vec![false; n],
            coverage,
            query_cap,
            objective_value: 0.0,
            gains: Vec::new(),
        })
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    /// Selected indices in insertion order.
    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn contains(&self, e: usize) -> bool {
        self.member.get(e).copied().unwrap_or(false)
    }

    pub fn coverage(&self) -> &[f64] {
        &self.coverage
    }

    pub fn query_cap(&self) -> &[f64] {
        &self.query_cap
    }

    /// Running sum of accepted gains, i.e. the objective on [`Self::chosen`].
    pub fn objective_value(&self) -> f64 {
        self.objective_value
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn ground_size(&self) -> usize {
        self.member.len()
    }

    fn check_candidate(&self, kernel: &SimilarityKernel, e: usize) -> Result<()> {
        if kernel.n() != self.member.len() {
            return Err(Error::StateMismatch {
                state: self.member.len(),
                kernel: kernel.n(),
            });
        }
        if e >= kernel.n() {
            return Err(Error::IndexOutOfRange {
                index: e,
                size: kernel.n(),
            });
        }
        if self.member[e] {
            return Err(Error::AlreadyChosen(e));
        }
        Ok(())
    }

    /// Marginal gain `f(A ∪ {e}) − f(A)`.
    pub fn gain(&self, kernel: &SimilarityKernel, e: usize) -> Result<f64> {
        self.check_candidate(kernel, e)?;
        Ok(self.gain_unchecked(kernel, e))
    }

    pub(crate) fn gain_unchecked(&self, kernel: &SimilarityKernel, e: usize) -> f64 {
        let column = kernel.ground_row(e);
        match self.objective {
            Objective::Flmi => {
                let mut total = 0.0;
                for ((&cov, &cap), &s) in self.coverage.iter().zip(&self.query_cap).zip(column) {
                    total += flmi_term(cov.max(s), cap) - flmi_term(cov, cap);
                }
                total
            }
            Objective::FacilityLocation => {
                let mut total = 0.0;
                for (&cov, &s) in self.coverage.iter().zip(column) {
                    total += cov.max(s) - cov;
                }
                total
            }
            Objective::Gcmi => gcmi_term(kernel, e, self.lambda),
        }
    }

    /// Adds `e` to the selection and returns its marginal gain.
    pub fn insert(&mut self, kernel: &SimilarityKernel, e: usize) -> Result<f64> {
        let gain = self.gain(kernel, e)?;
        self.commit(kernel, e, gain);
        Ok(gain)
    }

    pub(crate) fn commit(&mut self, kernel: &SimilarityKernel, e: usize, gain: f64) {
        if !self.coverage.is_empty() {
            for (cov, &s) in self.coverage.iter_mut().zip(kernel.ground_row(e)) {
                *cov = cov.max(s);
            }
        }
        self.member[e] = true;
        self.chosen.push(e);
        self.gains.push(gain);
        self.objective_value += gain;
    }
}

fn expect_objective(state: &SelectionState, objective: Objective) -> Result<()> {
    if state.objective == objective {
        Ok(())
    } else {
        Err(Error::NotAnObjective)
    }
}

/// FLMI marginal gain from memoized coverage.
pub fn flmi_gain(state: &SelectionState, kernel: &SimilarityKernel, e: usize) -> Result<f64> {
    expect_objective(state, Objective::Flmi)?;
    state.gain(kernel, e)
}

/// GCMI marginal gain; independent of the current selection.
pub fn gcmi_gain(state: &SelectionState, kernel: &SimilarityKernel, e: usize) -> Result<f64> {
    expect_objective(state, Objective::Gcmi)?;
    state.gain(kernel, e)
}

pub fn facility_location_gain(state: &SelectionState, kernel: &SimilarityKernel, e: usize) -> Result<f64> {
    expect_objective(state, Objective::FacilityLocation)?;
    state.gain(kernel, e)
}

/// A set function over the elements `0..ground_size()`.
pub trait SetFunction {
    fn ground_size(&self) -> usize;

    fn evaluate(&self, set: &[usize]) -> Result<f64>;
}

/// `f(A) = Σ_i max_{j∈A} s_ij` over a square kernel.
#[derive(Debug, Clone, Copy)]
pub struct FacilityLocation<'k> {
    kernel: &'k SquareKernel,
}

impl<'k> FacilityLocation<'k> {
    pub fn new(kernel: &'k SquareKernel) -> Result<Self> {
        if !kernel.transform().is_nonnegative() {
            return Err(Error::NonNegativeKernelRequired);
        }
        Ok(Self { kernel })
    }
}

impl SetFunction for FacilityLocation<'_> {
    fn ground_size(&self) -> usize {
        self.kernel.size()
    }

    fn evaluate(&self, set: &[usize]) -> Result<f64> {
        check_set(set, self.kernel.size())?;
        let mut total = 0.0;
        for i in 0..self.kernel.size() {
            let row = self.kernel.row(i);
            total += set.iter().map(|&j| row[j]).fold(0.0, f64::max);
        }
        Ok(total)
    }
}

/// `f(A) = Σ_{i∈V} Σ_{j∈A} s_ij − λ·Σ_{i∈A} Σ_{j∈A} s_ij` over a square kernel.
#[derive(Debug, Clone, Copy)]
pub struct GraphCut<'k> {
    kernel: &'k SquareKernel,
    lambda: f64,
}

impl<'k> GraphCut<'k> {
    pub fn new(kernel: &'k SquareKernel, lambda: f64) -> Result<Self> {
        check_param("lambda", lambda)?;
        Ok(Self { kernel, lambda })
    }
}

impl SetFunction for GraphCut<'_> {
    fn ground_size(&self) -> usize {
        self.kernel.size()
    }

    fn evaluate(&self, set: &[usize]) -> Result<f64> {
        check_set(set, self.kernel.size())?;
        let mut cut = 0.0;
        for i in 0..self.kernel.size() {
            let row = self.kernel.row(i);
            cut += set.iter().map(|&j| row[j]).sum::<f64>();
        }
        let mut within = 0.0;
        for &i in set {
            let row = self.kernel.row(i);
            within += set.iter().map(|&j| row[j]).sum::<f64>();
        }
        Ok(cut - self.lambda * within)
    }
}

/// `I_f(A; B) = f(A) + f(B) − f(A ∪ B)` for disjoint `A` and `B`.
pub fn smi_identity<F: SetFunction + ?Sized>(base: &F, a: &[usize], b: &[usize]) -> Result<f64> {
    let size = base.ground_size();
    check_set(a, size)?;
    check_set(b, size)?;
    let mut in_a = vec![false; size];
    for &i in a {
        in_a[i] = true;
    }
    if let Some(&shared) = b.iter().find(|&&j| in_a[j]) {
        return Err(Error::OverlappingSets(shared));
    }
    let union: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(base.evaluate(a)? + base.evaluate(b)? - base.evaluate(&union)?)
}
