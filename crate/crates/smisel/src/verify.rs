//! User-facing self-test: samples random instances and checks the algebraic
//! properties the selection engine relies on.

use std::fmt;

use smisel_core::kernel::build_extended_kernel;
use smisel_core::maximizer::{brute_force_select, greedy_select, Budget, GreedyMode};
use smisel_core::rng::{mix_seed, SeededRng};
use smisel_core::smi::{
    flmi_value, objective_value, smi_identity, FacilityLocation, GraphCut, Objective, SelectionState,
    SetFunction, SmiConfig,
};
use smisel_core::{build_kernel, synth, KernelTransform, SimilarityKernel};

pub const GAIN_TOLERANCE: f64 = 1e-9;
pub const GREEDY_RATIO: f64 = 1.0 - 1.0 / std::f64::consts::E;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub sizes: Vec<usize>,
    pub budgets: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub dim: usize,
    /// Random (A ⊆ B, e) triples drawn per trial and objective.
    pub triples_per_trial: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            sizes: vec![8, 10, 12],
            budgets: vec![2, 3, 4],
            trials: 200,
            seed: 0,
            dim: 8,
            triples_per_trial: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    pub instance_seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub checks: usize,
    pub counterexample: Option<Counterexample>,
}

impl PropertyResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: 0,
            counterexample: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    fn check(&mut self, ok: bool, trial: usize, seed: u64, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(Counterexample {
                trial,
                instance_seed: seed,
                detail: detail(),
            });
        }
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "PASS {} ({} checks)", self.name, self.checks),
            Some(c) => write!(
                f,
                "FAIL {} (trial {}, instance seed {}): {}",
                self.name, c.trial, c.instance_seed, c.detail
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub results: Vec<PropertyResult>,
    /// No trials were run; every property passes trivially.
    pub vacuous: bool,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }
}

struct Suite {
    submodularity: PropertyResult,
    monotonicity: PropertyResult,
    gcmi_independence: PropertyResult,
    incremental: PropertyResult,
    saturation: PropertyResult,
    greedy_bound: PropertyResult,
    lazy_naive: PropertyResult,
    gcmi_top_k: PropertyResult,
    identity: PropertyResult,
}

impl Suite {
    fn new() -> Self {
        Self {
            submodularity: PropertyResult::new("submodularity"),
            monotonicity: PropertyResult::new("monotonicity"),
            gcmi_independence: PropertyResult::new("gcmi-state-independence"),
            incremental: PropertyResult::new("incremental-vs-recompute"),
            saturation: PropertyResult::new("flmi-saturation-bound"),
            greedy_bound: PropertyResult::new("greedy-bound"),
            lazy_naive: PropertyResult::new("lazy-naive-equivalence"),
            gcmi_top_k: PropertyResult::new("gcmi-top-k"),
            identity: PropertyResult::new("smi-identity-empty"),
        }
    }

    fn into_results(self) -> Vec<PropertyResult> {
        vec![
            self.submodularity,
            self.monotonicity,
            self.gcmi_independence,
            self.incremental,
            self.saturation,
            self.greedy_bound,
            self.lazy_naive,
            self.gcmi_top_k,
            self.identity,
        ]
    }
}

/// Draws `A ⊆ B ⊊ V` and `e ∉ B`, with `A` and `B` in random insertion order.
pub fn nested_triple(rng: &mut SeededRng, n: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let e = rng.below(n as u64) as usize;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in (0..n).filter(|&i| i != e) {
        match rng.below(3) {
            0 => {
                a.push(i);
                b.push(i);
            }
            1 => b.push(i),
            _ => {}
        }
    }
    for set in [&mut a, &mut b] {
        for i in (1..set.len()).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            set.swap(i, j);
        }
    }
    (a, b, e)
}

fn state_with(kernel: &SimilarityKernel, config: &SmiConfig, set: &[usize]) -> smisel_core::Result<SelectionState> {
    let mut state = SelectionState::new(kernel, config)?;
    for &x in set {
        state.insert(kernel, x)?;
    }
    Ok(state)
}

/// Top-`k` frames by `Σ_q s_iq`, ties by index.
pub fn top_k_by_relevance(kernel: &SimilarityKernel, k: usize) -> Vec<usize> {
    let relevance: Vec<f64> = (0..kernel.n()).map(|i| kernel.query_row(i).iter().sum()).collect();
    let mut order: Vec<usize> = (0..kernel.n()).collect();
    order.sort_by(|&a, &b| relevance[b].total_cmp(&relevance[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

pub fn run_verify(opts: &VerifyOptions) -> smisel_core::Result<VerifyOutcome> {
    let mut suite = Suite::new();
    if opts.sizes.is_empty() || opts.budgets.is_empty() {
        return Err(smisel_core::Error::InvalidParameter {
            name: "sizes/budgets",
            value: 0.0,
        });
    }
    for trial in 0..opts.trials {
        let seed = mix_seed(opts.seed, trial as u64);
        let n = opts.sizes[trial % opts.sizes.len()];
        let k = opts.budgets[(trial / opts.sizes.len()) % opts.budgets.len()];
        let q = 1 + trial % 3;
        run_trial(&mut suite, opts, trial, seed, n, k, q)?;
    }
    Ok(VerifyOutcome {
        results: suite.into_results(),
        vacuous: opts.trials == 0,
    })
}

fn run_trial(
    suite: &mut Suite,
    opts: &VerifyOptions,
    trial: usize,
    seed: u64,
    n: usize,
    k: usize,
    q: usize,
) -> smisel_core::Result<()> {
    let (frames, queries) = synth::random_embeddings(seed, n, q, opts.dim)?;
    let kernel = build_kernel(&frames, &queries, KernelTransform::ClampZero)?;
    let mut rng = SeededRng::new(seed ^ 0x5eed);
    let eta = 0.5 + rng.unit_f64();
    let flmi = SmiConfig::new(Objective::Flmi).with_eta(eta);
    let fl = SmiConfig::new(Objective::FacilityLocation);
    let gcmi = SmiConfig::new(Objective::Gcmi);

    for _ in 0..opts.triples_per_trial {
        let (a, b, e) = nested_triple(&mut rng, n);
        for config in [&flmi, &fl] {
            let ga = state_with(&kernel, config, &a)?.gain(&kernel, e)?;
            let gb = state_with(&kernel, config, &b)?.gain(&kernel, e)?;
            suite.submodularity.check(ga >= gb - GAIN_TOLERANCE, trial, seed, || {
                format!("{}: gain(e={e}|A={a:?}) = {ga} < gain(e|B={b:?}) = {gb}", config.objective)
            });
            suite.monotonicity.check(ga >= -GAIN_TOLERANCE && gb >= -GAIN_TOLERANCE, trial, seed, || {
                format!("{}: negative gain {ga} / {gb} for e={e}", config.objective)
            });
        }
        let ga = state_with(&kernel, &gcmi, &a)?.gain(&kernel, e)?;
        let gb = state_with(&kernel, &gcmi, &b)?.gain(&kernel, e)?;
        suite.gcmi_independence.check(ga == gb, trial, seed, || {
            format!("gcmi gain of {e} differs: {ga} vs {gb}")
        });

        for config in [&flmi, &fl, &gcmi] {
            let state = state_with(&kernel, config, &b)?;
            let gain = state.gain(&kernel, e)?;
            let mut with_e = b.clone();
            with_e.push(e);
            let before = objective_value(&kernel, config, &b)?;
            let after = objective_value(&kernel, config, &with_e)?;
            suite.incremental.check((gain - (after - before)).abs() <= GAIN_TOLERANCE, trial, seed, || {
                format!("{}: memoized gain {gain} vs recomputed {}", config.objective, after - before)
            });
            suite.incremental.check((state.objective_value() - before).abs() <= 1e-6, trial, seed, || {
                format!("{}: sum of gains {} vs value {before}", config.objective, state.objective_value())
            });
        }

        let caps: f64 = state_with(&kernel, &flmi, &[])?.query_cap().iter().sum();
        let value = flmi_value(&kernel, &b, eta)?;
        suite.saturation.check(value <= caps + GAIN_TOLERANCE, trial, seed, || {
            format!("flmi({b:?}) = {value} exceeds Σ query caps {caps}")
        });
    }
    let empty = flmi_value(&kernel, &[], eta)?;
    suite.saturation.check(empty == 0.0, trial, seed, || format!("flmi(∅) = {empty}"));
    let all: Vec<usize> = (0..n).collect();
    let unit_eta = eta.min(1.0);
    let caps: f64 = (0..n).map(|i| unit_eta * kernel.max_query_similarity(i)).sum();
    let full = flmi_value(&kernel, &all, unit_eta)?;
    suite.saturation.check((full - caps).abs() <= GAIN_TOLERANCE, trial, seed, || {
        format!("flmi(V) = {full} with eta {unit_eta} does not reach Σ caps {caps}")
    });

    let budget = Budget::new(k)?;
    let base = SmiConfig::new(Objective::Flmi);
    let (greedy, _) = greedy_select(&kernel, &base, budget, GreedyMode::Lazy)?;
    let (optimum, best) = brute_force_select(&kernel, &base, budget)?;
    suite.greedy_bound.check(
        greedy.objective_value() >= GREEDY_RATIO * optimum - GAIN_TOLERANCE,
        trial,
        seed,
        || format!("greedy {:?} = {} < (1-1/e) x optimum {best:?} = {optimum}", greedy.chosen(), greedy.objective_value()),
    );

    for config in [&base, &fl, &gcmi] {
        let (lazy, _) = greedy_select(&kernel, config, budget, GreedyMode::Lazy)?;
        let (naive, _) = greedy_select(&kernel, config, budget, GreedyMode::Naive)?;
        suite.lazy_naive.check(lazy.chosen() == naive.chosen(), trial, seed, || {
            format!("{}: lazy {:?} vs naive {:?}", config.objective, lazy.chosen(), naive.chosen())
        });
    }

    let (selected, _) = greedy_select(&kernel, &gcmi, budget, GreedyMode::Lazy)?;
    let expected = top_k_by_relevance(&kernel, k);
    suite.gcmi_top_k.check(selected.chosen() == expected.as_slice(), trial, seed, || {
        format!("gcmi greedy {:?} vs top-k {expected:?}", selected.chosen())
    });

    let extended = build_extended_kernel(&frames, &queries, KernelTransform::ClampZero)?;
    let frame_set: Vec<usize> = (0..n).filter(|_| rng.below(2) == 1).collect();
    let query_set: Vec<usize> = (n..n + q).collect();
    let bases: [(&str, Box<dyn SetFunction>); 2] = [
        ("facility location", Box::new(FacilityLocation::new(&extended)?)),
        ("graph cut", Box::new(GraphCut::new(&extended, 1.0)?)),
    ];
    for (name, f) in &bases {
        for (a, b) in [(&[][..], &query_set[..]), (&frame_set[..], &[][..])] {
            let value = smi_identity(f.as_ref(), a, b)?;
            suite.identity.check(value.abs() <= GAIN_TOLERANCE, trial, seed, || {
                format!("{name}: I(A={a:?}; B={b:?}) = {value}")
            });
        }
    }
    Ok(())
}
