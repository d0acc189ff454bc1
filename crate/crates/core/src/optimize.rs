//! MAP search over labellings.
//!
//! All searches score moves with [`Scorer::move_delta`] against a per-node
//! table of neighbor counts per class, so one candidate move costs `O(K)`
//! and applying it costs `O(degree + K)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modularity::{ModularityKind, Scorer};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sbm::{block_counts, BlockCounts, Graph, Labelling};

/// Default cap on `K^n` for [`exhaustive_map`].
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 2_000_000;

const REL_TOL: f64 = 1e-12;

/// `new` beats `old` by more than rounding noise.
#[inline]
fn improves(new: f64, old: f64) -> bool {
    new > old + REL_TOL * old.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TabuConfig {
    /// Iterations a moved node stays tabu. Capped at `⌊n/2⌋`.
    pub tenure: usize,
    /// Iteration cap per restart; `None` means `200·n`.
    pub max_iters: Option<usize>,
    /// Iterations without improvement before a restart stops; `None` means
    /// `20·n`.
    pub patience: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for TabuConfig {
    fn default() -> Self {
        Self {
            tenure: 10,
            max_iters: None,
            patience: None,
            restarts: 50,
            seed: 0,
        }
    }
}

impl TabuConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParams("restarts must be at least 1".into()));
        }
        Ok(())
    }

    fn limits(&self, n: usize) -> (usize, usize, usize) {
        (
            self.tenure.min(n / 2),
            self.max_iters.unwrap_or(200 * n),
            self.patience.unwrap_or(20 * n),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Labelling,
    /// Objective of `best`, recomputed from scratch.
    pub best_value: f64,
    /// [`tabu_search`]: best value of each restart, in restart order.
    /// [`tabu_search_from`]: value after each iteration.
    /// [`greedy_ascent`]: value after each accepted move, starting with the
    /// start value. [`exhaustive_map`]: empty.
    pub trace: Vec<f64>,
    /// Moves made, or labellings visited for [`exhaustive_map`].
    pub iterations: u64,
}

/// Mutable search state: labelling, counts and the `n×K` neighbor table.
struct State<'g> {
    graph: &'g Graph,
    e: Labelling,
    counts: BlockCounts,
    links: Vec<u64>,
    k: usize,
}

impl<'g> State<'g> {
    fn new(graph: &'g Graph, e: Labelling) -> Result<Self> {
        let counts = block_counts(graph, &e)?;
        let k = e.k();
        let mut links = vec![0u64; graph.n() * k];
        for i in 0..graph.n() {
            for &j in graph.neighbors(i) {
                links[i * k + e.get(j as usize)] += 1;
            }
        }
        Ok(Self {
            graph,
            e,
            counts,
            links,
            k,
        })
    }

    #[inline]
    fn node_links(&self, i: usize) -> &[u64] {
        &self.links[i * self.k..(i + 1) * self.k]
    }

    #[inline]
    fn delta(&self, scorer: &Scorer, i: usize, to: usize) -> f64 {
        scorer.move_delta(&self.counts, self.e.get(i), to, self.node_links(i))
    }

    fn apply(&mut self, i: usize, to: usize) {
        let from = self.e.get(i);
        if from == to {
            return;
        }
        let k = self.k;
        self.counts
            .shift_node(from, to, &self.links[i * k..(i + 1) * k]);
        for &j in self.graph.neighbors(i) {
            let j = j as usize;
            self.links[j * k + from] -= 1;
            self.links[j * k + to] += 1;
        }
        self.e.set(i, to);
    }

    /// Best move by delta over nodes admitted by `allowed`, ties to the
    /// lowest node then lowest label.
    fn best_move(
        &self,
        scorer: &Scorer,
        mut allowed: impl FnMut(usize, f64) -> bool,
    ) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.graph.n() {
            let from = self.e.get(i);
            for to in 0..self.k {
                if to == from {
                    continue;
                }
                let d = self.delta(scorer, i, to);
                if !allowed(i, d) {
                    continue;
                }
                if best.is_none_or(|(_, _, bd)| d > bd) {
                    best = Some((i, to, d));
                }
            }
        }
        best
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParams("K must be at least 1".into()));
    }
    Ok(())
}

fn finish(
    graph: &Graph,
    objective: &ModularityKind,
    best: Labelling,
    trace: Vec<f64>,
    iterations: u64,
) -> Result<SearchResult> {
    let best_value = objective.evaluate(&block_counts(graph, &best)?);
    Ok(SearchResult {
        best,
        best_value,
        trace,
        iterations,
    })
}

/// One tabu run from `start`. The trace holds the objective after every
/// iteration.
pub fn tabu_search_from(
    graph: &Graph,
    objective: &ModularityKind,
    start: Labelling,
    config: &TabuConfig,
) -> Result<SearchResult> {
    let scorer = Scorer::new(*objective, graph.n());
    let (best, trace, iters) = tabu_run(graph, &scorer, start, config, true)?;
    finish(graph, objective, best, trace, iters)
}

fn tabu_run(
    graph: &Graph,
    scorer: &Scorer,
    start: Labelling,
    config: &TabuConfig,
    record: bool,
) -> Result<(Labelling, Vec<f64>, u64)> {
    let n = graph.n();
    let (tenure, max_iters, patience) = config.limits(n);
    let mut state = State::new(graph, start)?;
    let mut current = scorer.raw(&state.counts);
    let mut best_raw = current;
    let mut best = state.e.clone();
    let mut tabu_until = vec![0usize; n];
    let mut trace = Vec::new();
    let mut last_improvement = 0usize;
    let mut iter = 0usize;
    while iter < max_iters && iter - last_improvement < patience {
        let mv = state.best_move(scorer, |i, d| {
            iter >= tabu_until[i] || improves(current + d, best_raw)
        });
        let Some((i, to, d)) = mv else { break };
        state.apply(i, to);
        current += d;
        iter += 1;
        tabu_until[i] = iter + tenure;
        if record {
            trace.push(scorer.scale(current));
        }
        if improves(current, best_raw) {
            // Resynchronise to avoid drift in the running sum.
            current = scorer.raw(&state.counts);
            best_raw = current;
            best.clone_from(&state.e);
            last_improvement = iter;
        }
    }
    Ok((best, trace, iter as u64))
}

/// Tabu search with `config.restarts` random starts, run in parallel.
///
/// Restart `r` starts from a uniformly random labelling seeded by
/// `derive_seed(config.seed, [r])`, so the restart pool of a larger run
/// extends that of a smaller one. The overall best is the highest value,
/// lowest restart index on ties.
pub fn tabu_search(
    graph: &Graph,
    k: usize,
    objective: &ModularityKind,
    config: &TabuConfig,
) -> Result<SearchResult> {
    check_k(k)?;
    config.validate()?;
    let n = graph.n();
    if k == 1 || n == 0 {
        let best = Labelling::uniform(n, k)?;
        let value = objective.evaluate(&block_counts(graph, &best)?);
        return finish(graph, objective, best, vec![value], 0);
    }
    let scorer = Scorer::new(*objective, n);
    let runs: Vec<Result<(Labelling, f64, u64)>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(config.seed, &[r as u64]));
            let start = Labelling::random(n, k, &mut rng)?;
            let (best, _, iters) = tabu_run(graph, &scorer, start, config, false)?;
            let value = objective.evaluate(&block_counts(graph, &best)?);
            Ok((best, value, iters))
        })
        .collect();

    let mut trace = Vec::with_capacity(runs.len());
    let mut iterations = 0;
    let mut winner: Option<(Labelling, f64)> = None;
    for run in runs {
        let (lab, value, iters) = run?;
        trace.push(value);
        iterations += iters;
        if winner.as_ref().is_none_or(|(_, v)| value > *v) {
            winner = Some((lab, value));
        }
    }
    let (best, best_value) = winner.expect("at least one restart");
    Ok(SearchResult {
        best,
        best_value,
        trace,
        iterations,
    })
}

/// Exact maximizer over all `K^n` labellings, with the default budget.
pub fn exhaustive_map(graph: &Graph, k: usize, objective: &ModularityKind) -> Result<SearchResult> {
    exhaustive_map_with_budget(graph, k, objective, DEFAULT_EXHAUSTIVE_BUDGET)
}

/// Exact maximizer over all `K^n` labellings.
///
/// Labellings are visited in lexicographic order (node 0 most significant)
/// and the first one within rounding of the maximum is kept. Refuses when
/// `K^n` exceeds `budget`.
pub fn exhaustive_map_with_budget(
    graph: &Graph,
    k: usize,
    objective: &ModularityKind,
    budget: u64,
) -> Result<SearchResult> {
    check_k(k)?;
    let n = graph.n();
    let size = (k as f64).powi(n as i32);
    if size > budget as f64 {
        return Err(Error::BudgetExceeded { size, budget });
    }
    let scorer = Scorer::new(*objective, n);
    let mut state = State::new(graph, Labelling::uniform(n, k)?)?;
    let mut best = state.e.clone();
    let mut best_raw = scorer.raw(&state.counts);
    let mut visited = 1u64;
    'outer: loop {
        // Odometer step: increment the last digit, carrying leftwards.
        let mut pos = n;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            let next = state.e.get(pos) + 1;
            if next < k {
                state.apply(pos, next);
                break;
            }
            state.apply(pos, 0);
        }
        visited += 1;
        let value = scorer.raw(&state.counts);
        if improves(value, best_raw) {
            best_raw = value;
            best.clone_from(&state.e);
        }
    }
    finish(graph, objective, best, Vec::new(), visited)
}

/// Steepest ascent over single-node moves from `start` until no move
/// improves the objective.
pub fn greedy_ascent(
    graph: &Graph,
    objective: &ModularityKind,
    start: Labelling,
) -> Result<SearchResult> {
    let scorer = Scorer::new(*objective, graph.n());
    let mut state = State::new(graph, start)?;
    let mut current = scorer.raw(&state.counts);
    let mut trace = vec![scorer.scale(current)];
    let mut moves = 0u64;
    while let Some((i, to, _)) = state.best_move(&scorer, |_, d| improves(current + d, current)) {
        state.apply(i, to);
        current = scorer.raw(&state.counts);
        trace.push(scorer.scale(current));
        moves += 1;
    }
    finish(graph, objective, state.e, trace, moves)
}
