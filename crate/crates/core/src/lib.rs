//! Community detection in the stochastic block model by maximizing the
//! Bayesian modularity (the posterior mode of the labelling), with the
//! likelihood modularity as a comparator.
//!
//! * [`sbm`]: parameters, graphs, labellings, block counts, simulation.
//! * [`modularity`]: the objectives and their incremental [`Scorer`].
//! * [`optimize`]: tabu search, greedy ascent and exhaustive search.
//! * [`metrics`]: coupling matrices and permutation-matched error rates.
//! * [`theory`]: population functionals and numerical checks.
//! * [`io`]: edge-list reading and writing, and the karate club network.

pub mod error;
pub mod io;
pub mod metrics;
pub mod modularity;
pub mod optimize;
pub mod rng;
pub mod sbm;
pub mod special;
pub mod theory;

pub use error::{Error, Result};
pub use metrics::{
    best_permutation, coupling_matrix, misclassification, strong_recovery, CouplingMatrix,
    PermutationMatch,
};
pub use modularity::{
    ll_tilde, q_bayes, q_likelihood, q_prior, ModularityKind, PriorHyper, Scorer,
};
pub use optimize::{
    exhaustive_map, exhaustive_map_with_budget, greedy_ascent, tabu_search, tabu_search_from,
    SearchResult, TabuConfig,
};
pub use rng::{derive_seed, rng_from_seed, BlockRng};
pub use sbm::{
    block_counts, expected_counts, generate_sbm, BlockCounts, Graph, Labelling, SbmParams,
};
