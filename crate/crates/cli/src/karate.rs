//! Partitions of Zachary's karate club under both objectives.

use anyhow::Context;
use blockmod::io::karate_club;
use blockmod::metrics::matched_mismatch_count;
use blockmod::{
    block_counts, derive_seed, q_bayes, q_likelihood, tabu_search, Graph, Labelling, ModularityKind,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, Objective};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub class: usize,
    pub size: usize,
    pub mean_degree: f64,
    pub max_degree: usize,
    /// 1-based node ids.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KaratePartition {
    pub k: usize,
    pub objective: String,
    /// 1-based class of each node, in node order.
    pub labels: Vec<usize>,
    pub q_bayes: f64,
    pub q_likelihood: f64,
    pub classes: Vec<ClassSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KarateCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KarateReport {
    pub seed: u64,
    pub restarts: usize,
    pub nodes: usize,
    pub edges: usize,
    pub partitions: Vec<KaratePartition>,
    pub checks: Vec<KarateCheck>,
    /// `Q_ML` of the four-class likelihood partition minus that of the
    /// two-class one. Recorded only: the search is heuristic.
    pub ml_gain_k4_over_k2: Option<f64>,
}

impl KarateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn partition(&self, k: usize, objective: &str) -> Option<&KaratePartition> {
        self.partitions
            .iter()
            .find(|p| p.k == k && p.objective == objective)
    }
}

fn summarize(graph: &Graph, e: &Labelling) -> Vec<ClassSummary> {
    (0..e.k())
        .map(|a| {
            let members: Vec<usize> = (0..e.n()).filter(|&i| e.get(i) == a).collect();
            let degrees: Vec<usize> = members.iter().map(|&i| graph.degree(i)).collect();
            ClassSummary {
                class: a + 1,
                size: members.len(),
                mean_degree: if members.is_empty() {
                    0.0
                } else {
                    degrees.iter().sum::<usize>() as f64 / members.len() as f64
                },
                max_degree: degrees.iter().copied().max().unwrap_or(0),
                members: members.iter().map(|&i| i + 1).collect(),
            }
        })
        .collect()
}

/// The two nodes of largest degree, lowest index first on ties.
pub fn top_two_by_degree(graph: &Graph) -> (usize, usize) {
    let mut order: Vec<usize> = (0..graph.n()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(graph.degree(i)), i));
    (order[0], order[1])
}

pub fn run_karate(cfg: &ExperimentConfig) -> anyhow::Result<KarateReport> {
    let graph = karate_club();
    let kinds = [
        Objective::Bayes.kind(cfg.prior),
        Objective::Ml.kind(cfg.prior),
    ];
    let mut partitions = Vec::new();
    let mut found: Vec<(usize, ModularityKind, Labelling)> = Vec::new();
    for &k in &cfg.karate.ks {
        for kind in kinds {
            // Same seed for both objectives so they see the same starts.
            let tabu = cfg.tabu_with_seed(derive_seed(cfg.seed, &[k as u64]));
            let r = tabu_search(&graph, k, &kind, &tabu)
                .with_context(|| format!("tabu search for k = {k}"))?;
            let counts = block_counts(&graph, &r.best)?;
            partitions.push(KaratePartition {
                k,
                objective: kind.name().to_string(),
                labels: r.best.to_one_based(),
                q_bayes: q_bayes(&counts, &cfg.prior),
                q_likelihood: q_likelihood(&counts),
                classes: summarize(&graph, &r.best),
            });
            found.push((k, kind, r.best));
        }
    }

    let mut checks = Vec::new();
    let get = |k: usize, name: &str| {
        found
            .iter()
            .find(|(kk, kind, _)| *kk == k && kind.name() == name)
            .map(|(_, _, e)| e)
    };
    if let (Some(b), Some(m)) = (get(2, "bayes"), get(2, "ml")) {
        let (hub1, hub2) = top_two_by_degree(&graph);
        checks.push(KarateCheck {
            name: "hubs_share_class".into(),
            passed: b.get(hub1) == b.get(hub2),
            detail: format!(
                "nodes {} (degree {}) and {} (degree {}) in classes {} and {}",
                hub1 + 1,
                graph.degree(hub1),
                hub2 + 1,
                graph.degree(hub2),
                b.get(hub1) + 1,
                b.get(hub2) + 1
            ),
        });
        let diff = matched_mismatch_count(b, m)?;
        checks.push(KarateCheck {
            name: "bayes_ml_agree".into(),
            passed: diff <= 1,
            detail: format!("partitions differ on {diff} of {} nodes", graph.n()),
        });
    }
    let ml_gain_k4_over_k2 = match (get(4, "ml"), get(2, "ml")) {
        (Some(four), Some(two)) => Some(
            q_likelihood(&block_counts(&graph, four)?) - q_likelihood(&block_counts(&graph, two)?),
        ),
        _ => None,
    };
    Ok(KarateReport {
        ml_gain_k4_over_k2,
        seed: cfg.seed,
        restarts: cfg.tabu.restarts,
        nodes: graph.n(),
        edges: graph.edge_count(),
        partitions,
        checks,
    })
}
