//! Community detection on a user-supplied edge list.

use std::io::{BufRead, Write};

use blockmod::io::{load_edge_list, EdgeListOptions};
use blockmod::{tabu_search, Graph, Labelling, ModularityKind, TabuConfig};
use serde::Serialize;

/// Detection summary written next to the assignment file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectSummary {
    pub objective: String,
    pub value: f64,
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub nodes: usize,
    pub edges: usize,
    pub runtime_seconds: f64,
}

pub fn read_graph<R: BufRead>(source: R, zero_indexed: bool) -> anyhow::Result<Graph> {
    let opts = EdgeListOptions {
        one_indexed: !zero_indexed,
        nodes: None,
    };
    Ok(load_edge_list(source, &opts)?)
}

pub fn detect(
    graph: &Graph,
    k: usize,
    kind: &ModularityKind,
    tabu: &TabuConfig,
) -> anyhow::Result<(Labelling, f64)> {
    let r = tabu_search(graph, k, kind, tabu)?;
    Ok((r.best, r.best_value))
}

/// `node class` per line, both 1-based unless `zero_indexed` nodes were read.
pub fn write_assignment<W: Write>(
    e: &Labelling,
    zero_indexed: bool,
    mut out: W,
) -> anyhow::Result<()> {
    let offset = usize::from(!zero_indexed);
    for (i, c) in e.to_one_based().into_iter().enumerate() {
        writeln!(out, "{} {c}", i + offset)?;
    }
    out.flush()?;
    Ok(())
}
