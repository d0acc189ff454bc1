//! Consistency sweeps: simulate, detect, score against the truth.

use std::io::{Read, Write};
use std::time::Instant;

use anyhow::{bail, Context};
use blockmod::{
    block_counts, derive_seed, generate_sbm, metrics, q_bayes, strong_recovery, tabu_search,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// One simulated graph and its detection outcome. Rows are reproducible
/// from `seed` alone: it seeds the graph, and `derive_seed(seed, [1])`
/// seeds the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub rho: f64,
    pub expected_degree: f64,
    pub replication: usize,
    pub seed: u64,
    pub objective: String,
    pub k: usize,
    /// Misclassified fraction after the best relabelling.
    pub misclassification: f64,
    pub strong_recovery: bool,
    pub qb_truth: f64,
    pub qb_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTiming {
    pub n: usize,
    pub rho: f64,
    pub replication: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub timings: Vec<SweepTiming>,
}

pub fn replication_seed(master: u64, n: usize, rho: f64, replication: usize) -> u64 {
    derive_seed(master, &[n as u64, rho.to_bits(), replication as u64])
}

pub fn run_sweep(cfg: &ExperimentConfig) -> anyhow::Result<SweepOutput> {
    cfg.sweep.validate()?;
    let mut jobs = Vec::new();
    for &n in &cfg.sweep.n {
        for (rho, params) in cfg.sweep.grid(n)? {
            if let Some(k) = cfg.k {
                if k != params.k() {
                    bail!(
                        "sweeps detect with the true class count {}, got k = {k}",
                        params.k()
                    );
                }
            }
            for rep in 0..cfg.sweep.replications {
                jobs.push((n, rho, params.clone(), rep));
            }
        }
    }
    let kind = cfg.kind();
    let results: Vec<anyhow::Result<(SweepRecord, SweepTiming)>> = jobs
        .into_par_iter()
        .map(|(n, rho, params, rep)| {
            let start = Instant::now();
            let seed = replication_seed(cfg.seed, n, rho, rep);
            let (graph, truth) = generate_sbm(&params, n, seed)?;
            let k = params.k();
            let found = tabu_search(
                &graph,
                k,
                &kind,
                &cfg.tabu_with_seed(derive_seed(seed, &[1])),
            )?;
            let misclassification = metrics::misclassification(&found.best, &truth, true)?;
            let record = SweepRecord {
                n,
                rho,
                expected_degree: params.expected_degree(n),
                replication: rep,
                seed,
                objective: kind.name().to_string(),
                k,
                misclassification,
                strong_recovery: strong_recovery(&found.best, &truth)?,
                qb_truth: q_bayes(&block_counts(&graph, &truth)?, &cfg.prior),
                qb_estimate: q_bayes(&block_counts(&graph, &found.best)?, &cfg.prior),
            };
            let timing = SweepTiming {
                n,
                rho,
                replication: rep,
                seconds: start.elapsed().as_secs_f64(),
            };
            Ok((record, timing))
        })
        .collect();
    let mut records = Vec::with_capacity(results.len());
    let mut timings = Vec::with_capacity(results.len());
    for r in results {
        let (rec, t) = r?;
        records.push(rec);
        timings.push(t);
    }
    Ok(SweepOutput { records, timings })
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> anyhow::Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rd.deserialize().enumerate() {
        out.push(row.with_context(|| format!("malformed sweep row {}", i + 1))?);
    }
    Ok(out)
}

/// Aggregate over the replications of one `(n, ρ)` grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub n: usize,
    pub rho: f64,
    pub expected_degree: f64,
    pub replications: usize,
    pub recovery_rate: f64,
    pub mean_misclassification: f64,
}

/// Groups in order of first appearance.
pub fn summarize(records: &[SweepRecord]) -> Vec<GroupSummary> {
    let mut groups: Vec<(usize, u64, Vec<&SweepRecord>)> = Vec::new();
    for r in records {
        let key = (r.n, r.rho.to_bits());
        match groups.iter_mut().find(|g| (g.0, g.1) == key) {
            Some(g) => g.2.push(r),
            None => groups.push((key.0, key.1, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(n, rho, rows)| {
            let m = rows.len() as f64;
            GroupSummary {
                n,
                rho: f64::from_bits(rho),
                expected_degree: rows[0].expected_degree,
                replications: rows.len(),
                recovery_rate: rows.iter().filter(|r| r.strong_recovery).count() as f64 / m,
                mean_misclassification: rows.iter().map(|r| r.misclassification).sum::<f64>() / m,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepConfig;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.tabu.restarts = 3;
        cfg.sweep = SweepConfig {
            n: vec![12, 16],
            replications: 2,
            ..SweepConfig::default()
        };
        cfg
    }

    #[test]
    fn records_are_ordered_and_reproducible() {
        let out = run_sweep(&small()).unwrap();
        let keys: Vec<_> = out.records.iter().map(|r| (r.n, r.replication)).collect();
        assert_eq!(keys, vec![(12, 0), (12, 1), (16, 0), (16, 1)]);
        assert_eq!(out.records, run_sweep(&small()).unwrap().records);
        for r in &out.records {
            assert!((0.0..=1.0).contains(&r.misclassification));
            assert_eq!(r.seed, replication_seed(1, r.n, 1.0, r.replication));
        }
    }

    #[test]
    fn csv_round_trip_and_summary() {
        let out = run_sweep(&small()).unwrap();
        let mut buf = Vec::new();
        write_csv(&out.records, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, out.records);
        let s = summarize(&back);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].replications, 2);
        let header = String::from_utf8(buf).unwrap();
        assert!(header.starts_with(
            "n,rho,expected_degree,replication,seed,objective,k,misclassification,strong_recovery,qb_truth,qb_estimate\n"
        ));
    }

    #[test]
    fn mismatched_k_is_rejected() {
        let mut cfg = small();
        cfg.k = Some(3);
        assert!(run_sweep(&cfg).is_err());
    }
}
