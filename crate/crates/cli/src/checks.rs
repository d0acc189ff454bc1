//! Numerical checks behind the `theory` subcommand.
//!
//! Each check draws its randomness from `derive_seed(seed, [id])`, with a
//! fixed `id` per check, so reports do not depend on which checks run.

use blockmod::metrics::mismatch_count;
use blockmod::special::tau;
use blockmod::theory::{
    all_labellings, equivalence_gap, grad_g_zero, grad_g_zero_fd, maximality_check,
    planted_partition, MaximalityReport,
};
use blockmod::{
    coupling_matrix, derive_seed, expected_counts, generate_sbm, rng_from_seed, Labelling,
    PriorHyper, SbmParams,
};
use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{
    CheckName, ConditionalConfig, EquivalenceConfig, GradientConfig, HalfL1Config,
    MaximalityConfig, TheoryConfig,
};

/// Deliberate corruption used to confirm that a check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Perturbs `τ` inside the finite-difference side of the gradient check.
    Tau,
}

fn corrupted_tau(x: f64) -> f64 {
    tau(x) + 0.05 * x * x
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: CheckName,
    pub passed: bool,
    pub summary: String,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

pub fn run_theory(
    cfg: &TheoryConfig,
    seed: u64,
    prior: &PriorHyper,
    fault: Option<Fault>,
) -> anyhow::Result<TheoryReport> {
    let mut checks = Vec::new();
    for &name in &cfg.checks {
        let s = derive_seed(seed, &[name as u64]);
        let report = match name {
            CheckName::HalfL1 => half_l1(&cfg.half_l1, s)?,
            CheckName::ConditionalExpectation => {
                conditional_expectation(&cfg.conditional_expectation, s)?
            }
            CheckName::Maximality => maximality(&cfg.maximality, s)?,
            CheckName::Gradient => gradient(&cfg.gradient, s, fault)?,
            CheckName::Equivalence => equivalence(&cfg.equivalence, prior, s)?,
        };
        checks.push(report);
    }
    Ok(TheoryReport {
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Mismatch count equals half the L1 distance between `Diag(f(c))` and
/// `R(e, c)`, in exact units of `1/n`.
pub fn half_l1(cfg: &HalfL1Config, seed: u64) -> anyhow::Result<CheckReport> {
    let mut pairs = 0u64;
    let mut failures = 0u64;
    for n in 1..=cfg.max_n {
        for k in 1..=cfg.max_k {
            let all: Vec<Labelling> = all_labellings(n, k).collect();
            for e in &all {
                for c in &all {
                    pairs += 1;
                    let r = coupling_matrix(e, c)?;
                    if 2 * mismatch_count(e, c)? as u64 != r.l1_to_column_diagonal() {
                        failures += 1;
                    }
                }
            }
        }
    }
    let exhaustive = pairs;
    let mut rng = rng_from_seed(seed);
    for _ in 0..cfg.random_pairs {
        let k = rng.random_range(1..=cfg.max_k.max(1));
        let e = Labelling::random(cfg.random_n, k, &mut rng)?;
        let c = Labelling::random(cfg.random_n, k, &mut rng)?;
        pairs += 1;
        if 2 * mismatch_count(&e, &c)? as u64 != coupling_matrix(&e, &c)?.l1_to_column_diagonal() {
            failures += 1;
        }
    }
    Ok(CheckReport {
        name: CheckName::HalfL1,
        passed: failures == 0,
        summary: format!(
            "{failures} failures over {pairs} labelling pairs ({exhaustive} exhaustive)"
        ),
        details: json!({ "pairs": pairs, "exhaustive_pairs": exhaustive, "failures": failures }),
    })
}

/// `Σ_{i≠j} P_{z_i z_j}` over pairs with `e_i = a, e_j = b`.
pub fn expected_by_pairs(params: &SbmParams, e: &Labelling, z: &Labelling) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(e.k(), e.k());
    for i in 0..e.n() {
        for j in 0..e.n() {
            if i != j {
                out[(e.get(i), e.get(j))] += params.p()[(z.get(i), z.get(j))];
            }
        }
    }
    out
}

fn random_symmetric<R: Rng>(rng: &mut R, k: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v = rng.random_range(lo..=hi);
            p[(a, b)] = v;
            p[(b, a)] = v;
        }
    }
    p
}

fn random_simplex<R: Rng>(rng: &mut R, k: usize, floor: f64) -> Vec<f64> {
    let mut f: Vec<f64> = (0..k).map(|_| rng.random_range(floor..1.0)).collect();
    let s: f64 = f.iter().sum();
    f.iter_mut().for_each(|x| *x /= s);
    f
}

/// The matrix formula for `E(Õ(e) | Z)` against direct pair summation.
pub fn conditional_expectation(cfg: &ConditionalConfig, seed: u64) -> anyhow::Result<CheckReport> {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0f64;
    for _ in 0..cfg.instances {
        let n = rng.random_range(1..=cfg.max_n);
        let kz = rng.random_range(1..=cfg.max_k);
        let ke = rng.random_range(1..=cfg.max_k);
        let pi = random_simplex(&mut rng, kz, 0.05);
        let params = SbmParams::new(pi, random_symmetric(&mut rng, kz, 0.0, 1.0))?;
        let z = Labelling::random(n, kz, &mut rng)?;
        let e = Labelling::random(n, ke, &mut rng)?;
        let diff = (expected_counts(&params, &e, &z)? - expected_by_pairs(&params, &e, &z))
            .abs()
            .max();
        worst = worst.max(diff);
    }
    Ok(CheckReport {
        name: CheckName::ConditionalExpectation,
        passed: worst <= cfg.tolerance,
        summary: format!(
            "max abs difference {worst:.3e} over {} instances",
            cfg.instances
        ),
        details: json!({ "instances": cfg.instances, "max_abs_diff": worst, "tolerance": cfg.tolerance }),
    })
}

pub fn maximality(cfg: &MaximalityConfig, seed: u64) -> anyhow::Result<CheckReport> {
    let mut reports: Vec<MaximalityReport> = Vec::new();
    for &k in &cfg.ks {
        let p = planted_partition(k, cfg.on, cfg.off);
        let pi = vec![1.0 / k as f64; k];
        reports.push(maximality_check(
            &p,
            &pi,
            cfg.trials,
            derive_seed(seed, &[k as u64]),
        )?);
    }
    let passed = reports.iter().all(|r| r.passed());
    let summary = reports
        .iter()
        .map(|r| {
            format!(
                "K={}: max excess {:.2e}, min gap {:.2e} (H), {:.2e} (G)",
                r.k, r.h.max_excess, r.h.min_gap, r.g.min_gap
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(CheckReport {
        name: CheckName::Maximality,
        passed,
        summary,
        details: serde_json::to_value(&reports)?,
    })
}

/// Analytic derivative of `G(λ)` at zero against central differences.
pub fn gradient(
    cfg: &GradientConfig,
    seed: u64,
    fault: Option<Fault>,
) -> anyhow::Result<CheckReport> {
    let t: fn(f64) -> f64 = match fault {
        Some(Fault::Tau) => corrupted_tau,
        None => tau,
    };
    let mut rng = rng_from_seed(seed);
    let mut worst = 0f64;
    let mut coordinates = 0usize;
    for i in 0..cfg.configurations {
        let k = cfg.ks[i % cfg.ks.len()];
        let n = cfg.ns[(i / cfg.ks.len()) % cfg.ns.len()];
        let f = random_simplex(&mut rng, k, 0.2);
        let p = random_symmetric(&mut rng, k, cfg.p_min, cfg.p_max);
        for b in 0..k {
            for b2 in 0..k {
                if b == b2 {
                    continue;
                }
                let exact = grad_g_zero(&f, &p, n, b, b2)?;
                let fd = grad_g_zero_fd(&f, &p, n, b, b2, cfg.step, t)?;
                worst = worst.max((exact - fd).abs() / exact.abs());
                coordinates += 1;
            }
        }
    }
    Ok(CheckReport {
        name: CheckName::Gradient,
        passed: worst <= cfg.tolerance,
        summary: format!(
            "worst relative error {worst:.3e} over {coordinates} coordinates in {} configurations",
            cfg.configurations
        ),
        details: json!({
            "configurations": cfg.configurations,
            "coordinates": coordinates,
            "worst_relative_error": worst,
            "tolerance": cfg.tolerance,
            "fault_injected": fault.is_some(),
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapPoint {
    pub n: usize,
    pub exhaustive: bool,
    pub labellings: usize,
    pub max_gap: f64,
    /// `max_gap · n² / ln n`.
    pub statistic: f64,
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Scaled gap `max |Q_B − Q_ML − Q_P| · n² / ln n` across sizes: exhaustive
/// at small `n`, sampled labellings above.
pub fn equivalence(
    cfg: &EquivalenceConfig,
    prior: &PriorHyper,
    seed: u64,
) -> anyhow::Result<CheckReport> {
    let k = cfg.p.len();
    let base = DMatrix::from_fn(k, k, |a, b| cfg.p[a][b]);
    let params = SbmParams::new(cfg.pi.clone(), base)?;
    let mut points = Vec::new();
    let sizes = cfg
        .exhaustive_n
        .iter()
        .map(|&n| (n, true))
        .chain(cfg.sampled_n.iter().map(|&n| (n, false)));
    for (n, exhaustive) in sizes {
        let (graph, _) = generate_sbm(&params, n, derive_seed(seed, &[n as u64]))?;
        let labellings: Vec<Labelling> = if exhaustive {
            all_labellings(n, cfg.k).collect()
        } else {
            let mut rng = rng_from_seed(derive_seed(seed, &[n as u64, 1]));
            (0..cfg.samples)
                .map(|_| Labelling::random(n, cfg.k, &mut rng))
                .collect::<Result<_, _>>()?
        };
        let stats = equivalence_gap(&graph, prior, &labellings)?;
        let nf = n as f64;
        points.push(GapPoint {
            n,
            exhaustive,
            labellings: labellings.len(),
            max_gap: stats.max_gap,
            statistic: stats.max_gap * nf * nf / nf.ln(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.statistic.ln()).collect();
    let fitted = slope(&xs, &ys);
    let constant = points.iter().map(|p| p.statistic).fold(0.0, f64::max);
    Ok(CheckReport {
        name: CheckName::Equivalence,
        passed: fitted <= cfg.max_slope && constant.is_finite(),
        summary: format!(
            "log-log slope {fitted:.3} (limit {}), bound {constant:.3}",
            cfg.max_slope
        ),
        details: json!({ "points": points, "slope": fitted, "max_statistic": constant }),
    })
}
