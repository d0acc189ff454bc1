//! Experiment configuration, read from TOML and overridden by flags.
//!
//! ```toml
//! seed = 7
//! objective = "bayes"
//!
//! [prior]
//! alpha = 0.5
//! beta1 = 0.5
//! beta2 = 0.5
//!
//! [tabu]
//! restarts = 20
//!
//! [sweep]
//! pi = [0.5, 0.5]
//! p = [[0.8, 0.2], [0.2, 0.8]]
//! n = [40, 80, 160]
//! replications = 50
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use blockmod::{ModularityKind, PriorHyper, SbmParams, TabuConfig};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Bayes,
    Ml,
}

impl Objective {
    pub fn kind(self, prior: PriorHyper) -> ModularityKind {
        match self {
            Objective::Bayes => ModularityKind::Bayes(prior),
            Objective::Ml => ModularityKind::Likelihood,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub objective: Objective,
    /// Class count for detection; defaults per experiment.
    pub k: Option<usize>,
    pub prior: PriorHyper,
    pub tabu: TabuConfig,
    pub sweep: SweepConfig,
    pub karate: KarateConfig,
    pub theory: TheoryConfig,
    pub detect: DetectConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out: None,
            objective: Objective::Bayes,
            k: None,
            prior: PriorHyper::default(),
            tabu: TabuConfig::default(),
            sweep: SweepConfig::default(),
            karate: KarateConfig::default(),
            theory: TheoryConfig::default(),
            detect: DetectConfig::default(),
        }
    }
}

/// Simulation grid for consistency sweeps.
///
/// With `rho` and `degrees` both empty the graphs are dense with `P = p`.
/// Otherwise `p` is the base matrix `S` and `P = ρ·S`, one grid point per
/// entry of `rho`, plus one per target expected degree `λ` in `degrees`
/// (converted with `ρ = λ / ((n − 1) πᵀSπ)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub pi: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub n: Vec<usize>,
    pub rho: Vec<f64>,
    pub degrees: Vec<f64>,
    pub replications: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            pi: vec![0.5, 0.5],
            p: vec![vec![0.8, 0.2], vec![0.2, 0.8]],
            n: vec![40, 80, 160],
            rho: Vec::new(),
            degrees: Vec::new(),
            replications: 50,
        }
    }
}

impl SweepConfig {
    pub fn base_matrix(&self) -> anyhow::Result<DMatrix<f64>> {
        let k = self.p.len();
        if k == 0 || self.p.iter().any(|row| row.len() != k) {
            bail!("sweep.p must be a nonempty square matrix");
        }
        Ok(DMatrix::from_fn(k, k, |a, b| self.p[a][b]))
    }

    pub fn is_dense(&self) -> bool {
        self.rho.is_empty() && self.degrees.is_empty()
    }

    /// The `(ρ, params)` grid at size `n`. Dense sweeps report `ρ = 1`.
    pub fn grid(&self, n: usize) -> anyhow::Result<Vec<(f64, SbmParams)>> {
        let base = self.base_matrix()?;
        if self.is_dense() {
            return Ok(vec![(1.0, SbmParams::new(self.pi.clone(), base)?)]);
        }
        let k = base.nrows();
        if self.pi.len() != k {
            bail!(
                "sweep.pi has {} entries for a {k}x{k} matrix",
                self.pi.len()
            );
        }
        let density: f64 = (0..k)
            .flat_map(|a| (0..k).map(move |b| (a, b)))
            .map(|(a, b)| self.pi[a] * base[(a, b)] * self.pi[b])
            .sum();
        let mut out = Vec::new();
        for &rho in &self.rho {
            out.push((rho, SbmParams::sparse(self.pi.clone(), base.clone(), rho)?));
        }
        for &lambda in &self.degrees {
            if n < 2 || density <= 0.0 {
                bail!("expected degree {lambda} needs n >= 2 and a nonzero base matrix");
            }
            let rho = lambda / ((n - 1) as f64 * density);
            let params = SbmParams::sparse(self.pi.clone(), base.clone(), rho)
                .with_context(|| format!("expected degree {lambda} at n = {n}"))?;
            out.push((rho, params));
        }
        Ok(out)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n.is_empty() {
            bail!("sweep.n must not be empty");
        }
        if self.replications == 0 {
            bail!("sweep.replications must be at least 1");
        }
        for &n in &self.n {
            self.grid(n)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KarateConfig {
    pub ks: Vec<usize>,
}

impl Default for KarateConfig {
    fn default() -> Self {
        Self { ks: vec![2, 4] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    HalfL1,
    ConditionalExpectation,
    Maximality,
    Gradient,
    Equivalence,
}

impl CheckName {
    pub const ALL: [CheckName; 5] = [
        CheckName::HalfL1,
        CheckName::ConditionalExpectation,
        CheckName::Maximality,
        CheckName::Gradient,
        CheckName::Equivalence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::HalfL1 => "half_l1",
            CheckName::ConditionalExpectation => "conditional_expectation",
            CheckName::Maximality => "maximality",
            CheckName::Gradient => "gradient",
            CheckName::Equivalence => "equivalence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryConfig {
    pub checks: Vec<CheckName>,
    pub half_l1: HalfL1Config,
    pub conditional_expectation: ConditionalConfig,
    pub maximality: MaximalityConfig,
    pub gradient: GradientConfig,
    pub equivalence: EquivalenceConfig,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            checks: CheckName::ALL.to_vec(),
            half_l1: HalfL1Config::default(),
            conditional_expectation: ConditionalConfig::default(),
            maximality: MaximalityConfig::default(),
            gradient: GradientConfig::default(),
            equivalence: EquivalenceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HalfL1Config {
    pub max_n: usize,
    pub max_k: usize,
    pub random_pairs: usize,
    pub random_n: usize,
}

impl Default for HalfL1Config {
    fn default() -> Self {
        Self {
            max_n: 6,
            max_k: 3,
            random_pairs: 10_000,
            random_n: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionalConfig {
    pub instances: usize,
    pub max_n: usize,
    pub max_k: usize,
    pub tolerance: f64,
}

impl Default for ConditionalConfig {
    fn default() -> Self {
        Self {
            instances: 100,
            max_n: 50,
            max_k: 4,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalityConfig {
    pub ks: Vec<usize>,
    pub trials: usize,
    /// Diagonal and off-diagonal entries of the planted-partition `P`.
    pub on: f64,
    pub off: f64,
}

impl Default for MaximalityConfig {
    fn default() -> Self {
        Self {
            ks: vec![2, 3, 4],
            trials: 10_000,
            on: 0.8,
            off: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradientConfig {
    pub configurations: usize,
    pub ks: Vec<usize>,
    pub ns: Vec<usize>,
    pub p_min: f64,
    pub p_max: f64,
    pub step: f64,
    pub tolerance: f64,
}

impl Default for GradientConfig {
    fn default() -> Self {
        Self {
            configurations: 100,
            ks: vec![2, 3],
            ns: vec![50, 500],
            p_min: 0.1,
            p_max: 0.9,
            step: 1e-6,
            tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceConfig {
    pub k: usize,
    pub exhaustive_n: Vec<usize>,
    pub sampled_n: Vec<usize>,
    pub samples: usize,
    /// Largest admissible slope of `ln(statistic)` against `ln n`.
    pub max_slope: f64,
    pub pi: Vec<f64>,
    pub p: Vec<Vec<f64>>,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self {
            k: 2,
            exhaustive_n: vec![4, 5, 6, 7, 8],
            sampled_n: vec![20, 50, 100, 200],
            samples: 1000,
            max_slope: 0.2,
            pi: vec![0.5, 0.5],
            p: vec![vec![0.8, 0.2], vec![0.2, 0.8]],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub input: Option<PathBuf>,
    pub zero_indexed: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        PriorHyper::new(self.prior.alpha, self.prior.beta1, self.prior.beta2)?;
        self.tabu.validate()?;
        if self.k == Some(0) {
            bail!("k must be at least 1");
        }
        self.sweep.validate()?;
        if self.karate.ks.contains(&0) {
            bail!("karate.ks entries must be at least 1");
        }
        Ok(())
    }

    pub fn kind(&self) -> ModularityKind {
        self.objective.kind(self.prior)
    }

    /// Tabu settings for one run, seeded from `seed`.
    pub fn tabu_with_seed(&self, seed: u64) -> TabuConfig {
        TabuConfig { seed, ..self.tabu }
    }
}
