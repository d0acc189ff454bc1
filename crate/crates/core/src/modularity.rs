//! Partition-quality criteria on block counts.
//!
//! * [`q_bayes`]: `n⁻²·log p(e, A)` up to an `e`-free constant, after
//!   integrating out `π ~ Dir(α)` and `P_ab ~ Beta(β₁, β₂)`.
//! * [`q_likelihood`]: profile log-likelihood with `P̂_ab = O_ab / n_ab`.
//! * [`q_prior`]: the Stirling-order contribution of the class-label prior.
//! * [`ll_tilde`]: the likelihood criterion written as a full double sum over
//!   ordered class pairs with `n_a n_b` in place of `n_ab`.
//!
//! Every criterion is a sum of per-block terms plus per-class terms, which is
//! what [`Scorer`] exploits to evaluate single-node moves in `O(K)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sbm::{pair_count, BlockCounts};
use crate::special::{ln_beta, ln_gamma, tau, LnGammaTable};

/// Dirichlet concentration `α` and Beta shapes `β₁, β₂`, all `> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorHyper {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl PriorHyper {
    pub fn new(alpha: f64, beta1: f64, beta2: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta1", beta1), ("beta2", beta2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            alpha,
            beta1,
            beta2,
        })
    }
}

impl Default for PriorHyper {
    /// `α = β₁ = β₂ = ½`.
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta1: 0.5,
            beta2: 0.5,
        }
    }
}

/// Objective handed to the optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModularityKind {
    Bayes(PriorHyper),
    Likelihood,
    LikelihoodTilde,
}

impl ModularityKind {
    /// From-scratch value on `counts`.
    pub fn evaluate(&self, counts: &BlockCounts) -> f64 {
        match self {
            ModularityKind::Bayes(h) => q_bayes(counts, h),
            ModularityKind::Likelihood => q_likelihood(counts),
            ModularityKind::LikelihoodTilde => ll_tilde(counts),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModularityKind::Bayes(_) => "bayes",
            ModularityKind::Likelihood => "ml",
            ModularityKind::LikelihoodTilde => "ml-tilde",
        }
    }
}

#[inline]
fn bayes_pair(o: u64, pairs: u64, h: &PriorHyper) -> f64 {
    ln_beta(o as f64 + h.beta1, (pairs - o) as f64 + h.beta2)
}

#[inline]
fn likelihood_pair(o: u64, pairs: u64) -> f64 {
    if pairs == 0 {
        0.0
    } else {
        pairs as f64 * tau(o as f64 / pairs as f64)
    }
}

/// Contribution of the unordered class pair `{a, b}` to `n²·𝕃`: off the
/// diagonal both ordered terms, on it half of `n_a² τ(2O_aa / n_a²)`.
#[inline]
fn tilde_pair(o: u64, na: u64, nb: u64, diag: bool) -> f64 {
    let area = (na * nb) as f64;
    if area == 0.0 {
        return 0.0;
    }
    if diag {
        0.5 * area * tau(2.0 * o as f64 / area)
    } else {
        area * tau(o as f64 / area)
    }
}

fn n_squared(counts: &BlockCounts) -> f64 {
    let n = counts.n() as f64;
    n * n
}

fn upper_pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |a| (a..k).map(move |b| (a, b)))
}

/// Bayesian modularity
/// `n⁻² [Σ_{a≤b} ln B(O_ab + β₁, n_ab − O_ab + β₂) + Σ_a ln Γ(n_a + α)]`.
///
/// Finite for every labelling; an empty block contributes `ln B(β₁, β₂)` and
/// an empty class `ln Γ(α)`.
pub fn q_bayes(counts: &BlockCounts, hyper: &PriorHyper) -> f64 {
    let k = counts.k();
    let blocks: f64 = upper_pairs(k)
        .map(|(a, b)| bayes_pair(counts.o(a, b), counts.pairs(a, b), hyper))
        .sum();
    let classes: f64 = (0..k)
        .map(|a| ln_gamma(counts.size(a) as f64 + hyper.alpha))
        .sum();
    (blocks + classes) / n_squared(counts)
}

/// Likelihood modularity `n⁻² Σ_{a≤b} n_ab τ(O_ab / n_ab)`; empty blocks
/// contribute zero.
pub fn q_likelihood(counts: &BlockCounts) -> f64 {
    upper_pairs(counts.k())
        .map(|(a, b)| likelihood_pair(counts.o(a, b), counts.pairs(a, b)))
        .sum::<f64>()
        / n_squared(counts)
}

/// Prior part `n⁻² Σ_{a : n_a + ⌊α⌋ ≥ 2} n_a ln n_a − 1/n`.
pub fn q_prior(counts: &BlockCounts, alpha: f64) -> f64 {
    let floor_alpha = alpha.floor() as u64;
    let sum: f64 = counts
        .sizes()
        .iter()
        .filter(|&&na| na + floor_alpha >= 2)
        .map(|&na| {
            let x = na as f64;
            if na == 0 {
                0.0
            } else {
                x * x.ln()
            }
        })
        .sum();
    sum / n_squared(counts) - 1.0 / counts.n() as f64
}

/// `𝕃(e) = (2n²)⁻¹ Σ_{a,b} n_a n_b τ(Õ_ab / (n_a n_b))`, terms with
/// `n_a n_b = 0` contributing zero.
pub fn ll_tilde(counts: &BlockCounts) -> f64 {
    let k = counts.k();
    let mut s = 0.0;
    for a in 0..k {
        for b in 0..k {
            let area = (counts.size(a) * counts.size(b)) as f64;
            if area > 0.0 {
                s += area * tau(counts.o_tilde(a, b) as f64 / area);
            }
        }
    }
    s / (2.0 * n_squared(counts))
}

/// Largest `ln Γ` lookup table built per offset (entries, not bytes).
const MAX_TABLE: usize = 1 << 21;

#[derive(Debug, Clone)]
enum Terms {
    Bayes {
        beta1: LnGammaTable,
        beta2: LnGammaTable,
        beta12: LnGammaTable,
        alpha: LnGammaTable,
    },
    Likelihood,
    Tilde,
}

/// Incremental evaluator for one objective on graphs with `n` nodes.
///
/// Works in raw units `n²·Q` so that move deltas are `O(1)` in magnitude.
#[derive(Debug, Clone)]
pub struct Scorer {
    kind: ModularityKind,
    n: u64,
    terms: Terms,
}

impl Scorer {
    pub fn new(kind: ModularityKind, n: usize) -> Self {
        let terms = match kind {
            ModularityKind::Bayes(h) => {
                let max_pairs = (n * n.saturating_sub(1) / 2).max(n * n / 4) + 1;
                let len = max_pairs.min(MAX_TABLE);
                Terms::Bayes {
                    beta1: LnGammaTable::new(h.beta1, len),
                    beta2: LnGammaTable::new(h.beta2, len),
                    beta12: LnGammaTable::new(h.beta1 + h.beta2, len),
                    alpha: LnGammaTable::new(h.alpha, n + 1),
                }
            }
            ModularityKind::Likelihood => Terms::Likelihood,
            ModularityKind::LikelihoodTilde => Terms::Tilde,
        };
        Self {
            kind,
            n: n as u64,
            terms,
        }
    }

    pub fn kind(&self) -> &ModularityKind {
        &self.kind
    }

    #[inline]
    fn pair(&self, o: u64, na: u64, nb: u64, diag: bool) -> f64 {
        match &self.terms {
            Terms::Bayes {
                beta1,
                beta2,
                beta12,
                ..
            } => {
                let pairs = pair_count(na, nb, diag);
                beta1.get(o) + beta2.get(pairs - o) - beta12.get(pairs)
            }
            Terms::Likelihood => likelihood_pair(o, pair_count(na, nb, diag)),
            Terms::Tilde => tilde_pair(o, na, nb, diag),
        }
    }

    #[inline]
    fn class(&self, na: u64) -> f64 {
        match &self.terms {
            Terms::Bayes { alpha, .. } => alpha.get(na),
            _ => 0.0,
        }
    }

    /// `n²·Q(counts)`.
    pub fn raw(&self, counts: &BlockCounts) -> f64 {
        let k = counts.k();
        let blocks: f64 = upper_pairs(k)
            .map(|(a, b)| self.pair(counts.o(a, b), counts.size(a), counts.size(b), a == b))
            .sum();
        let classes: f64 = (0..k).map(|a| self.class(counts.size(a))).sum();
        blocks + classes
    }

    /// Converts raw units back to the objective's scale.
    pub fn scale(&self, raw: f64) -> f64 {
        raw / (self.n as f64 * self.n as f64)
    }

    /// Change in `n²·Q` when a node with `links[c]` neighbors in class `c`
    /// moves from `from` to `to`.
    #[inline]
    pub fn move_delta(&self, counts: &BlockCounts, from: usize, to: usize, links: &[u64]) -> f64 {
        if from == to {
            return 0.0;
        }
        let na = counts.size(from);
        let nb = counts.size(to);
        let mut delta = self.class(na - 1) + self.class(nb + 1) - self.class(na) - self.class(nb);
        for (x, &d) in links.iter().enumerate() {
            if x == from || x == to {
                continue;
            }
            let nx = counts.size(x);
            if nx == 0 {
                continue;
            }
            let o_ax = counts.o(from, x);
            let o_bx = counts.o(to, x);
            delta += self.pair(o_ax - d, na - 1, nx, false) - self.pair(o_ax, na, nx, false);
            delta += self.pair(o_bx + d, nb + 1, nx, false) - self.pair(o_bx, nb, nx, false);
        }
        let (da, db) = (links[from], links[to]);
        let o_aa = counts.o(from, from);
        let o_bb = counts.o(to, to);
        let o_ab = counts.o(from, to);
        delta += self.pair(o_aa - da, na - 1, na - 1, true) - self.pair(o_aa, na, na, true);
        delta += self.pair(o_bb + db, nb + 1, nb + 1, true) - self.pair(o_bb, nb, nb, true);
        delta += self.pair(o_ab + da - db, na - 1, nb + 1, false) - self.pair(o_ab, na, nb, false);
        delta
    }
}
