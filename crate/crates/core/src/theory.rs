//! Population-level functionals behind the consistency arguments, and
//! numerical checks of the inequalities and identities they satisfy.
//!
//! `R` is a `K×K` probability matrix (the limit of a coupling matrix) and
//! `r = R1` its row sums. The functionals are
//!
//! * `H_P(R) = ½ Σ_ab r_a r_b τ((RPRᵀ)_ab / (r_a r_b))`,
//! * `G_P(R)`, the same with `τ₀(u) = u ln u − u` (sparse limit),
//! * `H_{P,n}(R)`, the finite-`n` version that excludes self-pairs.
//!
//! Terms with a zero weight `r_a r_b` contribute zero.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::CouplingMatrix;
use crate::modularity::{q_bayes, q_likelihood, q_prior, PriorHyper};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sbm::{block_counts, is_identifiable, Graph, Labelling};
use crate::special::{tau, tau0};

/// Entries of a probability matrix must sum to one within this tolerance.
const SUM_TOL: f64 = 1e-9;

/// Nonnegative `K×K` matrix with unit total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrixR {
    r: DMatrix<f64>,
}

impl ProbabilityMatrixR {
    pub fn new(r: DMatrix<f64>) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::Dimension(format!(
                "probability matrix must be square, got {}x{}",
                r.nrows(),
                r.ncols()
            )));
        }
        if r.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Domain(
                "probability matrix has a negative or non-finite entry".into(),
            ));
        }
        let total = r.sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Domain(format!("probability matrix sums to {total}")));
        }
        Ok(Self { r })
    }

    pub fn from_coupling(c: &CouplingMatrix) -> Self {
        let k = c.k();
        Self {
            r: DMatrix::from_fn(k, k, |a, b| c.get(a, b)),
        }
    }

    /// `Diag(f)` for a probability vector `f`.
    pub fn diagonal(f: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(f),
        ))
    }

    pub fn k(&self) -> usize {
        self.r.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// `R1`.
    pub fn row_sums(&self) -> Vec<f64> {
        row_sums(&self.r)
    }

    /// `Rᵀ1`.
    pub fn col_sums(&self) -> Vec<f64> {
        self.r.row_sum().iter().copied().collect()
    }

    /// `Diag(Rᵀ1)`.
    pub fn diag_of_col_sums(&self) -> Self {
        Self {
            r: DMatrix::from_diagonal(&self.r.row_sum().transpose()),
        }
    }

    /// `P_σ R`: row `a` of the result is row `σ(a)` of `R`.
    pub fn permute_rows(&self, sigma: &[usize]) -> Self {
        let k = self.k();
        Self {
            r: DMatrix::from_fn(k, k, |a, b| self.r[(sigma[a], b)]),
        }
    }

    /// Whether some row permutation of `R` is diagonal, treating entries at
    /// most `tol` as zero.
    pub fn is_permuted_diagonal(&self, tol: f64) -> bool {
        is_permuted_diagonal(&self.r, tol)
    }
}

/// Whether every row and every column of `r` has at most one entry above
/// `tol`, i.e. some `P_σ r` is diagonal.
pub fn is_permuted_diagonal(r: &DMatrix<f64>, tol: f64) -> bool {
    let rows_ok = r
        .row_iter()
        .all(|row| row.iter().filter(|&&x| x > tol).count() <= 1);
    let cols_ok = r
        .column_iter()
        .all(|col| col.iter().filter(|&&x| x > tol).count() <= 1);
    rows_ok && cols_ok
}

/// Random probability matrix, uniform on the simplex of `K²` cells
/// (Dirichlet with all parameters one).
pub fn random_probability_matrix<R: Rng + ?Sized>(k: usize, rng: &mut R) -> ProbabilityMatrixR {
    // Normalized standard exponentials are Dirichlet(1, …, 1).
    let mut r = DMatrix::from_fn(k, k, |_, _| -(1.0 - rng.random::<f64>()).ln());
    let total = r.sum();
    r /= total;
    ProbabilityMatrixR { r }
}

fn row_sums(r: &DMatrix<f64>) -> Vec<f64> {
    r.column_sum().iter().copied().collect()
}

fn check_dims(r: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<()> {
    if !r.is_square() || r.shape() != p.shape() {
        return Err(Error::Dimension(format!(
            "R is {}x{} but P is {}x{}",
            r.nrows(),
            r.ncols(),
            p.nrows(),
            p.ncols()
        )));
    }
    Ok(())
}

fn functional(r: &DMatrix<f64>, p: &DMatrix<f64>, t: impl Fn(f64) -> f64) -> Result<f64> {
    check_dims(r, p)?;
    let rs = row_sums(r);
    let m = r * p * r.transpose();
    let k = r.nrows();
    let mut total = 0.0;
    for a in 0..k {
        for b in 0..k {
            let w = rs[a] * rs[b];
            if w > 0.0 {
                total += w * t(m[(a, b)] / w);
            }
        }
    }
    Ok(0.5 * total)
}

/// `H_P(R)`.
pub fn h_p(r: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<f64> {
    functional(r, p, |x| tau(x.clamp(0.0, 1.0)))
}

/// `G_P(R)`.
pub fn g_p(r: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<f64> {
    functional(r, p, |u| tau0(u.max(0.0)))
}

/// Value of `H_{P,n}` and the number of terms that hit the guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuardedValue {
    pub value: f64,
    /// Terms whose weight `r_a (r_b − δ_ab/n)` was negative, or whose
    /// argument left `[0, 1]`; they are dropped or clamped.
    pub guarded: usize,
}

/// `H_{P,n}(R) = ½ Σ_ab r_a (r_b − δ_ab/n) τ(((RPRᵀ)_ab − δ_ab Σ_k P_kk R_ak / n) / (r_a (r_b − δ_ab/n)))`.
pub fn h_p_n(r: &DMatrix<f64>, p: &DMatrix<f64>, n: usize) -> Result<GuardedValue> {
    h_p_n_with(r, p, n, tau)
}

/// [`h_p_n`] with a caller-supplied `τ`.
pub fn h_p_n_with(
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
    n: usize,
    t: fn(f64) -> f64,
) -> Result<GuardedValue> {
    check_dims(r, p)?;
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "n must be at least 2, got {n}"
        )));
    }
    let inv_n = 1.0 / n as f64;
    let k = r.nrows();
    let rs = row_sums(r);
    let m = r * p * r.transpose();
    let mut total = 0.0;
    let mut guarded = 0;
    for a in 0..k {
        let self_pairs: f64 = (0..k).map(|c| p[(c, c)] * r[(a, c)]).sum::<f64>() * inv_n;
        for b in 0..k {
            let (w, num) = if a == b {
                (rs[a] * (rs[a] - inv_n), m[(a, a)] - self_pairs)
            } else {
                (rs[a] * rs[b], m[(a, b)])
            };
            if w == 0.0 {
                continue;
            }
            if w < 0.0 {
                guarded += 1;
                continue;
            }
            let x = num / w;
            if !(-1e-12..=1.0 + 1e-12).contains(&x) {
                guarded += 1;
            }
            total += w * t(x.clamp(0.0, 1.0));
        }
    }
    Ok(GuardedValue {
        value: 0.5 * total,
        guarded,
    })
}

/// Coordinates `R(λ) = Diag(f) + Σ_{b≠b'} λ_bb' Δ_bb'`, where `Δ_bb'` has
/// `+1` at `(b, b')` and `−1` at `(b', b')`.
///
/// Column sums of `R(λ)` stay equal to `f`; `λ_bb'` is the mass moved from
/// the diagonal cell of column `b'` into row `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaCoords {
    f: Vec<f64>,
    lambda: DMatrix<f64>,
}

impl LambdaCoords {
    /// `λ = 0` at base vector `f`.
    pub fn new(f: Vec<f64>) -> Result<Self> {
        if f.is_empty() || f.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::Domain(
                "base vector must be nonempty and nonnegative".into(),
            ));
        }
        let k = f.len();
        Ok(Self {
            f,
            lambda: DMatrix::zeros(k, k),
        })
    }

    /// Recovers the coordinates of a probability matrix: `f = Rᵀ1` and
    /// `λ_bb' = R_bb'`.
    pub fn from_matrix(r: &ProbabilityMatrixR) -> Self {
        let mut lambda = r.matrix().clone();
        lambda.fill_diagonal(0.0);
        Self {
            f: r.col_sums(),
            lambda,
        }
    }

    pub fn k(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn get(&self, b: usize, b2: usize) -> f64 {
        self.lambda[(b, b2)]
    }

    /// Sets `λ_bb'`. Any finite value is accepted so that the map can be
    /// differentiated at the boundary `λ = 0`.
    pub fn set(&mut self, b: usize, b2: usize, value: f64) -> Result<()> {
        let k = self.k();
        if b >= k || b2 >= k {
            return Err(Error::OutOfRange {
                index: b.max(b2),
                bound: k,
            });
        }
        if b == b2 {
            return Err(Error::InvalidParams(
                "λ is indexed by distinct classes".into(),
            ));
        }
        self.lambda[(b, b2)] = value;
        Ok(())
    }

    /// `R(λ)`, without any sign check.
    pub fn matrix(&self) -> DMatrix<f64> {
        let k = self.k();
        let mut r = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.f));
        for b in 0..k {
            for b2 in 0..k {
                let l = self.lambda[(b, b2)];
                if b != b2 && l != 0.0 {
                    r[(b, b2)] += l;
                    r[(b2, b2)] -= l;
                }
            }
        }
        r
    }

    /// `R(λ)` as a probability matrix; fails if `λ` has a negative entry or
    /// pushes a diagonal cell below zero.
    pub fn reconstruct(&self) -> Result<ProbabilityMatrixR> {
        if self.lambda.iter().any(|&l| l < 0.0) {
            return Err(Error::Domain("λ must be nonnegative".into()));
        }
        ProbabilityMatrixR::new(self.matrix())
    }
}

/// `G(λ) = H_{P,n}(R(λ))`.
pub fn lambda_objective(coords: &LambdaCoords, p: &DMatrix<f64>, n: usize) -> Result<f64> {
    lambda_objective_with(coords, p, n, tau)
}

/// [`lambda_objective`] with a caller-supplied `τ`.
pub fn lambda_objective_with(
    coords: &LambdaCoords,
    p: &DMatrix<f64>,
    n: usize,
    t: fn(f64) -> f64,
) -> Result<f64> {
    Ok(h_p_n_with(&coords.matrix(), p, n, t)?.value)
}

fn check_unit(x: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} = {x} is outside [0, 1]")));
    }
    Ok(())
}

/// `x ln(x/y)` with `0 ln(0/y) = 0` and `x ln(x/0) = ∞` for `x > 0`.
fn rel_xlogx(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}

/// Kullback–Leibler divergence `K(p‖q)` between Bernoulli laws.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    check_unit(p, "p")?;
    check_unit(q, "q")?;
    Ok(rel_xlogx(p, q) + rel_xlogx(1.0 - p, 1.0 - q))
}

/// Kullback–Leibler divergence `K₀(s‖t) = s ln(s/t) + t − s` between
/// Poisson laws.
pub fn kl_poisson(s: f64, t: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0 && s.is_finite() && t.is_finite()) {
        return Err(Error::Domain(format!(
            "Poisson means must be nonnegative, got {s} and {t}"
        )));
    }
    Ok(rel_xlogx(s, t) + t - s)
}

/// Analytic `∂G/∂λ_bb'` at `λ = 0`:
/// `−Σ_a f_a K(P_ab'‖P_ab) + K(P_b'b'‖P_bb) / (2n)`.
pub fn grad_g_zero(f: &[f64], p: &DMatrix<f64>, n: usize, b: usize, b2: usize) -> Result<f64> {
    let k = f.len();
    if p.shape() != (k, k) {
        return Err(Error::Dimension(format!(
            "f has {k} entries, P is {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    if b >= k || b2 >= k {
        return Err(Error::OutOfRange {
            index: b.max(b2),
            bound: k,
        });
    }
    if b == b2 {
        return Err(Error::InvalidParams(
            "gradient coordinates need b ≠ b'".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    if p.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::Domain("P must lie strictly inside (0, 1)".into()));
    }
    if f.iter().any(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::Domain("f must be positive".into()));
    }
    let mut g = 0.0;
    for (a, &fa) in f.iter().enumerate() {
        g -= fa * kl_bernoulli(p[(a, b2)], p[(a, b)])?;
    }
    g += kl_bernoulli(p[(b2, b2)], p[(b, b)])? / (2.0 * n as f64);
    Ok(g)
}

/// Central finite difference of `G` along `λ_bb'` at `λ = 0`.
pub fn grad_g_zero_fd(
    f: &[f64],
    p: &DMatrix<f64>,
    n: usize,
    b: usize,
    b2: usize,
    step: f64,
    t: fn(f64) -> f64,
) -> Result<f64> {
    let mut plus = LambdaCoords::new(f.to_vec())?;
    let mut minus = plus.clone();
    plus.set(b, b2, step)?;
    minus.set(b, b2, -step)?;
    let hi = lambda_objective_with(&plus, p, n, t)?;
    let lo = lambda_objective_with(&minus, p, n, t)?;
    Ok((hi - lo) / (2.0 * step))
}

/// `(H_{ρP}(Diag(Rᵀ1)) − H_{ρP}(R)) / ρ`, which tends to
/// `G_P(Diag(Rᵀ1)) − G_P(R)` as `ρ ↓ 0`.
pub fn scaled_h_gap(r: &ProbabilityMatrixR, p: &DMatrix<f64>, rho: f64) -> Result<f64> {
    let sp = p * rho;
    let d = r.diag_of_col_sums();
    Ok((h_p(d.matrix(), &sp)? - h_p(r.matrix(), &sp)?) / rho)
}

/// Largest deviations of the Bayesian modularity from its asymptotic
/// expansions over a set of labellings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapStats {
    pub labellings: usize,
    /// `max |Q_B − Q_ML − Q_P|`.
    pub max_gap: f64,
    /// `max |Q_B − Q_ML|`.
    pub max_gap_ml: f64,
}

pub fn equivalence_gap(
    graph: &Graph,
    hyper: &PriorHyper,
    labellings: &[Labelling],
) -> Result<GapStats> {
    if labellings.is_empty() {
        return Err(Error::InvalidParams("no labellings supplied".into()));
    }
    let mut stats = GapStats {
        labellings: labellings.len(),
        max_gap: 0.0,
        max_gap_ml: 0.0,
    };
    for e in labellings {
        let counts = block_counts(graph, e)?;
        let qb = q_bayes(&counts, hyper);
        let qml = q_likelihood(&counts);
        let qp = q_prior(&counts, hyper.alpha);
        stats.max_gap = stats.max_gap.max((qb - qml - qp).abs());
        stats.max_gap_ml = stats.max_gap_ml.max((qb - qml).abs());
    }
    Ok(stats)
}

/// Every labelling of `n` nodes into `k` classes, in lexicographic order.
pub fn all_labellings(n: usize, k: usize) -> impl Iterator<Item = Labelling> {
    let total = (k as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    (0..total).map(move |mut code| {
        let mut labels = vec![0u32; n];
        for slot in labels.iter_mut().rev() {
            *slot = (code % k as u64) as u32;
            code /= k as u64;
        }
        Labelling::new(labels, k).expect("labels in range")
    })
}

/// Outcome of [`maximality_check`] for one functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityStats {
    /// Largest `F(R) − F(Diag(Rᵀ1))`; must not exceed the slack.
    pub max_excess: f64,
    /// Smallest `F(Diag(Rᵀ1)) − F(R)` over non-permuted-diagonal `R`.
    pub min_gap: f64,
    /// Trials where the inequality failed beyond the slack.
    pub violations: usize,
    /// Non-permuted-diagonal trials where the gap was not positive.
    pub not_strict: usize,
    /// Largest `|F(R) − F(Diag(Rᵀ1))|` over permuted-diagonal `R`.
    pub max_diagonal_gap: f64,
}

impl InequalityStats {
    fn empty() -> Self {
        Self {
            max_excess: f64::NEG_INFINITY,
            min_gap: f64::INFINITY,
            violations: 0,
            not_strict: 0,
            max_diagonal_gap: 0.0,
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            max_excess: self.max_excess.max(o.max_excess),
            min_gap: self.min_gap.min(o.min_gap),
            violations: self.violations + o.violations,
            not_strict: self.not_strict + o.not_strict,
            max_diagonal_gap: self.max_diagonal_gap.max(o.max_diagonal_gap),
        }
    }

    fn record(&mut self, at_r: f64, at_diag: f64, diagonal: bool, slack: f64) {
        let excess = at_r - at_diag;
        self.max_excess = self.max_excess.max(excess);
        if excess > slack {
            self.violations += 1;
        }
        if diagonal {
            self.max_diagonal_gap = self.max_diagonal_gap.max(excess.abs());
            if excess.abs() > slack {
                self.violations += 1;
            }
        } else {
            self.min_gap = self.min_gap.min(-excess);
            if excess >= 0.0 {
                self.not_strict += 1;
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.not_strict == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximalityReport {
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    /// Random matrices that happened to be permuted-diagonal (besides the
    /// explicit diagonal probes).
    pub diagonal_draws: usize,
    pub h: InequalityStats,
    pub g: InequalityStats,
}

impl MaximalityReport {
    pub fn passed(&self) -> bool {
        self.h.passed() && self.g.passed()
    }
}

/// Slack allowed in `F(R) ≤ F(Diag(Rᵀ1))`.
pub const MAXIMALITY_SLACK: f64 = 1e-12;

/// Samples `trials` random probability matrices and checks
/// `H_P(R) ≤ H_P(Diag(Rᵀ1))` and `G_P(R) ≤ G_P(Diag(Rᵀ1))`, strictly unless
/// `R` is a row permutation of a diagonal matrix. Each trial also probes a
/// random permuted-diagonal matrix, where equality must hold.
///
/// Trial `t` uses seed `derive_seed(seed, [t])`.
pub fn maximality_check(
    p: &DMatrix<f64>,
    pi: &[f64],
    trials: usize,
    seed: u64,
) -> Result<MaximalityReport> {
    let k = pi.len();
    if p.shape() != (k, k) {
        return Err(Error::Dimension(format!(
            "π has {k} entries, P is {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    if !is_identifiable(p, pi) {
        return Err(Error::InvalidParams("(P, π) is not identifiable".into()));
    }
    let per_trial = |t: usize| -> Result<(InequalityStats, InequalityStats, usize)> {
        let mut rng = rng_from_seed(derive_seed(seed, &[t as u64]));
        let mut h = InequalityStats::empty();
        let mut g = InequalityStats::empty();
        let r = random_probability_matrix(k, &mut rng);
        let diag = r.is_permuted_diagonal(0.0);
        let d = r.diag_of_col_sums();
        h.record(
            h_p(r.matrix(), p)?,
            h_p(d.matrix(), p)?,
            diag,
            MAXIMALITY_SLACK,
        );
        g.record(
            g_p(r.matrix(), p)?,
            g_p(d.matrix(), p)?,
            diag,
            MAXIMALITY_SLACK,
        );

        let mut f: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = f.iter().sum();
        f.iter_mut().for_each(|x| *x /= s);
        let mut sigma: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            sigma.swap(i, rng.random_range(0..=i));
        }
        let pd = ProbabilityMatrixR::diagonal(&f)?.permute_rows(&sigma);
        let pdd = pd.diag_of_col_sums();
        h.record(
            h_p(pd.matrix(), p)?,
            h_p(pdd.matrix(), p)?,
            true,
            MAXIMALITY_SLACK,
        );
        g.record(
            g_p(pd.matrix(), p)?,
            g_p(pdd.matrix(), p)?,
            true,
            MAXIMALITY_SLACK,
        );
        Ok((h, g, usize::from(diag)))
    };
    let (h, g, diagonal_draws) = (0..trials).into_par_iter().map(per_trial).try_reduce(
        || (InequalityStats::empty(), InequalityStats::empty(), 0),
        |a, b| Ok((a.0.merge(b.0), a.1.merge(b.1), a.2 + b.2)),
    )?;
    Ok(MaximalityReport {
        k,
        trials,
        seed,
        diagonal_draws,
        h,
        g,
    })
}

/// `P = off·11ᵀ + (on − off)·I`, the usual assortative test matrix.
pub fn planted_partition(k: usize, on: f64, off: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |a, b| if a == b { on } else { off })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn p2() -> DMatrix<f64> {
        planted_partition(2, 0.8, 0.2)
    }

    #[test]
    fn h_p_diagonal_reduces_to_entries() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let half = DMatrix::from_element(1, 1, 0.5);
        // The ½ in front of the double sum gives τ(½)/2.
        assert!((h_p(&one, &half).unwrap() + 0.5 * LN_2).abs() < 1e-15);

        let f = [0.3, 0.7];
        let d = ProbabilityMatrixR::diagonal(&f).unwrap();
        let p = p2();
        let direct: f64 = (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| f[a] * f[b] * tau(p[(a, b)]))
            .sum::<f64>()
            * 0.5;
        assert!((h_p(d.matrix(), &p).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn constant_p_gives_constant_h() {
        let mut rng = rng_from_seed(1);
        let p = DMatrix::from_element(3, 3, 0.5);
        for _ in 0..20 {
            let r = random_probability_matrix(3, &mut rng);
            assert!((h_p(r.matrix(), &p).unwrap() + 0.5 * LN_2).abs() < 1e-14);
        }
    }

    #[test]
    fn g_p_single_block() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let s = DMatrix::from_element(1, 1, 3.0);
        assert!((g_p(&one, &s).unwrap() - 0.5 * (3.0 * 3f64.ln() - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn h_p_n_single_class() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let p = DMatrix::from_element(1, 1, 0.3);
        for n in [2, 10, 1000] {
            let v = h_p_n(&one, &p, n).unwrap();
            let want = 0.5 * (1.0 - 1.0 / n as f64) * tau(0.3);
            assert!((v.value - want).abs() < 1e-15);
            assert_eq!(v.guarded, 0);
        }
        let zero = DMatrix::zeros(2, 2);
        let r = random_probability_matrix(2, &mut rng_from_seed(2));
        assert_eq!(h_p_n(r.matrix(), &zero, 50).unwrap().value, 0.0);
    }

    #[test]
    fn h_p_n_guards_tiny_classes() {
        let r = DMatrix::from_row_slice(2, 2, &[0.995, 0.0, 0.0, 0.005]);
        let v = h_p_n(&r, &p2(), 10).unwrap();
        assert_eq!(v.guarded, 1);
        assert!(v.value.is_finite());
    }

    #[test]
    fn kl_values() {
        assert_eq!(kl_bernoulli(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(kl_poisson(2.0, 2.0).unwrap(), 0.0);
        let want = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((kl_bernoulli(0.5, 0.25).unwrap() - want).abs() < 1e-15);
        assert!((kl_bernoulli(0.5, 0.25).unwrap() - 0.143841).abs() < 1e-6);
        assert_eq!(kl_bernoulli(0.5, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(kl_bernoulli(0.0, 0.5).unwrap(), LN_2);
        assert_eq!(kl_poisson(0.0, 1.5).unwrap(), 1.5);
        assert_eq!(kl_poisson(1.0, 0.0).unwrap(), f64::INFINITY);
        assert!(kl_bernoulli(1.2, 0.5).is_err());
        assert!(kl_poisson(-1.0, 0.5).is_err());
    }

    #[test]
    fn gradient_vanishes_for_identical_columns() {
        let p = DMatrix::from_row_slice(2, 2, &[0.4, 0.4, 0.4, 0.4]);
        assert_eq!(grad_g_zero(&[0.5, 0.5], &p, 100, 0, 1).unwrap(), 0.0);
        assert!(grad_g_zero(&[0.5, 0.5], &p, 100, 1, 1).is_err());
        assert!(grad_g_zero(&[0.5, 0.5], &p2(), 100, 0, 2).is_err());
        assert!(grad_g_zero(&[0.5, 0.5], &DMatrix::from_element(2, 2, 1.0), 100, 0, 1).is_err());
    }

    #[test]
    fn lambda_round_trip() {
        let r = random_probability_matrix(3, &mut rng_from_seed(9));
        let c = LambdaCoords::from_matrix(&r);
        let back = c.reconstruct().unwrap();
        assert!((back.matrix() - r.matrix()).abs().max() < 1e-15);
        let mut bad = LambdaCoords::new(vec![0.5, 0.5]).unwrap();
        bad.set(0, 1, -0.1).unwrap();
        assert!(bad.reconstruct().is_err());
        assert!(bad.set(1, 1, 0.1).is_err());
    }

    #[test]
    fn permuted_diagonal_detection() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 0.4, 0.6, 0.0]);
        assert!(is_permuted_diagonal(&d, 0.0));
        let full = DMatrix::from_row_slice(2, 2, &[0.1, 0.4, 0.5, 0.0]);
        assert!(!is_permuted_diagonal(&full, 0.0));
    }

    #[test]
    fn maximality_small_run() {
        let rep = maximality_check(&p2(), &[0.5, 0.5], 200, 4).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.h.max_diagonal_gap <= MAXIMALITY_SLACK);
        let not_ident = DMatrix::from_element(2, 2, 0.3);
        assert!(maximality_check(&not_ident, &[0.5, 0.5], 10, 0).is_err());
    }

    #[test]
    fn h_p_permutation_invariant() {
        let r = random_probability_matrix(3, &mut rng_from_seed(5));
        let p = planted_partition(3, 0.7, 0.1);
        let s = r.permute_rows(&[2, 0, 1]);
        assert_eq!(s.col_sums().len(), 3);
        for (x, y) in s.col_sums().iter().zip(r.col_sums()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((h_p(s.matrix(), &p).unwrap() - h_p(r.matrix(), &p).unwrap()).abs() < 1e-15);
        assert!((g_p(s.matrix(), &p).unwrap() - g_p(r.matrix(), &p).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn all_labellings_enumerates_in_order() {
        let v: Vec<_> = all_labellings(2, 2).map(|l| l.labels().to_vec()).collect();
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(all_labellings(3, 3).count(), 27);
    }
}
