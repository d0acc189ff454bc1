//! Agreement between labellings, up to renaming of the classes.
//!
//! Everything here works in exact integer units: the coupling matrix stores
//! node counts (multiples of `1/n`), so the half-L1 identity and the
//! permutation search are free of rounding.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::sbm::Labelling;

/// Largest class count solved by full permutation enumeration; larger
/// problems use the Hungarian method.
pub const MAX_ENUMERATED_K: usize = 8;

/// `R(e, c)` scaled by `n`: entry `(a, b)` counts nodes with `e_i = a` and
/// `c_i = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMatrix {
    k: usize,
    n: usize,
    counts: Vec<u64>,
}

impl CouplingMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `n·R_ab`.
    #[inline]
    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.k + b]
    }

    /// `R_ab`.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.count(a, b) as f64 / self.n as f64
    }

    /// `n·R1 = n·f(e)`.
    pub fn row_counts(&self) -> Vec<u64> {
        (0..self.k)
            .map(|a| (0..self.k).map(|b| self.count(a, b)).sum())
            .collect()
    }

    /// `n·1ᵀR = n·f(c)`.
    pub fn col_counts(&self) -> Vec<u64> {
        (0..self.k)
            .map(|b| (0..self.k).map(|a| self.count(a, b)).sum())
            .collect()
    }

    /// `n·‖Diag(f(c)) − R(e, c)‖₁`, exact.
    pub fn l1_to_column_diagonal(&self) -> u64 {
        let cols = self.col_counts();
        let mut total = 0;
        for a in 0..self.k {
            for (b, &col) in cols.iter().enumerate() {
                let d = if a == b { col } else { 0 };
                total += d.abs_diff(self.count(a, b));
            }
        }
        total
    }

    /// `n·Σ_a R_{σ(a), a}`.
    pub fn matched_count(&self, sigma: &[usize]) -> u64 {
        sigma
            .iter()
            .enumerate()
            .map(|(a, &s)| self.count(s, a))
            .sum()
    }
}

fn check_pair(e: &Labelling, c: &Labelling) -> Result<()> {
    if e.n() != c.n() {
        return Err(Error::Dimension(format!(
            "labellings have {} and {} nodes",
            e.n(),
            c.n()
        )));
    }
    if e.k() != c.k() {
        return Err(Error::Dimension(format!(
            "labellings have {} and {} classes",
            e.k(),
            c.k()
        )));
    }
    Ok(())
}

pub fn coupling_matrix(e: &Labelling, c: &Labelling) -> Result<CouplingMatrix> {
    check_pair(e, c)?;
    let k = e.k();
    let mut counts = vec![0u64; k * k];
    for (&a, &b) in e.labels().iter().zip(c.labels()) {
        counts[a as usize * k + b as usize] += 1;
    }
    Ok(CouplingMatrix {
        k,
        n: e.n(),
        counts,
    })
}

/// Permutation `σ` of the classes and the fraction `Σ_a R_{σ(a), a}` it
/// matches.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationMatch {
    pub sigma: Vec<usize>,
    pub matched_count: u64,
    pub matched_fraction: f64,
}

/// Maximizes `Σ_a R_{σ(a), a}` over permutations `σ`.
///
/// Up to [`MAX_ENUMERATED_K`] classes every permutation is tried in
/// lexicographic order and the first maximizer is kept.
pub fn best_permutation(r: &CouplingMatrix) -> PermutationMatch {
    let k = r.k();
    let sigma = if k <= MAX_ENUMERATED_K {
        let mut best: Option<(u64, Vec<usize>)> = None;
        for perm in (0..k).permutations(k) {
            let score = r.matched_count(&perm);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, perm));
            }
        }
        best.map(|(_, p)| p).unwrap_or_default()
    } else {
        hungarian_max(r)
    };
    let matched_count = r.matched_count(&sigma);
    PermutationMatch {
        matched_fraction: matched_count as f64 / r.n().max(1) as f64,
        matched_count,
        sigma,
    }
}

/// Maximum-weight perfect matching of columns `a` to rows `σ(a)` by the
/// O(K³) potential-based Hungarian method on costs `max − count`.
fn hungarian_max(r: &CouplingMatrix) -> Vec<usize> {
    let k = r.k();
    let max = (0..k * k).map(|i| r.counts[i]).max().unwrap_or(0) as i64;
    // cost[col][row]: assign column `a` (worker) to row `σ(a)` (job).
    let cost = |a: usize, row: usize| max - r.count(row, a) as i64;
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut way = vec![0usize; k + 1];
    // p[j] = worker (1-based) assigned to job j.
    let mut p = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut sigma = vec![0usize; k];
    for j in 1..=k {
        sigma[p[j] - 1] = j - 1;
    }
    sigma
}

/// Number of nodes with `e_i ≠ c_i`.
pub fn mismatch_count(e: &Labelling, c: &Labelling) -> Result<usize> {
    check_pair(e, c)?;
    Ok(e.labels()
        .iter()
        .zip(c.labels())
        .filter(|(a, b)| a != b)
        .count())
}

/// Smallest number of mismatches over all renamings of the classes of `e`.
pub fn matched_mismatch_count(e: &Labelling, c: &Labelling) -> Result<usize> {
    let r = coupling_matrix(e, c)?;
    let m = best_permutation(&r);
    Ok(e.n() - m.matched_count as usize)
}

/// Fraction of misclassified nodes.
///
/// With `matched = false` this is the raw `n⁻¹ #{i : e_i ≠ c_i}`, which
/// equals `½‖Diag(f(c)) − R(e, c)‖₁`; with `matched = true` it is the
/// minimum of that quantity over permutations of the labels of `e`.
pub fn misclassification(e: &Labelling, c: &Labelling, matched: bool) -> Result<f64> {
    let n = e.n().max(1) as f64;
    let count = if matched {
        matched_mismatch_count(e, c)?
    } else {
        let direct = mismatch_count(e, c)?;
        debug_assert_eq!(
            2 * direct as u64,
            coupling_matrix(e, c)?.l1_to_column_diagonal()
        );
        direct
    };
    Ok(count as f64 / n)
}

/// Exact recovery up to a permutation of the labels.
pub fn strong_recovery(e: &Labelling, c: &Labelling) -> Result<bool> {
    Ok(matched_mismatch_count(e, c)? == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lab(v: &[usize], k: usize) -> Labelling {
        Labelling::from_one_based(v, k).unwrap()
    }

    #[test]
    fn coupling_of_identical_labellings_is_diagonal() {
        let c = lab(&[1, 2, 2, 3, 3, 3], 3);
        let r = coupling_matrix(&c, &c).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { (a + 1) as u64 } else { 0 };
                assert_eq!(r.count(a, b), want);
            }
        }
    }

    #[test]
    fn coupling_hand_example() {
        let c = lab(&[1, 1, 2, 2], 2);
        let e = lab(&[1, 2, 2, 2], 2);
        let r = coupling_matrix(&e, &c).unwrap();
        assert_eq!(
            [r.get(0, 0), r.get(0, 1), r.get(1, 0), r.get(1, 1)],
            [0.25, 0.0, 0.25, 0.5]
        );
        assert_eq!(r.row_counts(), vec![1, 3]);
        assert_eq!(r.col_counts(), vec![2, 2]);
        assert_eq!(misclassification(&e, &c, false).unwrap(), 0.25);
        assert_eq!(r.l1_to_column_diagonal(), 2);
        assert_eq!(misclassification(&e, &c, true).unwrap(), 0.25);
    }

    #[test]
    fn label_swap() {
        let e = lab(&[2, 2, 1, 1], 2);
        let c = lab(&[1, 1, 2, 2], 2);
        assert_eq!(misclassification(&e, &c, false).unwrap(), 1.0);
        assert_eq!(misclassification(&e, &c, true).unwrap(), 0.0);
        assert!(strong_recovery(&e, &c).unwrap());
        assert!(strong_recovery(&c, &c).unwrap());
        let flipped = lab(&[2, 1, 1, 1], 2);
        assert!(!strong_recovery(&flipped, &c).unwrap());
    }

    #[test]
    fn permutation_diagonal_and_antidiagonal() {
        let c = lab(&[1, 2, 3, 3], 3);
        let m = best_permutation(&coupling_matrix(&c, &c).unwrap());
        assert_eq!(m.sigma, vec![0, 1, 2]);
        assert_eq!(m.matched_fraction, 1.0);

        let e = lab(&[2, 1], 2);
        let c = lab(&[1, 2], 2);
        let m = best_permutation(&coupling_matrix(&e, &c).unwrap());
        assert_eq!(m.sigma, vec![1, 0]);
        assert_eq!(m.matched_fraction, 1.0);
    }

    #[test]
    fn ties_resolve_to_lexicographically_first() {
        // All-equal couplings: identity wins.
        let e = lab(&[1, 1, 2, 2], 2);
        let c = lab(&[1, 2, 1, 2], 2);
        let m = best_permutation(&coupling_matrix(&e, &c).unwrap());
        assert_eq!(m.sigma, vec![0, 1]);
    }

    #[test]
    fn dimension_errors() {
        assert!(coupling_matrix(&lab(&[1, 2], 2), &lab(&[1, 2, 1], 2)).is_err());
        assert!(misclassification(&lab(&[1, 2], 2), &lab(&[1, 2], 3), true).is_err());
    }

    #[test]
    fn hungarian_agrees_with_enumeration() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for k in 2..=7 {
            for _ in 0..30 {
                let e = Labelling::random(60, k, &mut rng).unwrap();
                let c = Labelling::random(60, k, &mut rng).unwrap();
                let r = coupling_matrix(&e, &c).unwrap();
                let h = hungarian_max(&r);
                assert_eq!(r.matched_count(&h), best_permutation(&r).matched_count);
            }
        }
    }

    #[test]
    fn large_k_uses_hungarian() {
        let k = 10;
        let c = Labelling::new((0..40).map(|i| (i % k) as u32).collect(), k).unwrap();
        let sigma: Vec<usize> = (0..k).map(|a| (a + 3) % k).collect();
        let e = c.relabelled(&sigma).unwrap();
        assert_eq!(misclassification(&e, &c, true).unwrap(), 0.0);
    }

    fn pair_strategy() -> impl Strategy<Value = (Vec<u32>, Vec<u32>, usize, Vec<usize>)> {
        (1usize..40, 1usize..5).prop_flat_map(|(n, k)| {
            (
                proptest::collection::vec(0..k as u32, n),
                proptest::collection::vec(0..k as u32, n),
                Just(k),
                Just((0..k).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
    }

    proptest! {
        #[test]
        fn margins_and_half_l1((e, c, k, _s) in pair_strategy()) {
            let e = Labelling::new(e, k).unwrap();
            let c = Labelling::new(c, k).unwrap();
            let r = coupling_matrix(&e, &c).unwrap();
            prop_assert_eq!(r.row_counts(), e.sizes());
            prop_assert_eq!(r.col_counts(), c.sizes());
            prop_assert_eq!(2 * mismatch_count(&e, &c).unwrap() as u64, r.l1_to_column_diagonal());
        }

        #[test]
        fn matched_is_permutation_invariant((e, c, k, sigma) in pair_strategy()) {
            let e = Labelling::new(e, k).unwrap();
            let c = Labelling::new(c, k).unwrap();
            let base = matched_mismatch_count(&e, &c).unwrap();
            prop_assert_eq!(matched_mismatch_count(&e.relabelled(&sigma).unwrap(), &c).unwrap(), base);
            prop_assert_eq!(matched_mismatch_count(&e, &c.relabelled(&sigma).unwrap()).unwrap(), base);
            prop_assert_eq!(matched_mismatch_count(&c, &e).unwrap(), base);
        }
    }
}
