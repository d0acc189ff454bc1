//! Objectives checked against independent closed forms evaluated with
//! `statrs`.

use blockmod::theory::all_labellings;
use blockmod::{
    block_counts, generate_sbm, ll_tilde, q_bayes, q_likelihood, q_prior, Graph, Labelling,
    PriorHyper, SbmParams,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma as lg;

fn ln_b(x: f64, y: f64) -> f64 {
    lg(x) + lg(y) - lg(x + y)
}

/// `log p(e, A)` with `π ~ Dir(α)` and `P_ab ~ Beta(β₁, β₂)` integrated out,
/// computed from edges and labels directly.
fn log_joint(g: &Graph, e: &Labelling, h: &PriorHyper) -> f64 {
    let k = e.k();
    let n = e.n();
    let mut sizes = vec![0f64; k];
    for i in 0..n {
        sizes[e.get(i)] += 1.0;
    }
    let mut labels_part =
        lg(k as f64 * h.alpha) - k as f64 * lg(h.alpha) - lg(n as f64 + k as f64 * h.alpha);
    for &s in &sizes {
        labels_part += lg(s + h.alpha);
    }
    let mut ones = vec![vec![0f64; k]; k];
    let mut pairs = vec![vec![0f64; k]; k];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (e.get(i).min(e.get(j)), e.get(i).max(e.get(j)));
            pairs[a][b] += 1.0;
            if g.has_edge(i, j) {
                ones[a][b] += 1.0;
            }
        }
    }
    let mut graph_part = 0.0;
    for a in 0..k {
        for b in a..k {
            graph_part += ln_b(ones[a][b] + h.beta1, pairs[a][b] - ones[a][b] + h.beta2)
                - ln_b(h.beta1, h.beta2);
        }
    }
    labels_part + graph_part
}

fn two_block(n: usize, seed: u64) -> Graph {
    let params = SbmParams::new(
        vec![0.5, 0.5],
        DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, 0.6]),
    )
    .unwrap();
    generate_sbm(&params, n, seed).unwrap().0
}

#[test]
fn bayes_matches_log_joint_up_to_a_constant() {
    for (n, k, seed) in [(4, 2, 1), (5, 3, 2), (6, 2, 3), (6, 3, 4)] {
        let g = two_block(n, seed);
        for h in [
            PriorHyper::default(),
            PriorHyper::new(1.3, 0.7, 2.1).unwrap(),
        ] {
            let offsets: Vec<f64> = all_labellings(n, k)
                .map(|e| {
                    let qb = q_bayes(&block_counts(&g, &e).unwrap(), &h);
                    (n * n) as f64 * qb - log_joint(&g, &e, &h)
                })
                .collect();
            let first = offsets[0];
            for off in &offsets {
                assert!((off - first).abs() < 1e-10, "n={n} k={k}: {off} vs {first}");
            }
        }
    }
}

#[test]
fn bayes_argmax_equals_posterior_mode() {
    let h = PriorHyper::default();
    for seed in 0..5 {
        let g = two_block(6, 10 + seed);
        let mut best_q = (f64::NEG_INFINITY, 0usize);
        let mut best_p = (f64::NEG_INFINITY, 0usize);
        for (idx, e) in all_labellings(6, 2).enumerate() {
            let q = q_bayes(&block_counts(&g, &e).unwrap(), &h);
            let p = log_joint(&g, &e, &h);
            if q > best_q.0 + 1e-12 {
                best_q = (q, idx);
            }
            if p > best_p.0 + 1e-10 {
                best_p = (p, idx);
            }
        }
        assert_eq!(best_q.1, best_p.1, "seed {seed}");
    }
}

#[test]
fn golden_values() {
    let g = Graph::from_edges(3, [(0, 1)]).unwrap();
    let one = Labelling::uniform(3, 1).unwrap();
    let c = block_counts(&g, &one).unwrap();
    let tau_third = (1.0f64 / 3.0) * (1.0f64 / 3.0).ln() + (2.0f64 / 3.0) * (2.0f64 / 3.0).ln();
    assert!((q_likelihood(&c) - 3.0 * tau_third / 9.0).abs() < 1e-15);
    assert!((q_likelihood(&c) + 0.212_171).abs() < 1e-6);

    let g = Graph::empty(4);
    let e = Labelling::from_one_based(&[1, 1, 2, 2], 2).unwrap();
    let c = block_counts(&g, &e).unwrap();
    let want = 4.0 * 2f64.ln() / 16.0 - 0.25;
    assert!((q_prior(&c, 0.5) - want).abs() < 1e-15);
}

#[test]
fn tilde_tracks_likelihood() {
    // |𝕃 − Q_ML| shrinks like log(n)/n on random labellings.
    let mut rng = blockmod::rng_from_seed(8);
    let mut scaled = Vec::new();
    for n in [50, 100, 200, 400] {
        let g = two_block(n, n as u64);
        let mut worst = 0f64;
        for _ in 0..50 {
            let e = Labelling::random(n, 3, &mut rng).unwrap();
            let c = block_counts(&g, &e).unwrap();
            worst = worst.max((ll_tilde(&c) - q_likelihood(&c)).abs());
        }
        let nf = n as f64;
        scaled.push(worst * nf / nf.ln());
    }
    let top = scaled.iter().cloned().fold(0.0, f64::max);
    assert!(top < 1.0, "{scaled:?}");
    assert!(scaled.last().unwrap() <= &(scaled[0] * 1.5), "{scaled:?}");
}

/// Edges, labels, class count, relabelling.
type Instance = (Vec<(usize, usize)>, Vec<u32>, usize, Vec<usize>);

fn small_instance() -> impl Strategy<Value = Instance> {
    (2usize..12, 1usize..5).prop_flat_map(|(n, k)| {
        (
            proptest::collection::vec((0..n, 0..n), 0..30),
            proptest::collection::vec(0..k as u32, n),
            Just(k),
            Just((0..k).collect::<Vec<_>>()).prop_shuffle(),
        )
    })
}

proptest! {
    #[test]
    fn objectives_permutation_invariant((edges, labels, k, sigma) in small_instance()) {
        let n = labels.len();
        let g = Graph::from_edges(n, edges.into_iter().filter(|(i, j)| i != j)).unwrap();
        let e = Labelling::new(labels, k).unwrap();
        let f = e.relabelled(&sigma).unwrap();
        let (c, d) = (block_counts(&g, &e).unwrap(), block_counts(&g, &f).unwrap());
        let h = PriorHyper::default();
        for (x, y) in [
            (q_bayes(&c, &h), q_bayes(&d, &h)),
            (q_likelihood(&c), q_likelihood(&d)),
            (q_prior(&c, 0.5), q_prior(&d, 0.5)),
            (ll_tilde(&c), ll_tilde(&d)),
        ] {
            prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0), "{} vs {}", x, y);
        }
    }
}
