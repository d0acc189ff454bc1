use std::hint::black_box;

use blockmod::modularity::{ll_tilde, q_bayes, q_likelihood, PriorHyper, Scorer};
use blockmod::{block_counts, generate_sbm, rng_from_seed, Labelling, ModularityKind, SbmParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;

fn instance(n: usize) -> (blockmod::Graph, Labelling) {
    let params = SbmParams::new(
        vec![0.5, 0.5],
        DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.2, 0.8]),
    )
    .unwrap();
    generate_sbm(&params, n, 42).unwrap()
}

fn counts(c: &mut Criterion) {
    let mut group = c.benchmark_group("block_counts");
    for n in [100, 400] {
        let (g, z) = instance(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| block_counts(black_box(&g), black_box(&z)).unwrap())
        });
    }
    group.finish();
}

fn objectives(c: &mut Criterion) {
    let (g, _) = instance(400);
    let mut rng = rng_from_seed(1);
    let e = Labelling::random(400, 4, &mut rng).unwrap();
    let counts = block_counts(&g, &e).unwrap();
    let hyper = PriorHyper::default();
    c.bench_function("q_bayes/k4", |b| {
        b.iter(|| q_bayes(black_box(&counts), &hyper))
    });
    c.bench_function("q_likelihood/k4", |b| {
        b.iter(|| q_likelihood(black_box(&counts)))
    });
    c.bench_function("ll_tilde/k4", |b| b.iter(|| ll_tilde(black_box(&counts))));

    let scorer = Scorer::new(ModularityKind::Bayes(hyper), 400);
    let links = [3u64, 5, 0, 2];
    c.bench_function("move_delta/bayes/k4", |b| {
        b.iter(|| scorer.move_delta(black_box(&counts), 0, 2, black_box(&links)))
    });
}

criterion_group!(benches, counts, objectives);
criterion_main!(benches);
