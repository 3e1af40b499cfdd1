use criterion::{black_box, criterion_group, criterion_main, BenchmarkId as Id, Criterion};
use pairnet_core::datasets::{gen_test, gen_train};
use pairnet_core::linsolve::{solve_spd, DenseSystem};
use pairnet_core::selection::{select_model, SelectionConfig};
use pairnet_core::trainer::FitConfig;
use pairnet_core::{fit, BenchmarkId, Partition};

fn fit_partitions(c: &mut Criterion) {
    let train = gen_train(BenchmarkId::F2);
    let config = FitConfig::new(vec![0.1, 0.1, 0.8]);
    let mut group = c.benchmark_group("fit");
    for counts in [[2, 2, 2], [4, 4, 4], [6, 6, 6]] {
        let partition = Partition::uniform(train.domain(), &counts).unwrap();
        group.bench_with_input(Id::from_parameter(partition.label()), &partition, |b, p| {
            b.iter(|| fit(black_box(&train), p, &config).unwrap())
        });
    }
    group.finish();
}

fn forward(c: &mut Criterion) {
    let train = gen_train(BenchmarkId::F3);
    let test = gen_test(BenchmarkId::F3);
    let partition = Partition::uniform(train.domain(), &[6, 6, 6]).unwrap();
    let (model, _) = fit(&train, &partition, &FitConfig::new(vec![0.1, 0.1, 0.8])).unwrap();
    c.bench_function("forward_batch 6859 rows", |b| b.iter(|| model.forward_batch(black_box(test.inputs()))));
}

fn solve(c: &mut Criterion) {
    // A 16-parameter system, the size of one three-input subspace.
    let mut system = DenseSystem::zeros(16);
    for i in 0..200 {
        let phi: Vec<f64> = (0..16).map(|j| ((i * 7 + j * 3) % 11) as f64 / 11.0).collect();
        system.accumulate(&phi, i as f64 * 0.1);
    }
    c.bench_function("solve_spd d=16", |b| b.iter(|| solve_spd(black_box(&system), 1e-10).unwrap()));
}

fn selection(c: &mut Criterion) {
    let train = gen_train(BenchmarkId::F1);
    let config = SelectionConfig::new(3, 4, (2, 6), 0);
    let mut group = c.benchmark_group("select");
    group.sample_size(10);
    group.bench_function("5 candidates", |b| b.iter(|| select_model(black_box(&train), &config).unwrap()));
    group.finish();
}

criterion_group!(benches, fit_partitions, forward, solve, selection);
criterion_main!(benches);
