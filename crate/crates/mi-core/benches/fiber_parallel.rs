use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mi_core::linalg::{hermitian_eig, C64, CMat};
use mi_core::measure::{VectorField, WeightedGrid};
use mi_core::par::{map_indices, map_indices_seq};
use mi_core::solve_problem1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_data(fibers: usize, m: usize, n: usize, seed: u64) -> Vec<VectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Arc::new(WeightedGrid::indexed(fibers).unwrap());
    (0..m)
        .map(|_| {
            let values = (0..fibers)
                .map(|_| {
                    (0..n)
                        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            VectorField::new(grid.clone(), values).unwrap()
        })
        .collect()
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// The per-fiber eigensolves are the data-parallel core; compare the
/// default map (rayon when the `parallel` feature is on) against the
/// always-sequential fallback on the same workload.
fn bench_fiber_eig(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fibers = 256;
    let matrices: Vec<CMat> = (0..fibers).map(|_| random_hermitian(6, &mut rng)).collect();

    let mut group = c.benchmark_group("per_fiber_eig");
    group.bench_function(BenchmarkId::new("default_map", fibers), |b| {
        b.iter(|| map_indices(fibers, |i| hermitian_eig(&matrices[i]).unwrap().0))
    });
    group.bench_function(BenchmarkId::new("sequential_map", fibers), |b| {
        b.iter(|| map_indices_seq(fibers, |i| hermitian_eig(&matrices[i]).unwrap().0))
    });
    group.finish();
}

fn bench_solve_problem1(c: &mut Criterion) {
    let data = random_data(512, 5, 8, 2);
    c.bench_function("solve_problem1_512x5x8", |b| {
        b.iter(|| solve_problem1(&data, 3, 1e-10).unwrap())
    });
}

criterion_group!(benches, bench_fiber_eig, bench_solve_problem1);
criterion_main!(benches);
