//! Local-basis throughput: data-parallel column map against the sequential
//! fallback (a single-thread pool when the `parallel` feature is on, the
//! plain loop when it is off).
//!
//! Run with `cargo bench -p loclag`; add `--no-default-features` to measure
//! the fully sequential build.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use loclag::graph::{build_graph, graph_ball, normalized_laplacian, Metric, Partition};
use loclag::harness::fibonacci_sphere;
use loclag::par::run_serial;
use loclag::solver::SolverConfig;
use loclag::{compute_lagrange_basis, compute_local_basis};

struct Instance {
    laplacian: loclag::Laplacian,
    partition: Partition,
    neighborhoods: Vec<loclag::Neighborhood>,
}

fn sphere_instance(n: usize, r_outer_mult: f64) -> Instance {
    let cloud = fibonacci_sphere(n).unwrap();
    let theta = loclag::min_pairwise_distance(&cloud, &Metric::Euclidean).unwrap();
    let graph = build_graph(&cloud, &Metric::Euclidean, 3.0 * theta).unwrap();
    let laplacian = normalized_laplacian(&graph).unwrap();
    let partition = Partition::from_known(n, (0..n).filter(|i| i % 3 != 0)).unwrap();
    let neighborhoods = partition
        .known()
        .iter()
        .map(|&v| graph_ball(&graph, v, r_outer_mult * theta, &partition).unwrap())
        .collect();
    Instance {
        laplacian,
        partition,
        neighborhoods,
    }
}

fn bench_local_basis(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("local_basis");
    group.sample_size(10);
    for &n in &[250usize, 500, 1000] {
        let inst = sphere_instance(n, 8.0);
        group.bench_with_input(BenchmarkId::new("parallel", n), &inst, |b, inst| {
            b.iter(|| {
                compute_local_basis(
                    black_box(&inst.laplacian),
                    &inst.partition,
                    &inst.neighborhoods,
                    &cfg,
                )
                .unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &inst, |b, inst| {
            b.iter(|| {
                run_serial(|| {
                    compute_local_basis(
                        black_box(&inst.laplacian),
                        &inst.partition,
                        &inst.neighborhoods,
                        &cfg,
                    )
                    .unwrap()
                })
            })
        });
    }
    group.finish();
}

fn bench_lagrange_basis(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("lagrange_basis");
    group.sample_size(10);
    for &n in &[250usize, 500, 1000] {
        let inst = sphere_instance(n, 8.0);
        group.bench_with_input(BenchmarkId::new("parallel", n), &inst, |b, inst| {
            b.iter(|| {
                compute_lagrange_basis(black_box(&inst.laplacian), &inst.partition, &cfg).unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &inst, |b, inst| {
            b.iter(|| {
                run_serial(|| {
                    compute_lagrange_basis(black_box(&inst.laplacian), &inst.partition, &cfg)
                        .unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_local_basis, bench_lagrange_basis);
criterion_main!(benches);
