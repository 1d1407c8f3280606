//! Parallel core against a single worker on the kernels that fan out:
//! element assembly, a resolvent sector sweep and a small experiment grid.
//!
//! `cargo bench -p maxreg-core` compares all threads with a one-thread pool;
//! `cargo bench -p maxreg-core --no-default-features` times the plain
//! sequential fallback.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxreg_core::fem::{assemble, CoefficientField, FeSpace};
use maxreg_core::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use maxreg_core::mesh::generate_square_mesh;
use maxreg_core::par;
use maxreg_core::spectral::{sector_sweep, EstimateOptions, SectorSample};

fn modes() -> Vec<(&'static str, usize)> {
    let all = par::current_threads();
    if par::is_parallel() && all > 1 {
        vec![("parallel", all), ("sequential", 1)]
    } else {
        vec![("sequential", 1)]
    }
}

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    let coeff = CoefficientField::from_descriptor("anisotropic").expect("built-in field");
    for n in [32, 64] {
        let space = Arc::new(FeSpace::new(Arc::new(generate_square_mesh(n).unwrap()), 2).unwrap());
        for (mode, threads) in modes() {
            group.bench_with_input(BenchmarkId::new(mode, format!("P2 n={n}")), &space, |b, s| {
                b.iter(|| par::with_threads(threads, || assemble(s, &coeff).unwrap()))
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sector_sweep");
    group.sample_size(10);
    let coeff = CoefficientField::from_descriptor("anisotropic").expect("built-in field");
    let space = Arc::new(FeSpace::new(Arc::new(generate_square_mesh(16).unwrap()), 1).unwrap());
    let pair = assemble(&space, &coeff).unwrap();
    let sample = SectorSample::with_counts(0.3 * std::f64::consts::PI, 1.0, 1e5, 8).unwrap();
    let opts = EstimateOptions {
        restarts: 4,
        iters: 15,
        trials: 4,
        seed: 1,
    };
    for (mode, threads) in modes() {
        group.bench_function(BenchmarkId::new(mode, "q=4 n=16"), |b| {
            b.iter(|| par::with_threads(threads, || sector_sweep(&pair, 4.0, &sample, &opts, 0).unwrap()))
        });
    }
    group.finish();
}

fn experiment(c: &mut Criterion) {
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Maxreg,
        ks: (1..=6).collect(),
        base_n: 8,
        levels: 3,
        tau0: 0.05,
        ..ExperimentConfig::default()
    };
    for (mode, threads) in modes() {
        group.bench_function(BenchmarkId::new(mode, "maxreg 3 levels x 6 k"), |b| {
            b.iter(|| par::with_threads(threads, || run_experiment(&cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, sweep, experiment);
criterion_main!(benches);
