//! Compares the rayon-backed sweeps against sequential execution.
//!
//! In a default build every workload runs twice: on the global pool and
//! inside a one-thread pool (same code path, no concurrency). Building with
//! `--no-default-features` benchmarks the plain iterator fallback instead.

use bergman_core::geometry::normalization_mc;
use bergman_core::par;
use bergman_core::qft::{tadpole_direct, FieldParams, Regulator};
use bergman_core::spectral::{default_r_grid, residual_table};
use bergman_core::star::{default_fit_params, fit_deformation_coeffs};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

type Workload = (&'static str, Box<dyn Fn() + Send + Sync>);

fn workloads() -> Vec<Workload> {
    let grid = default_r_grid();
    let params = default_fit_params().unwrap();
    let field = FieldParams::massless(400, 0.1).unwrap();
    vec![
        (
            "monte_carlo_measure",
            Box::new(|| {
                black_box(normalization_mc(6, 200_000, 42).unwrap());
            }),
        ),
        (
            "spectral_residuals",
            Box::new(move || {
                let ns: Vec<u32> = (3..=24).collect();
                black_box(residual_table(&ns, 2, &grid).unwrap());
            }),
        ),
        (
            "deformation_fit",
            Box::new(move || {
                black_box(fit_deformation_coeffs(&[4, 8, 12, 16], &params).unwrap());
            }),
        ),
        (
            "tadpole_direct",
            Box::new(move || {
                black_box(tadpole_direct(&field, Regulator::LowerCutoff).unwrap());
            }),
        ),
    ]
}

fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweeps");
    group.sample_size(10);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    for (name, work) in workloads() {
        if par::is_parallel() {
            group.bench_function(format!("{name}/parallel"), |b| b.iter(&work));
            group.bench_function(format!("{name}/single_thread"), |b| b.iter(|| single.install(&work)));
        } else {
            group.bench_function(format!("{name}/sequential"), |b| b.iter(&work));
        }
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
