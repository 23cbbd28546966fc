//! Rayon worker scaling against the sequential path on the Monte Carlo hot
//! loops, plus the density evaluator. Build with `--no-default-features` to
//! benchmark the fully sequential fallback through the same entry points.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use randpoly_core::atoms::AtomSpec;
use randpoly_core::density;
use randpoly_core::exec;
use randpoly_core::kernel::VarianceKernel;
use randpoly_core::mc;
use randpoly_core::profiles::{CoefficientProfile, ProfileKind};

fn bench_mc_count(c: &mut Criterion) {
    let profile = CoefficientProfile::new(ProfileKind::Kac, 64);
    let mut group = c.benchmark_group("mc_expected_count_n64_x200");
    group.sample_size(10);
    for workers in [1usize, 2, 4] {
        group.bench_with_input(
            BenchmarkId::from_parameter(workers),
            &workers,
            |b, &workers| {
                b.iter(|| {
                    exec::with_workers(Some(workers), || {
                        mc::mc_expected_count(
                            &profile,
                            AtomSpec::Gaussian { mean: 0.0 },
                            (f64::NEG_INFINITY, f64::INFINITY),
                            200,
                            7,
                        )
                        .unwrap()
                    })
                })
            },
        );
    }
    group.finish();
}

fn bench_density(c: &mut Criterion) {
    let kernel =
        VarianceKernel::from_profile(&CoefficientProfile::new(ProfileKind::Kac, 4096)).unwrap();
    c.bench_function("density_ek_n4096", |b| {
        b.iter(|| density::density_ek(&kernel, std::hint::black_box(0.97)).unwrap())
    });
}

fn bench_expected_count(c: &mut Criterion) {
    let kernel =
        VarianceKernel::from_profile(&CoefficientProfile::new(ProfileKind::Kac, 1024)).unwrap();
    let mut group = c.benchmark_group("expected_count_quadrature");
    group.sample_size(10);
    group.bench_function("kac_n1024_realline", |b| {
        b.iter(|| {
            density::expected_count_ek(&kernel, randpoly_core::quad::Interval::RealLine).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_mc_count, bench_density, bench_expected_count);
criterion_main!(benches);
