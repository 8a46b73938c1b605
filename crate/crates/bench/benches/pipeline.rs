use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sphgof::alternatives::{segment_map, SegmentParams};
use sphgof::empirical::{spacings_transform, ProcessGrid};
use sphgof::harmonics::{
    analyze_map, simulate_gaussian_coeffs_seeded, synthesize_map, AngularPowerSpectrum, SphereGrid,
};
use sphgof::limitproc::build_sampler;
use sphgof::testing::{ks_statistic, ks_statistic_from_rows};

fn bench_statistic(c: &mut Criterion) {
    let mut group = c.benchmark_group("sup-statistic");
    for lmax in [50u32, 200, 500] {
        let spectrum = AngularPowerSpectrum::flat(lmax);
        let coeffs = simulate_gaussian_coeffs_seeded(&spectrum, 7);
        let (_, rows) = spacings_transform(&coeffs).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(lmax), &rows, |b, rows| {
            b.iter(|| ks_statistic_from_rows(rows))
        });
    }
    group.finish();
}

fn bench_full_replication(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate-transform-statistic");
    group.sample_size(20);
    for lmax in [200u32, 500] {
        let spectrum = AngularPowerSpectrum::flat(lmax);
        group.bench_with_input(BenchmarkId::from_parameter(lmax), &spectrum, |b, sp| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                let coeffs = simulate_gaussian_coeffs_seeded(sp, seed);
                ks_statistic(&coeffs).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_limit_sampler(c: &mut Criterion) {
    let grid = ProcessGrid::regular(128, 64).unwrap();
    let sampler = build_sampler(&grid, 0.0).unwrap();
    c.bench_function("limit-field-draw-128x64", |b| {
        let mut i = 0u64;
        b.iter(|| {
            i += 1;
            sampler.sample_field_seeded(1, i)
        })
    });
}

fn bench_sphere_transforms(c: &mut Criterion) {
    let lmax = 100u32;
    let spectrum = AngularPowerSpectrum::flat(lmax);
    let coeffs = simulate_gaussian_coeffs_seeded(&spectrum, 3);
    let grid = SphereGrid::gauss_legendre(lmax as usize + 1, 2 * lmax as usize + 1).unwrap();
    let map = synthesize_map(&coeffs, &grid);
    let mut group = c.benchmark_group("sphere-transforms");
    group.sample_size(20);
    group.bench_function("synthesize-L100", |b| {
        b.iter(|| synthesize_map(&coeffs, &grid))
    });
    group.bench_function("analyze-L100", |b| {
        b.iter(|| analyze_map(&map, lmax).unwrap())
    });
    group.finish();
}

fn bench_segment_map(c: &mut Criterion) {
    let grid = SphereGrid::gauss_legendre(101, 201).unwrap();
    let params = SegmentParams::default();
    c.bench_function("segment-map-101x201", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            let mut rng = sphgof::seed::stream(seed, "bench", &[]);
            segment_map(&params, &grid, &mut rng)
        })
    });
}

criterion_group!(
    benches,
    bench_statistic,
    bench_full_replication,
    bench_limit_sampler,
    bench_sphere_transforms,
    bench_segment_map
);
criterion_main!(benches);
