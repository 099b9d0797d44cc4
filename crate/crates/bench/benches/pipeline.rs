use std::hint::black_box;

use bsvsim_core::config::SolverSpec;
use bsvsim_core::fock::{compare_desk_case, desk_cases};
use bsvsim_core::{decompose, default_grid, sample_kernel, PixelGrid, PixelModes, PumpBeam, RadialGrid, Segment, Setup};
use criterion::{criterion_group, criterion_main, Criterion};

fn two_crystals() -> Setup {
    Setup::new(
        PumpBeam::new(354.7, 120.0, 1.0).unwrap(),
        vec![Segment::crystal(1.0, 0.0), Segment::gap(3.0), Segment::crystal(1.0, 0.0)],
        2.0,
    )
    .unwrap()
}

fn spec() -> SolverSpec {
    SolverSpec { harmonic_loss_tolerance: 1.0, ..SolverSpec::default() }
}

fn kernel_sampling(c: &mut Criterion) {
    let s = two_crystals();
    let grid = RadialGrid::new(64, default_grid(&s).q_max, 16);
    c.bench_function("sample_kernel 64x16", |b| b.iter(|| sample_kernel(black_box(&s), &grid, 1.0).unwrap()));
}

fn decomposition(c: &mut Criterion) {
    let s = two_crystals();
    let grid = RadialGrid::new(64, default_grid(&s).q_max, 16);
    let kernel = sample_kernel(&s, &grid, 1.0).unwrap();
    c.bench_function("decompose 64x16", |b| b.iter(|| decompose(black_box(&kernel), &spec()).unwrap()));

    let walkoff = Setup::new(
        PumpBeam::new(354.7, 35.0, 1.0).unwrap(),
        vec![Segment::crystal(1.0, 25.0), Segment::gap(8.0), Segment::crystal(1.0, 25.0)],
        10.0,
    )
    .unwrap();
    let joint = sample_kernel(&walkoff, &RadialGrid::new(16, 0.32, 6), 1.0).unwrap();
    c.bench_function("decompose joint 16x6", |b| b.iter(|| decompose(black_box(&joint), &spec()).unwrap()));
}

fn moments(c: &mut Criterion) {
    let s = two_crystals();
    let grid = RadialGrid::new(64, default_grid(&s).q_max, 16);
    let modes = decompose(&sample_kernel(&s, &grid, 1.0).unwrap(), &spec()).unwrap();
    let pixels = PixelGrid::cut(10.0, 0.1, 0.0, 1);
    c.bench_function("project 201 pixels", |b| {
        b.iter(|| PixelModes::project(black_box(&modes), &pixels, s.signal_wavenumber).unwrap())
    });
    let pm = PixelModes::project(&modes, &pixels, s.signal_wavenumber).unwrap();
    c.bench_function("moment tables 201 pixels", |b| b.iter(|| black_box(&pm).moments(2.0).tables()));
}

fn oracle(c: &mut Criterion) {
    let case = desk_cases(1.0).remove(3);
    c.bench_function("fock oracle two pairs, cutoff 60", |b| b.iter(|| compare_desk_case(black_box(&case), 60, false).unwrap()));
}

criterion_group!(benches, kernel_sampling, decomposition, moments, oracle);
criterion_main!(benches);
