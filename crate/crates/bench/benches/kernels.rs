use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kgpovm_bench::{gaussian, grid};
use kgpovm_core::fft::to_position;
use kgpovm_core::mantle::{mantle_flux, MantleSpec};
use kgpovm_core::observables::{m_povm_current, nw_probability, terno_probability};
use kgpovm_core::{Frame, Region, SliceRef};

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft");
    for (dim, n) in [(1, 4096), (2, 256), (3, 64)] {
        let psi = gaussian(grid(dim, n));
        group.bench_with_input(BenchmarkId::new(format!("{dim}d"), n), &psi, |b, psi| {
            b.iter(|| to_position(psi.grid(), black_box(psi.amplitudes())))
        });
    }
    group.finish();
}

fn probabilities(c: &mut Criterion) {
    let mut group = c.benchmark_group("probability");
    group.sample_size(10);
    let psi = gaussian(grid(3, 64));
    let slice = SliceRef::rest(0.5);
    let ball = Region::ball([0.2, 0.0, 0.0], 1.0);
    group.bench_function("nw 64^3", |b| {
        b.iter(|| nw_probability(&psi, &slice, black_box(&ball)).unwrap())
    });
    group.bench_function("terno 64^3", |b| {
        b.iter(|| terno_probability(&psi, &slice, black_box(&ball)).unwrap())
    });
    let gen = Frame::from_velocity([0.2, 0.1, 0.0]).unwrap();
    let boosted = SliceRef::new(Frame::from_velocity([0.3, 0.0, 0.0]).unwrap(), 0.5);
    group.bench_function("m current 64^3", |b| {
        b.iter(|| m_povm_current(&psi, &gen, &boosted, black_box(&ball)).unwrap())
    });
    group.finish();
}

fn resampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("resample");
    group.sample_size(10);
    for (dim, n) in [(2, 128), (3, 64)] {
        let psi = gaussian(grid(dim, n));
        let frame = Frame::from_velocity([0.4, 0.0, 0.0]).unwrap();
        group.bench_with_input(
            BenchmarkId::new(format!("boost {dim}d"), n),
            &psi,
            |b, psi| b.iter(|| psi.in_frame(black_box(&frame)).unwrap()),
        );
    }
    group.finish();
}

fn mantle(c: &mut Criterion) {
    let mut group = c.benchmark_group("mantle");
    group.sample_size(10);
    let psi = gaussian(grid(3, 32));
    let spec = MantleSpec::ball([0.0; 3], 1.0, 0.0, 1.0);
    group.bench_function("flux 32^3", |b| {
        b.iter(|| mantle_flux(&psi, black_box(&spec)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, fft, probabilities, resampling, mantle);
criterion_main!(benches);
