//! Hot paths of the spectral core. Run once with default features and once
//! with `--no-default-features`; the group names carry the build flavour so
//! criterion keeps the two sets of results side by side.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dampwave::estimator::gaussian_field;
use dampwave::littlewood_paley::{besov_norm, BesovParams};
use dampwave::symbols::{Multiplier, Propagator};
use dampwave::Grid;

const FLAVOUR: &str = if cfg!(feature = "parallel") {
    "rayon"
} else {
    "sequential"
};

fn group<'a>(c: &'a mut Criterion, name: &str) -> criterion::BenchmarkGroup<'a, criterion::measurement::WallTime> {
    let mut g = c.benchmark_group(format!("{name}/{FLAVOUR}"));
    g.sample_size(10);
    g
}

fn fft(c: &mut Criterion) {
    let mut g = group(c, "fft_round_trip");
    for n in [256usize, 512, 1024] {
        let grid = Grid::new(2, n, 32.0).unwrap();
        let v = gaussian_field(&grid, 1.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &v, |b, v| {
            b.iter(|| {
                let w = v.clone();
                black_box(w.spectrum());
            })
        });
    }
    g.finish();
}

fn multiplier(c: &mut Criterion) {
    let mut g = group(c, "propagator_apply");
    for n in [256usize, 512, 1024] {
        let grid = Grid::new(2, n, 64.0).unwrap();
        let v = gaussian_field(&grid, 1.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &v, |b, v| {
            b.iter(|| {
                let m = Multiplier::sample(&grid, &Propagator { delta: 0.1, t: 4.0 }).unwrap();
                black_box(m.apply(v).unwrap())
            })
        });
    }
    g.finish();
}

fn dilation(c: &mut Criterion) {
    let mut g = group(c, "dilate");
    for n in [128usize, 256] {
        let grid = Grid::new(2, n, 32.0).unwrap();
        let v = gaussian_field(&grid, 1.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &v, |b, v| {
            b.iter(|| black_box(v.dilate(0.5).unwrap()))
        });
    }
    g.finish();
}

fn norms(c: &mut Criterion) {
    let mut g = group(c, "norms");
    let grid = Grid::new(2, 1024, 64.0).unwrap();
    let v = gaussian_field(&grid, 1.0);
    g.bench_function("lp_1.2", |b| b.iter(|| black_box(v.lp_norm(1.2).unwrap())));
    let params = BesovParams::new(1.0, 1.2, 2.0, 4).unwrap();
    g.bench_function("besov_j4", |b| b.iter(|| black_box(besov_norm(&v, &params).unwrap())));
    g.finish();
}

criterion_group!(benches, fft, multiplier, dilation, norms);
criterion_main!(benches);
