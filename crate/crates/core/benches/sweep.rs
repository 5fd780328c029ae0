use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use einstein_lab::conditions::{auto_centers, measure_condition, verify_inequalities, Lab, SweepGrid, Tag};
use einstein_lab::walker::{mc_exit_time_with, WalkConfig};
use einstein_lab::{lattice_box, sierpinski_gasket, Exec, Fixture};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn grid(fx: &Fixture, radii: Vec<u32>) -> SweepGrid {
    SweepGrid::new(&fx.graph, auto_centers(&fx.graph, fx.center.unwrap()).unwrap(), radii).unwrap()
}

fn inequality_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_inequalities");
    group.sample_size(10);
    for (name, fx) in [
        ("lattice_2_41", lattice_box(2, 41).unwrap()),
        ("gasket_5", sierpinski_gasket(5).unwrap()),
    ] {
        let grid = grid(&fx, vec![2, 4, 8]);
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, name), &grid, |b, grid| {
                // Fresh lab each time so memoized solves are not reused.
                b.iter(|| verify_inequalities(&Lab::new(&fx.graph, exec), black_box(grid)).unwrap())
            });
        }
    }
    group.finish();
}

fn harnack_sweep(c: &mut Criterion) {
    let fx = lattice_box(2, 41).unwrap();
    let grid = grid(&fx, vec![2, 3, 4, 5]);
    let mut group = c.benchmark_group("measure_harnack");
    group.sample_size(10);
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| {
            b.iter(|| measure_condition(&Lab::new(&fx.graph, exec), black_box(&grid), Tag::H).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let fx = lattice_box(2, 41).unwrap();
    let x = fx.center.unwrap();
    let cfg = WalkConfig::for_radius(7, 20_000, 8);
    let mut group = c.benchmark_group("mc_exit_time");
    group.sample_size(10);
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| {
            b.iter(|| mc_exit_time_with(&fx.graph, x, 8, black_box(&cfg), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, inequality_suite, harnack_sweep, monte_carlo);
criterion_main!(benches);
