use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use vortex_bench::{domains, spiral};
use vortex_core::dynamics::velocity_field;

fn kernel_values(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_values");
    for (name, domain) in domains() {
        let config = spiral(&domain, 2);
        let (x, y) = (config.positions[0], config.positions[1]);
        group.bench_function(name, |b| b.iter(|| domain.kernel_values(black_box(x), black_box(y)).unwrap()));
    }
    group.finish();
}

fn velocity(c: &mut Criterion) {
    let mut group = c.benchmark_group("velocity_field");
    for (name, domain) in domains() {
        for n in [4, 16, 64] {
            let config = spiral(&domain, n);
            group.bench_with_input(BenchmarkId::new(name, n), &config, |b, config| {
                b.iter(|| velocity_field(&domain, black_box(config)).unwrap())
            });
        }
    }
    group.finish();
}

fn boundary_geometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("boundary_projection");
    for (name, domain) in domains().into_iter().skip(1) {
        let x = spiral(&domain, 1).positions[0];
        group.bench_function(name, |b| b.iter(|| domain.boundary_projection(black_box(x)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, kernel_values, velocity, boundary_geometry);
criterion_main!(benches);
