//! Hot kernels under the active backend. Build once with the default
//! `parallel` feature and once with `--no-default-features`; the benchmark
//! ids carry the backend name so both runs land side by side in the report.

use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fracbq::io::{generate_data, DataFamily, DataSpec};
use fracbq::operators::{kernel_physical, leray_project, KernelOptions, MultiplierSpec, PointLattice};
use fracbq::solver::{picard_solve, SolverConfig};
use fracbq::spaces::{heat_extension, parabolic_morrey_norm, uniform_times, SupOptions};
use fracbq::{make_grid, ScalarField, VectorField};

fn backend() -> String {
    if cfg!(feature = "parallel") {
        format!("parallel-{}", fracbq::par::threads())
    } else {
        "sequential".into()
    }
}

fn field(n: usize) -> ScalarField {
    let g = make_grid(2, n, 2.0 * PI).unwrap();
    ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin() * (2.0 * x[1]).cos() + (x[0] + x[1]).cos())
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_round_trip");
    for n in [64, 256] {
        let f = field(n);
        group.bench_with_input(BenchmarkId::new(backend(), n), &f, |b, f| b.iter(|| f.forward().inverse()));
    }
    group.finish();
}

fn leray(c: &mut Criterion) {
    let f = field(256);
    let v = VectorField::new(vec![f.clone(), f.scale(0.5)]).unwrap();
    c.bench_with_input(BenchmarkId::new("leray_256", backend()), &v, |b, v| b.iter(|| leray_project(v)));
}

fn morrey(c: &mut Criterion) {
    let f = field(64);
    let traj = heat_extension(&f, 1.5, uniform_times(1.0, 16).unwrap()).unwrap();
    let opts = SupOptions::parabolic();
    c.bench_with_input(BenchmarkId::new("parabolic_morrey_64x17", backend()), &traj, |b, t| {
        b.iter(|| parabolic_morrey_norm(t, 6.0, 7.0, 1.5, &opts).unwrap())
    });
}

fn kernel(c: &mut Criterion) {
    let lattice = PointLattice::new(2, 128, 0.05).unwrap();
    let spec = MultiplierSpec::radial_power(0.0);
    c.bench_function(&format!("kernel_physical_128/{}", backend()), |b| {
        b.iter(|| kernel_physical(&spec, 1.5, 0.5, &lattice, KernelOptions::default()).unwrap())
    });
}

fn picard(c: &mut Criterion) {
    let config = SolverConfig {
        n: 32,
        nodes: 17,
        ..SolverConfig::default()
    };
    let data = generate_data(
        &DataSpec::new(DataFamily::GaussianBump, 1e-3).with_forces(1e-3, 1e-3),
        1,
        &config.grid().unwrap(),
        &config.times().unwrap(),
    )
    .unwrap();
    let mut group = c.benchmark_group("picard");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("solve_32x17", backend()), |b| {
        b.iter(|| picard_solve(&data, &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, transforms, leray, morrey, kernel, picard);
criterion_main!(benches);
