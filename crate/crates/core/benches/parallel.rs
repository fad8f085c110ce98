use std::hint::black_box;

use apet::fmo::{bundled_network, reference_parameters};
use apet::optimize::{
    geometric_grid, grid_sweep, linear_grid, random_search, temperature_sweep, ParameterBounds, SearchOptions, TemperatureModel,
};
use apet::{Execution, ModelOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_random_search(c: &mut Criterion) {
    let net = bundled_network();
    let bounds = ParameterBounds::default();
    let mut group = c.benchmark_group("random_search");
    group.sample_size(10);
    for (name, execution) in MODES {
        let opts = SearchOptions { execution, refine: false, ..Default::default() };
        group.bench_with_input(BenchmarkId::new(name, 500), &opts, |b, opts| {
            b.iter(|| random_search(&net, &bounds, 500, black_box(17), opts).unwrap())
        });
    }
    group.finish();
}

fn bench_grid_sweep(c: &mut Criterion) {
    let net = bundled_network();
    let rates = reference_parameters().rates;
    let h28 = linear_grid(0.0, 600.0, 25);
    let omega8 = linear_grid(-500.0, 0.0, 21);
    let mut group = c.benchmark_group("grid_sweep");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::new(name, h28.len() * omega8.len()), |b| {
            b.iter(|| grid_sweep(&net, black_box(&h28), &omega8, &rates, &ModelOptions::default(), execution).unwrap())
        });
    }
    group.finish();
}

fn bench_temperature_sweep(c: &mut Criterion) {
    let net = bundled_network();
    let model = TemperatureModel::new(77.0, reference_parameters()).unwrap();
    let temps = geometric_grid(20.0, 1000.0, 200);
    let mut group = c.benchmark_group("temperature_sweep");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::new(name, temps.len()), |b| {
            b.iter(|| temperature_sweep(&net, &model, black_box(&temps), &ModelOptions::default(), execution).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_random_search, bench_grid_sweep, bench_temperature_sweep);
criterion_main!(benches);
