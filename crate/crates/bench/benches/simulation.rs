use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rxnident_bench::{dimerization, immigration_death};
use rxnident_core::langevin::{simulate_endpoints, simulate_path};
use rxnident_core::{BoxDomain, EmConfig};

fn single_path(c: &mut Criterion) {
    let gc = dimerization();
    let domain = BoxDomain::new(vec![0.0, 0.0], vec![1e4, 1e4]).unwrap();
    let cfg = EmConfig::new(1e-3, 1.0, 3);
    c.bench_function("path/dimerization/1000 steps", |b| {
        b.iter(|| simulate_path(&gc, &[10.0, 10.0], &domain, &cfg).unwrap())
    });
}

fn endpoints(c: &mut Criterion) {
    let gc = immigration_death();
    let domain = BoxDomain::new(vec![0.0], vec![200.0]).unwrap();
    let cfg = EmConfig::new(1e-3, 0.5, 5);
    let mut group = c.benchmark_group("endpoints/immigration-death");
    group.sample_size(10);
    for paths in [100, 1000] {
        group.throughput(Throughput::Elements(paths as u64));
        group.bench_with_input(BenchmarkId::from_parameter(paths), &paths, |b, &n| {
            b.iter(|| simulate_endpoints(&gc, &[2.0], &domain, &cfg, n).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_path, endpoints);
criterion_main!(benches);
