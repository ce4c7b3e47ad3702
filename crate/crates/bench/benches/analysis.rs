use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rxnident_bench::{confoundable_pairs, networks};
use rxnident_core::random::NetworkShape;
use rxnident_core::{check_confoundability, check_identifiability, ModelSemantics};

fn identifiability(c: &mut Criterion) {
    let mut group = c.benchmark_group("identifiability");
    for species in [2, 4, 6] {
        let shape = NetworkShape {
            max_species: species,
            max_reactions: 3 * species,
            ..NetworkShape::default()
        };
        let nets = networks(50, &shape, 7);
        for model in [ModelSemantics::Ode, ModelSemantics::Sde] {
            group.bench_with_input(
                BenchmarkId::new(format!("{:?}", model).to_lowercase(), species),
                &nets,
                |b, nets| {
                    b.iter(|| {
                        nets.iter()
                            .filter(|n| check_identifiability(n, model).unwrap().identifiable)
                            .count()
                    })
                },
            );
        }
    }
    group.finish();
}

fn confoundability(c: &mut Criterion) {
    let pairs = confoundable_pairs(50, &NetworkShape::default(), 11);
    c.bench_function("confoundability/sde/50 pairs", |b| {
        b.iter(|| {
            pairs
                .iter()
                .filter(|(x, y)| {
                    check_confoundability(x, y, ModelSemantics::Sde)
                        .unwrap()
                        .confoundable
                })
                .count()
        })
    });
}

criterion_group!(benches, identifiability, confoundability);
criterion_main!(benches);
