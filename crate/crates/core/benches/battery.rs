use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use quadstab::battery::{run_suite, BatteryConfig};
use quadstab::checker::full_margins;
use quadstab::generate::{random_catalog, trial_rng, GeneratorConfig};
use quadstab::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite");
    group.sample_size(10);
    for criterion in [1u8, 3, 7] {
        for (name, exec) in MODES {
            let cfg = BatteryConfig { trials: Some(200), exec, ..BatteryConfig::default() };
            group.bench_with_input(BenchmarkId::new(name, criterion), &cfg, |b, cfg| {
                b.iter(|| run_suite(criterion, cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn chain_enumeration(c: &mut Criterion) {
    // Large catalogs, where the chain family dominates.
    let cfg = GeneratorConfig { max_elements: 12, max_rank: 12, ..GeneratorConfig::default() };
    let catalogs: Vec<_> = (0..20).map(|i| random_catalog(&mut trial_rng(9, i), &cfg).unwrap()).collect();
    let mut group = c.benchmark_group("full_margins");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| catalogs.iter().map(|cat| full_margins(cat, exec).len()).sum::<usize>())
        });
    }
    group.finish();
}

criterion_group!(benches, suites, chain_enumeration);
criterion_main!(benches);
