use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ris_ofdm::harness::run_monte_carlo;
use ris_ofdm::{Axis, ConfigFile, Execution, Scenario, Scheme};

fn monte_carlo(c: &mut Criterion) {
    let cfg = ConfigFile::default().into_system().unwrap();
    let cases = [
        (Scheme::Proposed, Axis::Q, vec![1.0, 5.0, 20.0]),
        (Scheme::RandomPhase, Axis::T, vec![100.0]),
        (Scheme::AoPerfectCsi, Axis::T, vec![100.0]),
    ];
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    for (scheme, axis, values) in cases {
        let mut sc = Scenario::new(scheme, axis, values);
        sc.trials = 32;
        for (label, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel { workers: None }),
        ] {
            group.bench_with_input(BenchmarkId::new(label, scheme), &sc, |b, sc| {
                b.iter(|| black_box(run_monte_carlo(sc, &cfg, exec).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, monte_carlo);
criterion_main!(benches);
