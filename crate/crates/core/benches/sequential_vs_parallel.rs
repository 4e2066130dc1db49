use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use optquad_core::convergence_lab::{default_doubling_grid, run_sweep_with};
use optquad_core::error_norm::norm_sq_bruteforce_with;
use optquad_core::rules::{builtin_integrands, optimal_rule, Grid, RuleKind};
use optquad_core::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bruteforce_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("norm_sq_bruteforce");
    for n in [100usize, 400, 1000] {
        let rule = optimal_rule(Grid::new(n).unwrap());
        for (label, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(label, n), &rule, |b, rule| {
                b.iter(|| norm_sq_bruteforce_with(black_box(rule), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn convergence_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_sweep");
    let fs = builtin_integrands();
    let mut ns = default_doubling_grid();
    ns.extend([512, 1024, 2048, 4096]);
    for (label, exec) in MODES {
        group.bench_function(label, |b| {
            b.iter(|| run_sweep_with(&RuleKind::ALL, black_box(&fs), &ns, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bruteforce_norm, convergence_sweep);
criterion_main!(benches);
