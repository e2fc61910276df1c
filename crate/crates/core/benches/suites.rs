use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qg_core::diffops::run_suite;
use qg_core::par::Execution;
use qg_core::phase::Pencil;
use qg_core::verify::{run_verify, Mode, VerifyConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn point_checks(c: &mut Criterion) {
    let mut group = c.benchmark_group("point_checks");
    group.sample_size(10);
    for (mode, n) in [(Mode::Exact, 6usize), (Mode::Float, 8)] {
        let mut cfg = VerifyConfig::new(Pencil::standard(n).unwrap());
        cfg.mode = mode;
        cfg.trials = 16;
        cfg.diffops = false;
        for (label, exec) in MODES {
            cfg.exec = exec;
            let id = BenchmarkId::new(label, format!("{mode:?}/N={n}"));
            group.bench_with_input(id, &cfg, |b, cfg| b.iter(|| black_box(run_verify(cfg).unwrap())));
        }
    }
    group.finish();
}

fn operator_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator_suite");
    group.sample_size(10);
    let pen = Pencil::standard(5).unwrap();
    for (label, exec) in MODES {
        group.bench_function(BenchmarkId::new(label, "N=5/dmax=2"), |b| {
            b.iter(|| black_box(run_suite(&pen, 2, exec, None).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, point_checks, operator_suite);
criterion_main!(benches);
