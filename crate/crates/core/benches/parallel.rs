use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use stbc_lab::analysis::{min_det_search_with, nvd_sampling_test, SearchOptions};
use stbc_lab::code::CodeDefinition;
use stbc_lab::exec::Execution;
use stbc_lab::sim::{run_cer, SimConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn mindet(c: &mut Criterion) {
    let code = CodeDefinition::builtin("C4").unwrap();
    let cons = code.constellation(4).unwrap();
    let mut g = c.benchmark_group("mindet_c4_support2");
    g.sample_size(10);
    for (name, execution) in MODES {
        let opts = SearchOptions { budget: None, execution };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(min_det_search_with(&code, &cons, 2, &opts).unwrap()))
        });
    }
    g.finish();
}

fn nvd(c: &mut Criterion) {
    let mut g = c.benchmark_group("nvd_1000");
    g.sample_size(10);
    for code_name in ["C4", "C6"] {
        let code = CodeDefinition::builtin(code_name).unwrap();
        for (name, execution) in MODES {
            g.bench_function(BenchmarkId::new(code_name, name), |b| {
                b.iter(|| black_box(nvd_sampling_test(&code, 1000, 50, 1, execution).unwrap()))
            });
        }
    }
    g.finish();
}

fn cer(c: &mut Criterion) {
    let code = CodeDefinition::builtin("C4").unwrap();
    let mut g = c.benchmark_group("cer_c4_512_trials");
    g.sample_size(10);
    for (name, execution) in MODES {
        let mut cfg = SimConfig::new(code.clone(), 4, 4, vec![12.0], 5);
        cfg.target_errors = 512;
        cfg.max_trials = 512;
        cfg.execution = execution;
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| black_box(run_cer(&cfg).unwrap())));
    }
    g.finish();
}

criterion_group!(benches, mindet, nvd, cer);
criterion_main!(benches);
