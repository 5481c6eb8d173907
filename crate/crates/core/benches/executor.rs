//! Sequential vs parallel executor on the two hot paths: per-ticker graph
//! generation and the t-SNE gradient loop.
//!
//! Run with: cargo bench -p vgsynth --bench executor

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vgsynth::corpus::CorpusSpec;
use vgsynth::evaluate::{embed_2d, TsneConfig};
use vgsynth::pipeline::{build_windows, generate_all};
use vgsynth::{Executor, Method, RunConfig};

fn executors() -> Vec<(&'static str, Executor)> {
    let mut out = vec![("sequential", Executor::Sequential)];
    if cfg!(feature = "parallel") {
        out.push(("parallel", Executor::with_workers(0)));
    }
    out
}

fn generation(c: &mut Criterion) {
    let windows = build_windows(&CorpusSpec::new(16, 500, 1).generate(), 20, 20).unwrap();
    let cfg = RunConfig {
        methods: vec![Method::Nvg, Method::Hvg],
        ..Default::default()
    };
    let mut group = c.benchmark_group("generate_nvg_hvg_16x500");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| black_box(generate_all(&cfg, &windows, exec).unwrap()))
        });
    }
    group.finish();
}

fn tsne(c: &mut Criterion) {
    let windows = build_windows(&CorpusSpec::new(10, 500, 2).generate(), 20, 20).unwrap();
    let points: Vec<Vec<f64>> = windows.iter().map(|w| w.raw_values.clone()).collect();
    let cfg = TsneConfig {
        iterations: 300,
        ..Default::default()
    };
    let mut group = c.benchmark_group("tsne_250pts_300it");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| black_box(embed_2d(&points, &cfg, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, generation, tsne);
criterion_main!(benches);
