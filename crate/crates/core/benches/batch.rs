use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use pentropy::par;
use pentropy::pipeline::{entropy_of_cloud, PipelineConfig};
use pentropy::synth::{generate, SynthKind};

fn batch(c: &mut Criterion) {
    let clouds: Vec<_> = (0..16).map(|s| generate(SynthKind::HexJitter { sigma: 0.2 }, 400, s)).collect();
    let cfg = PipelineConfig::default();
    let one = |pc: &_| entropy_of_cloud(pc, &cfg).unwrap().0;

    let mut g = c.benchmark_group("entropy_batch_16x400");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| par::map_sequential(black_box(&clouds), one)));
    g.bench_function(if par::is_parallel() { "parallel" } else { "parallel_disabled" }, |b| {
        b.iter(|| par::map(black_box(&clouds), one))
    });
    g.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
