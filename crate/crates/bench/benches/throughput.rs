use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use geo_langevin::{
    accumulate_phase, periodogram, run_ensemble, simulate, Conditioning, ModelParams, Signal, SimOptions, StreamFactory,
};

fn stepping(c: &mut Criterion) {
    let p = ModelParams::desk_scale();
    let opts = SimOptions::default();
    let mut g = c.benchmark_group("simulate");
    g.throughput(Throughput::Elements(p.n_steps() as u64));
    g.bench_function("desk_path", |b| {
        let f = StreamFactory::new(1);
        let mut i = 0;
        b.iter(|| {
            i += 1;
            black_box(simulate(&p, &opts, &mut f.substream(i)).unwrap())
        })
    });
    g.finish();
}

fn phase_and_spectrum(c: &mut Criterion) {
    let p = ModelParams {
        duration: 200.0,
        ..ModelParams::desk_scale()
    };
    let traj = simulate(&p, &SimOptions::default(), &mut StreamFactory::new(2).substream(0)).unwrap();
    c.bench_function("phase/10k_steps", |b| {
        b.iter(|| black_box(accumulate_phase(&traj).unwrap()))
    });
    let mut g = c.benchmark_group("periodogram");
    for segments in [1, 16] {
        g.bench_with_input(BenchmarkId::from_parameter(segments), &segments, |b, &s| {
            b.iter(|| black_box(periodogram(&traj, Signal::Position, s).unwrap()))
        });
    }
    g.finish();
}

fn ensemble(c: &mut Criterion) {
    let p = ModelParams::desk_scale();
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    g.throughput(Throughput::Elements(1000));
    g.bench_function("1000_paths", |b| {
        b.iter(|| black_box(run_ensemble(&p, 1000, &SimOptions::default(), Conditioning::Free, 3).unwrap()))
    });
    g.finish();
}

criterion_group!(benches, stepping, phase_and_spectrum, ensemble);
criterion_main!(benches);
