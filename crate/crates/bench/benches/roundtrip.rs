use std::io::Cursor;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nmck::checkpoint::{load_function, load_mesh};
use nmck::harness::{load_and_verify, save_state};
use nmck::{CheckpointReader, LoadOptions, SimComm};
use nmck_bench::{config, ring_sf, saved};

fn save(c: &mut Criterion) {
    let mut g = c.benchmark_group("save");
    for n in [1, 4] {
        let cfg = config("unit-square:16", 3, n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| save_state(black_box(cfg)).unwrap())
        });
    }
    g.finish();
}

fn load(c: &mut Criterion) {
    let bytes = saved("unit-square:16", 3, 3);
    let mut g = c.benchmark_group("load");
    for m in [1, 2, 7] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            let comm = SimComm::sequential(m);
            b.iter(|| {
                let mut r = CheckpointReader::new(Cursor::new(bytes.clone())).unwrap();
                let mesh = load_mesh(&mut r, &comm, "mesh", LoadOptions::default()).unwrap();
                load_function(&mut r, &comm, &mesh, "f").unwrap()
            })
        });
    }
    g.finish();
}

fn verify(c: &mut Criterion) {
    let bytes = saved("unit-cube:2", 2, 2);
    let cfg = config("unit-cube:2", 2, 2, 5);
    c.bench_function("load_and_verify/cube_2_to_5", |b| {
        b.iter(|| load_and_verify(bytes.clone(), &cfg, &mut Vec::new()).unwrap())
    });
}

fn star_forest(c: &mut Criterion) {
    let f = ring_sf(4, 10_000);
    let g = ring_sf(4, 10_000);
    let data: Vec<Vec<f64>> = (0..4).map(|r| (0..10_000).map(|i| (r * i) as f64).collect()).collect();
    c.bench_function("sf/compose", |b| b.iter(|| f.compose(black_box(&g)).unwrap()));
    c.bench_function("sf/broadcast", |b| b.iter(|| f.broadcast(black_box(&data)).unwrap()));
}

criterion_group!(benches, save, load, verify, star_forest);
criterion_main!(benches);
