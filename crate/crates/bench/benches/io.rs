use criterion::{criterion_group, criterion_main, Criterion};

use approxlab::io::{load_group, save_group};
use approxlab_bench::torus;

/// Save and reload a group at the order limit.
fn round_trip(c: &mut Criterion) {
    let g = torus(64);
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("group.json");
    c.bench_function("io/round_trip_4096", |b| {
        b.iter(|| {
            save_group(&g, &path).expect("save");
            load_group(&path).expect("load")
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = round_trip
}
criterion_main!(benches);
