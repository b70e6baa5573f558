//! Parallel vs sequential child evaluation and oracle batches. Without the
//! `parallel` feature both variants run sequentially.

use std::hint::black_box;
use std::path::PathBuf;
use std::time::Duration;

use aotree::dataset::encode;
use aotree::suite::oracle_batch;
use aotree::{fit, load_csv, ClassColumn, EncodedDataset, Encoding, SearchConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn load(name: &str, class: ClassColumn, scheme: Encoding) -> EncodedDataset {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    let raw = load_csv(path, &class, true).unwrap().drop_constant_features().0;
    encode(&raw, scheme).unwrap()
}

fn fits(c: &mut Criterion) {
    let cases = [
        ("mushroom-o", load("mushroom.csv", ClassColumn::Name("class".into()), Encoding::Ordinal)),
        ("monk1", load("monk1.csv", ClassColumn::default(), Encoding::OnehotFull)),
    ];
    let mut group = c.benchmark_group("fit");
    group.measurement_time(Duration::from_secs(5));
    for (name, ds) in &cases {
        for parallel in [true, false] {
            let label = if parallel { "parallel" } else { "sequential" };
            group.bench_with_input(BenchmarkId::new(*name, label), ds, |b, ds| {
                b.iter(|| fit(black_box(ds), SearchConfig::new(0.01).parallel(parallel)).unwrap())
            });
        }
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let seeds: Vec<u64> = (0..200).collect();
    let mut group = c.benchmark_group("oracle_batch");
    group.sample_size(10);
    for parallel in [true, false] {
        let label = if parallel { "parallel" } else { "sequential" };
        group.bench_function(label, |b| b.iter(|| oracle_batch(black_box(&seeds), parallel).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, fits, oracle);
criterion_main!(benches);
