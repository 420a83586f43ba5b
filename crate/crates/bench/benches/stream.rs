use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use nalgebra::DVector;

use pensemble_bench::{sea_chunks, warm_ensemble};
use pensemble_core::ensemble::{DriftDetector, PairStats};
use pensemble_core::{Ensemble, StreamConfig};

fn train_chunk(c: &mut Criterion) {
    let warm = warm_ensemble(20);
    let next = sea_chunks(21, 250).pop().unwrap();
    c.bench_function("train_chunk/sea_250", |b| {
        b.iter_batched(
            || warm.clone(),
            |mut ens| ens.train_chunk(&next).unwrap(),
            BatchSize::SmallInput,
        )
    });
    let chunk = sea_chunks(1, 250).pop().unwrap();
    c.bench_function("train_chunk/cold_start", |b| {
        b.iter_batched(
            || Ensemble::new(StreamConfig::new(3, 2)).unwrap(),
            |mut ens| ens.train_chunk(&chunk).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn predict(c: &mut Criterion) {
    let ens = warm_ensemble(20);
    let x = DVector::from_row_slice(&[3.0, 6.0, 1.0]);
    c.bench_function("predict_raw/sea", |b| {
        b.iter(|| ens.predict_raw(std::hint::black_box(&x)).unwrap())
    });
}

fn mci(c: &mut Criterion) {
    let y1: Vec<f64> = (0..500).map(|i| (i as f64 * 0.37).sin()).collect();
    let y2: Vec<f64> = (0..500).map(|i| (i as f64 * 0.11).cos()).collect();
    c.bench_function("mci/500_pairs", |b| {
        b.iter(|| PairStats::from_series(&y1, &y2).mci().unwrap())
    });
}

fn drift(c: &mut Criterion) {
    let bits: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 5 == 0) as u8 as f64).collect();
    c.bench_function("drift_step/window_1000", |b| {
        b.iter_batched(
            || DriftDetector::new(0.005, 0.001, 1000),
            |mut d| {
                for &e in &bits {
                    d.step(e);
                }
                d
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, train_chunk, predict, mci, drift);
criterion_main!(benches);
