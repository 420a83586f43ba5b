//! Fixtures shared by the benchmarks.

use pensemble_core::datagen::{gen_sea, SeaConfig};
use pensemble_core::stream::chunks;
use pensemble_core::{DataChunk, Ensemble, StreamConfig};

/// The first `n` chunks of a seeded SEA stream.
pub fn sea_chunks(n: usize, chunk_size: usize) -> Vec<DataChunk> {
    let cfg = SeaConfig {
        n_total: n * chunk_size,
        ..SeaConfig::default()
    };
    chunks(gen_sea(&cfg).expect("valid SEA config"), chunk_size).collect()
}

/// An ensemble trained on `warm` SEA chunks of 250.
pub fn warm_ensemble(warm: usize) -> Ensemble {
    let mut ens = Ensemble::new(StreamConfig::new(3, 2)).expect("valid config");
    for c in sea_chunks(warm, 250) {
        ens.train_chunk(&c).expect("training succeeds");
    }
    ens
}
