//! Inputs shared by the benchmarks in `benches/`.

use qmac_core::DataMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform `K x n` data over `0..d`, fixed by `seed`.
pub fn random_stream(seed: u64, k: usize, n: usize, d: u32) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..k * n).map(|_| rng.gen_range(0..d)).collect();
    DataMatrix::new(k, n, d, entries).expect("entries are in range")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
