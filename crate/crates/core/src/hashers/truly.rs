use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::keyspace::mask;

use super::KeyHasher;

/// Idealized fully random hasher for baselines: the value of key `x` is the
/// first word of an independent ChaCha stream selected by `x`. Deterministic
/// in the seed, uniform and independent across keys for every statistical
/// purpose in this crate, and needs no tables.
#[derive(Debug, Clone)]
pub struct TrulyRandom {
    base: ChaCha12Rng,
    out_bits: u32,
}

impl TrulyRandom {
    pub fn new(seed: u64, out_bits: u32) -> Self {
        assert!((1..=64).contains(&out_bits));
        TrulyRandom {
            base: ChaCha12Rng::seed_from_u64(seed),
            out_bits,
        }
    }
}

impl KeyHasher for TrulyRandom {
    fn hash(&self, x: u64) -> u64 {
        let mut rng = self.base.clone();
        rng.set_stream(x);
        rng.next_u64() & mask(self.out_bits)
    }

    fn out_bits(&self) -> u32 {
        self.out_bits
    }
}
