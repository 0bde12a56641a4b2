//! Every hash construction in the crate plus the baselines they are
//! compared against.
//!
//! All hashers are immutable once built and safe to evaluate from any
//! number of threads.

mod classic;
mod double;
mod mixed;
pub mod reference;
mod simple;
mod truly;
mod twisted;

pub use classic::{MultShiftHasher, PolyHasher, MERSENNE_61};
pub use double::DoubleTab;
pub use mixed::MixedTab;
pub use simple::SimpleTab;
pub use truly::TrulyRandom;
pub use twisted::{HeadPos, TwistedTab};

use crate::keyspace::CharTable;

/// Common evaluation interface.
///
/// `hash` panics if `x` lies outside the hasher's key domain; callers feed
/// keys validated against the hasher's geometry.
pub trait KeyHasher: Sync {
    fn hash(&self, x: u64) -> u64;

    /// Output width in bits; values lie in `[2^out_bits]`.
    fn out_bits(&self) -> u32;
}

impl<H: KeyHasher + ?Sized> KeyHasher for &H {
    fn hash(&self, x: u64) -> u64 {
        (**self).hash(x)
    }
    fn out_bits(&self) -> u32 {
        (**self).out_bits()
    }
}

impl<H: KeyHasher + ?Sized> KeyHasher for Box<H> {
    fn hash(&self, x: u64) -> u64 {
        (**self).hash(x)
    }
    fn out_bits(&self) -> u32 {
        (**self).out_bits()
    }
}

/// Maps every key to one fixed value. Degenerate by design; used to force
/// worst cases in tests and experiments.
#[derive(Debug, Clone)]
pub struct ConstantHasher {
    value: u64,
    out_bits: u32,
}

impl ConstantHasher {
    pub fn new(value: u64, out_bits: u32) -> Self {
        ConstantHasher { value, out_bits }
    }
}

impl KeyHasher for ConstantHasher {
    fn hash(&self, _x: u64) -> u64 {
        self.value
    }
    fn out_bits(&self) -> u32 {
        self.out_bits
    }
}

/// XOR of one table lookup per character; shared by the evaluation paths.
#[inline]
pub(crate) fn xor_lookup(tables: &[CharTable], chars: impl Iterator<Item = u16>) -> u64 {
    let mut acc = 0u64;
    for (t, ch) in tables.iter().zip(chars) {
        acc ^= t.get(ch);
    }
    acc
}
