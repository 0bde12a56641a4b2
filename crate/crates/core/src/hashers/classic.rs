//! The classic baselines: polynomial hashing over a Mersenne prime field and
//! the 2-independent multiply-shift scheme.

use crate::error::{Result, TabError};
use crate::keyspace::{draw_below, EntropySource};

use super::KeyHasher;

/// `2^61 - 1`, prime. (Note `2^81 - 1` is not prime; this field is the usual
/// choice for 64-bit-adjacent polynomial hashing.)
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Degree-`k-1` polynomial with random coefficients, evaluated mod
/// `p = 2^61 - 1` and reduced mod `m`. `k` coefficients give a
/// `k`-independent family; uniformity on `[m]` is approximate unless
/// `p >> m`.
#[derive(Debug, Clone)]
pub struct PolyHasher {
    /// `a_0` first.
    coefficients: Vec<u64>,
    range: u64,
    out_bits: u32,
}

/// `a * b mod 2^61 - 1` via shift-add reduction of the 128-bit product.
#[inline]
fn mul_mod_m61(a: u64, b: u64) -> u64 {
    let prod = (a as u128) * (b as u128);
    let low = (prod as u64) & MERSENNE_61;
    let high = (prod >> 61) as u64;
    reduce_m61(low + high)
}

/// Reduces a value `< 2^63` mod `2^61 - 1`.
#[inline]
fn reduce_m61(x: u64) -> u64 {
    let y = (x & MERSENNE_61) + (x >> 61);
    if y >= MERSENNE_61 {
        y - MERSENNE_61
    } else {
        y
    }
}

impl PolyHasher {
    /// `coefficients[i]` is `a_i`; all must be below the prime. `range` is
    /// `m`, the size of the output interval.
    pub fn new(coefficients: Vec<u64>, range: u64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(TabError::Config("need at least one coefficient".into()));
        }
        if let Some(bad) = coefficients.iter().position(|&a| a >= MERSENNE_61) {
            return Err(TabError::Config(format!(
                "coefficient {bad} not below 2^61 - 1"
            )));
        }
        if range == 0 {
            return Err(TabError::Config("range m must be positive".into()));
        }
        let out_bits = 64 - range.saturating_sub(1).leading_zeros();
        Ok(PolyHasher {
            coefficients,
            range,
            out_bits: out_bits.max(1),
        })
    }

    /// Draws `k` coefficients below the prime from a seeded source.
    pub fn from_source(k: u32, range: u64, src: &EntropySource) -> Result<Self> {
        if k == 0 {
            return Err(TabError::Config("independence degree k must be >= 1".into()));
        }
        let mut stream = src.stream()?;
        let coefficients = (0..k)
            .map(|_| draw_below(&mut stream, MERSENNE_61))
            .collect::<Result<Vec<_>>>()?;
        PolyHasher::new(coefficients, range)
    }

    pub fn degree_plus_one(&self) -> usize {
        self.coefficients.len()
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    /// Horner evaluation mod `2^61 - 1`, then mod `m`. Keys must be below
    /// the prime.
    pub fn try_hash(&self, x: u64) -> Result<u64> {
        if x >= MERSENNE_61 {
            return Err(TabError::Domain(format!("key {x:#x} not below 2^61 - 1")));
        }
        let mut acc = 0u64;
        for &a in self.coefficients.iter().rev() {
            acc = reduce_m61(mul_mod_m61(acc, x) + a);
        }
        Ok(acc % self.range)
    }
}

impl KeyHasher for PolyHasher {
    fn hash(&self, x: u64) -> u64 {
        self.try_hash(x).expect("key below 2^61 - 1")
    }

    fn out_bits(&self) -> u32 {
        self.out_bits
    }
}

/// Multiply-shift: `((a * x + b) mod 2^64) >> (64 - out_bits)` with odd `a`.
#[derive(Debug, Clone)]
pub struct MultShiftHasher {
    multiplier: u64,
    addend: u64,
    out_bits: u32,
}

impl MultShiftHasher {
    pub fn new(multiplier: u64, addend: u64, out_bits: u32) -> Result<Self> {
        if multiplier % 2 == 0 {
            return Err(TabError::Config("multiplier must be odd".into()));
        }
        if !(1..=64).contains(&out_bits) {
            return Err(TabError::Config(format!(
                "out_bits = {out_bits} outside 1..=64"
            )));
        }
        Ok(MultShiftHasher {
            multiplier,
            addend,
            out_bits,
        })
    }

    pub fn from_source(out_bits: u32, src: &EntropySource) -> Result<Self> {
        let mut stream = src.stream()?;
        let mut buf = [0u8; 16];
        stream.fill(&mut buf)?;
        let a = u64::from_le_bytes(buf[..8].try_into().expect("8 bytes")) | 1;
        let b = u64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
        MultShiftHasher::new(a, b, out_bits)
    }
}

impl KeyHasher for MultShiftHasher {
    #[inline]
    fn hash(&self, x: u64) -> u64 {
        self.multiplier
            .wrapping_mul(x)
            .wrapping_add(self.addend)
            >> (64 - self.out_bits)
    }

    fn out_bits(&self) -> u32 {
        self.out_bits
    }
}
