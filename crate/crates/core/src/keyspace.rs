//! Key geometry, character decomposition, and table filling.
//!
//! A key is an unsigned integer of `c * char_bits` bits, read as a vector of
//! `c` characters over the alphabet `[2^char_bits]`. Character 0 occupies the
//! lowest-order bits. Every hasher in this crate is built from [`CharTable`]s
//! filled out of an [`EntropySource`].

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::PathBuf;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TabError};

/// A key value. Validity depends on the [`TabConfig`] in use: `x < Σ^c`.
pub type Key = u64;

/// Key geometry: `c` characters of `char_bits` bits each, hashed to
/// `out_bits`-bit values, with `derived_chars` extra characters for the
/// double/mixed constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabConfig {
    char_bits: u32,
    chars: u32,
    out_bits: u32,
    derived_chars: u32,
}

impl TabConfig {
    /// Validates and builds a configuration.
    ///
    /// Bounds: `1 <= char_bits <= 16`, `1 <= chars <= 8`,
    /// `chars * char_bits <= 64`, `1 <= out_bits <= 64`,
    /// `derived_chars <= 8`.
    pub fn new(char_bits: u32, chars: u32, out_bits: u32, derived_chars: u32) -> Result<Self> {
        if !(1..=16).contains(&char_bits) {
            return Err(TabError::Config(format!(
                "char_bits = {char_bits} outside 1..=16"
            )));
        }
        if !(1..=8).contains(&chars) {
            return Err(TabError::Config(format!("chars = {chars} outside 1..=8")));
        }
        if chars * char_bits > 64 {
            return Err(TabError::Config(format!(
                "chars * char_bits = {} exceeds 64",
                chars * char_bits
            )));
        }
        if !(1..=64).contains(&out_bits) {
            return Err(TabError::Config(format!(
                "out_bits = {out_bits} outside 1..=64"
            )));
        }
        if derived_chars > 8 {
            return Err(TabError::Config(format!(
                "derived_chars = {derived_chars} exceeds 8"
            )));
        }
        Ok(TabConfig {
            char_bits,
            chars,
            out_bits,
            derived_chars,
        })
    }

    pub fn char_bits(&self) -> u32 {
        self.char_bits
    }

    /// Number of characters per key (`c`).
    pub fn chars(&self) -> u32 {
        self.chars
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    /// Number of derived characters (`d`); 0 for simple/twisted.
    pub fn derived_chars(&self) -> u32 {
        self.derived_chars
    }

    /// Alphabet size `Σ = 2^char_bits`.
    pub fn sigma(&self) -> usize {
        1usize << self.char_bits
    }

    /// Universe size `Σ^c`. Can be `2^64`, hence `u128`.
    pub fn universe(&self) -> u128 {
        1u128 << (self.chars * self.char_bits)
    }

    /// Mask selecting one character.
    pub fn char_mask(&self) -> u64 {
        mask(self.char_bits)
    }

    /// Mask selecting a hash value.
    pub fn out_mask(&self) -> u64 {
        mask(self.out_bits)
    }

    /// True when `x` lies in this geometry's universe.
    pub fn contains_key(&self, x: Key) -> bool {
        (x as u128) < self.universe()
    }

    pub fn check_key(&self, x: Key) -> Result<()> {
        if self.contains_key(x) {
            Ok(())
        } else {
            Err(TabError::Domain(format!(
                "key {:#x} outside universe of {} * {}-bit characters",
                x, self.chars, self.char_bits
            )))
        }
    }

    /// Character `i` of `x` (no domain check).
    #[inline]
    pub fn char_at(&self, x: Key, i: u32) -> u16 {
        ((x >> (i * self.char_bits)) & self.char_mask()) as u16
    }
}

/// Low `bits` set; `bits` in `0..=64`.
#[inline]
pub fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Splits a key into its `c` characters, lowest-order character first.
pub fn split_key(x: Key, cfg: &TabConfig) -> Result<Vec<u16>> {
    cfg.check_key(x)?;
    Ok((0..cfg.chars()).map(|i| cfg.char_at(x, i)).collect())
}

/// Inverse of [`split_key`].
pub fn join_chars(chars: &[u16], cfg: &TabConfig) -> Result<Key> {
    if chars.len() != cfg.chars() as usize {
        return Err(TabError::Domain(format!(
            "expected {} characters, got {}",
            cfg.chars(),
            chars.len()
        )));
    }
    let mut x = 0u64;
    for (i, &ch) in chars.iter().enumerate() {
        if ch as usize >= cfg.sigma() {
            return Err(TabError::Domain(format!(
                "character {ch:#x} at position {i} not below alphabet size {}",
                cfg.sigma()
            )));
        }
        x |= (ch as u64) << (i as u32 * cfg.char_bits());
    }
    Ok(x)
}

/// One character table: `Σ` entries of `entry_bits` bits each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharTable {
    entries: Vec<u64>,
    entry_bits: u32,
}

impl CharTable {
    /// Builds from raw entries, checking the entry mask.
    pub fn new(entries: Vec<u64>, entry_bits: u32) -> Result<Self> {
        if entry_bits == 0 || entry_bits > 64 {
            return Err(TabError::Config(format!(
                "entry_bits = {entry_bits} outside 1..=64"
            )));
        }
        let m = mask(entry_bits);
        if let Some(bad) = entries.iter().position(|&e| e & !m != 0) {
            return Err(TabError::Input(format!(
                "entry {bad} has bits above entry_bits = {entry_bits}"
            )));
        }
        Ok(CharTable {
            entries,
            entry_bits,
        })
    }

    pub fn zeroed(len: usize, entry_bits: u32) -> Self {
        CharTable {
            entries: vec![0; len],
            entry_bits,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry_bits(&self) -> u32 {
        self.entry_bits
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, ch: u16) -> u64 {
        self.entries[ch as usize]
    }

    pub(crate) fn set(&mut self, ch: u16, value: u64) {
        debug_assert_eq!(value & !mask(self.entry_bits), 0);
        self.entries[ch as usize] = value;
    }
}

/// Where random table bits come from.
///
/// The seeded kind is ChaCha20 keyed by the 64-bit seed; identical seeds give
/// identical byte streams on every platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntropySource {
    Seeded { seed: u64 },
    OsRandom,
    File { path: PathBuf },
}

impl EntropySource {
    pub fn seeded(seed: u64) -> Self {
        EntropySource::Seeded { seed }
    }

    /// Opens the source for sequential consumption.
    pub fn stream(&self) -> Result<EntropyStream> {
        Ok(match self {
            EntropySource::Seeded { seed } => {
                EntropyStream::Seeded(ChaCha20Rng::seed_from_u64(*seed))
            }
            EntropySource::OsRandom => EntropyStream::Os(rand::rngs::OsRng),
            EntropySource::File { path } => {
                let file = File::open(path)?;
                let len = file.metadata()?.len();
                EntropyStream::File {
                    reader: BufReader::new(file),
                    remaining: len,
                }
            }
        })
    }
}

/// A live byte stream backing table fills.
pub enum EntropyStream {
    Seeded(ChaCha20Rng),
    Os(rand::rngs::OsRng),
    File {
        reader: BufReader<File>,
        remaining: u64,
    },
}

impl EntropyStream {
    pub fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        match self {
            EntropyStream::Seeded(rng) => {
                rng.fill_bytes(buf);
                Ok(())
            }
            EntropyStream::Os(rng) => rng
                .try_fill_bytes(buf)
                .map_err(|e| TabError::Io(std::io::Error::other(e))),
            EntropyStream::File { reader, remaining } => {
                if (buf.len() as u64) > *remaining {
                    return Err(TabError::EntropyExhausted {
                        needed: buf.len() as u64,
                        available: *remaining,
                    });
                }
                reader.read_exact(buf)?;
                *remaining -= buf.len() as u64;
                Ok(())
            }
        }
    }
}

/// Bytes consumed per entry of `entry_bits` bits.
pub fn entry_width(entry_bits: u32) -> usize {
    entry_bits.div_ceil(8) as usize
}

/// Fills `count` tables of `sigma` entries each from `src`.
///
/// Consumption order is fixed: table 0 entry 0 first, each entry read as
/// `ceil(entry_bits / 8)` little-endian bytes and masked to `entry_bits`.
/// Seeded sources are therefore bit-reproducible across runs and platforms.
pub fn fill_tables(
    src: &EntropySource,
    count: usize,
    sigma: usize,
    entry_bits: u32,
) -> Result<Vec<CharTable>> {
    let mut stream = src.stream()?;
    fill_tables_from_stream(&mut stream, count, sigma, entry_bits)
}

/// As [`fill_tables`], continuing an already-open stream.
pub fn fill_tables_from_stream(
    stream: &mut EntropyStream,
    count: usize,
    sigma: usize,
    entry_bits: u32,
) -> Result<Vec<CharTable>> {
    if entry_bits == 0 || entry_bits > 64 {
        return Err(TabError::Config(format!(
            "entry_bits = {entry_bits} outside 1..=64"
        )));
    }
    let width = entry_width(entry_bits);
    let m = mask(entry_bits);
    let mut buf = vec![0u8; sigma * width];
    let mut tables = Vec::with_capacity(count);
    for _ in 0..count {
        stream.fill(&mut buf)?;
        let mut entries = Vec::with_capacity(sigma);
        for chunk in buf.chunks_exact(width) {
            let mut v = 0u64;
            for (b, &byte) in chunk.iter().enumerate() {
                v |= (byte as u64) << (8 * b);
            }
            entries.push(v & m);
        }
        tables.push(CharTable {
            entries,
            entry_bits,
        });
    }
    Ok(tables)
}

/// Draws one `u64` below `bound` by rejection from the stream.
pub(crate) fn draw_below(stream: &mut EntropyStream, bound: u64) -> Result<u64> {
    debug_assert!(bound > 0);
    let bits = 64 - (bound - 1).leading_zeros().min(63);
    let m = mask(bits.max(1));
    let width = entry_width(bits.max(1)) ;
    let mut buf = [0u8; 8];
    loop {
        stream.fill(&mut buf[..width])?;
        let mut v = 0u64;
        for (b, &byte) in buf[..width].iter().enumerate() {
            v |= (byte as u64) << (8 * b);
        }
        v &= m;
        if v < bound {
            return Ok(v);
        }
    }
}
