//! Reference routines for the 32-bit geometry (8-bit characters, 4 of them,
//! 32-bit hashes), kept deliberately close to portable C. They serve as the
//! golden oracle for the general implementations at this geometry.

use crate::error::{Result, TabError};
use crate::keyspace::{CharTable, EntropySource, TabConfig};

use super::{HeadPos, SimpleTab, TwistedTab};

/// The geometry these routines are defined on.
pub fn config32() -> TabConfig {
    TabConfig::new(8, 4, 32, 0).expect("static geometry is valid")
}

/// Checks a caller-supplied geometry against [`config32`].
pub fn check_geometry(cfg: &TabConfig) -> Result<()> {
    if *cfg != config32() {
        return Err(TabError::Config(format!(
            "reference routines require (char_bits, chars, out_bits) = (8, 4, 32), got ({}, {}, {})",
            cfg.char_bits(),
            cfg.chars(),
            cfg.out_bits()
        )));
    }
    Ok(())
}

/// Simple tabulation over 32-bit keys, peeling one byte at a time from the
/// low end.
pub fn simple_tab32(x: u32, h: &[[u32; 256]; 4]) -> u32 {
    let mut x = x;
    let mut hash = 0u32;
    for row in h.iter() {
        let c = x as u8;
        hash ^= row[c as usize];
        x >>= 8;
    }
    hash
}

/// Twisted tabulation over 32-bit keys with 64-bit table entries. The three
/// low bytes are the tail; the running 64-bit XOR carries the twister in its
/// low 8 bits, and the final hash is bits 32..64.
pub fn twisted_tab32(x: u32, h: &[[u64; 256]; 4]) -> u32 {
    let mut x = x;
    let mut hash = 0u64;
    for row in h.iter().take(3) {
        let c = x as u8;
        hash ^= row[c as usize];
        x >>= 8;
    }
    let c = (x as u8) ^ (hash as u8); // extra xor compared with simple
    hash ^= h[3][c as usize];
    hash >>= 32; // extra shift compared with simple
    hash as u32
}

/// Fills the four 256-entry u32 tables in the standard order (table 0 entry 0
/// first, little-endian).
pub fn fill_simple32(src: &EntropySource) -> Result<Box<[[u32; 256]; 4]>> {
    let tables = crate::keyspace::fill_tables(src, 4, 256, 32)?;
    let mut out = Box::new([[0u32; 256]; 4]);
    for (dst, t) in out.iter_mut().zip(&tables) {
        for (d, &e) in dst.iter_mut().zip(t.entries()) {
            *d = e as u32;
        }
    }
    Ok(out)
}

/// Fills the four 256-entry u64 tables in the standard order.
pub fn fill_twisted32(src: &EntropySource) -> Result<Box<[[u64; 256]; 4]>> {
    let tables = crate::keyspace::fill_tables(src, 4, 256, 64)?;
    let mut out = Box::new([[0u64; 256]; 4]);
    for (dst, t) in out.iter_mut().zip(&tables) {
        dst.copy_from_slice(t.entries());
    }
    Ok(out)
}

/// Builds a [`SimpleTab`] holding exactly the reference tables.
pub fn simple_from_tables32(h: &[[u32; 256]; 4]) -> SimpleTab {
    let tables = h
        .iter()
        .map(|row| {
            CharTable::new(row.iter().map(|&e| e as u64).collect(), 32).expect("u32 entries fit")
        })
        .collect();
    SimpleTab::from_tables(config32(), tables).expect("shapes are static")
}

/// Builds a [`TwistedTab`] equivalent to the reference twisted routine on the
/// same tables: head is the last character, the twister is the low byte of
/// each 64-bit entry and the hash part is bits 32..64 (bits 8..32 are never
/// consulted by the routine).
pub fn twisted_from_tables32(h: &[[u64; 256]; 4]) -> TwistedTab {
    let star = h[..3]
        .iter()
        .map(|row| {
            CharTable::new(
                row.iter().map(|&e| (e & 0xFF) | ((e >> 32) << 8)).collect(),
                40,
            )
            .expect("packed entries fit in 40 bits")
        })
        .collect();
    let head = CharTable::new(h[3].iter().map(|&e| e >> 32).collect(), 32)
        .expect("high halves fit in 32 bits");
    TwistedTab::from_parts(config32(), HeadPos::Last, star, head).expect("shapes are static")
}
