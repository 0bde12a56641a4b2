use serde::{Deserialize, Serialize};

use crate::error::{Result, TabError};
use crate::keyspace::{
    fill_tables_from_stream, mask, CharTable, EntropySource, EntropyStream, TabConfig,
};

use super::{xor_lookup, KeyHasher, SimpleTab};

/// Which character gets twisted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadPos {
    /// Character 0, the least significant. Default; required by the PRG.
    First,
    /// Character `c - 1`, the most significant. The convention of the 32-bit
    /// reference routine.
    Last,
}

/// Twisted tabulation: each tail character's star table carries an extra
/// "twister" character that is XORed into the head before its own lookup.
///
/// Star entries pack the twister in the low `char_bits` and the hash part
/// above it, so `entry_bits = char_bits + out_bits`.
#[derive(Debug, Clone)]
pub struct TwistedTab {
    cfg: TabConfig,
    head: HeadPos,
    star_tables: Vec<CharTable>,
    head_table: CharTable,
}

impl TwistedTab {
    pub fn from_parts(
        cfg: TabConfig,
        head: HeadPos,
        star_tables: Vec<CharTable>,
        head_table: CharTable,
    ) -> Result<Self> {
        if cfg.chars() < 2 {
            return Err(TabError::Config(
                "twisted tabulation needs at least 2 characters".into(),
            ));
        }
        let star_bits = cfg.char_bits() + cfg.out_bits();
        if star_bits > 64 {
            return Err(TabError::Config(format!(
                "char_bits + out_bits = {star_bits} exceeds 64-bit star entries"
            )));
        }
        if star_tables.len() != cfg.chars() as usize - 1 {
            return Err(TabError::Config(format!(
                "expected {} star tables, got {}",
                cfg.chars() - 1,
                star_tables.len()
            )));
        }
        for (i, t) in star_tables.iter().enumerate() {
            if t.len() != cfg.sigma() || t.entry_bits() != star_bits {
                return Err(TabError::Config(format!(
                    "star table {i}: {} entries of {} bits, expected {} of {star_bits}",
                    t.len(),
                    t.entry_bits(),
                    cfg.sigma()
                )));
            }
        }
        if head_table.len() != cfg.sigma() || head_table.entry_bits() != cfg.out_bits() {
            return Err(TabError::Config(format!(
                "head table: {} entries of {} bits, expected {} of {}",
                head_table.len(),
                head_table.entry_bits(),
                cfg.sigma(),
                cfg.out_bits()
            )));
        }
        Ok(TwistedTab {
            cfg,
            head,
            star_tables,
            head_table,
        })
    }

    /// Fills star tables first (in tail order), then the head table.
    pub fn from_source(cfg: TabConfig, head: HeadPos, src: &EntropySource) -> Result<Self> {
        let mut stream = src.stream()?;
        Self::from_stream(cfg, head, &mut stream)
    }

    pub fn from_stream(cfg: TabConfig, head: HeadPos, stream: &mut EntropyStream) -> Result<Self> {
        if cfg.chars() < 2 {
            return Err(TabError::Config(
                "twisted tabulation needs at least 2 characters".into(),
            ));
        }
        let star_bits = cfg.char_bits() + cfg.out_bits();
        if star_bits > 64 {
            return Err(TabError::Config(format!(
                "char_bits + out_bits = {star_bits} exceeds 64-bit star entries"
            )));
        }
        let star_tables =
            fill_tables_from_stream(stream, cfg.chars() as usize - 1, cfg.sigma(), star_bits)?;
        let head_table = fill_tables_from_stream(stream, 1, cfg.sigma(), cfg.out_bits())?
            .pop()
            .expect("one table requested");
        TwistedTab::from_parts(cfg, head, star_tables, head_table)
    }

    pub fn cfg(&self) -> &TabConfig {
        &self.cfg
    }

    pub fn head_pos(&self) -> HeadPos {
        self.head
    }

    pub fn star_tables(&self) -> &[CharTable] {
        &self.star_tables
    }

    pub fn head_table(&self) -> &CharTable {
        &self.head_table
    }

    /// Index of the head character.
    pub fn head_index(&self) -> u32 {
        match self.head {
            HeadPos::First => 0,
            HeadPos::Last => self.cfg.chars() - 1,
        }
    }

    /// Tail character indices in star-table order.
    fn tail_indices(&self) -> impl Iterator<Item = u32> + '_ {
        let c = self.cfg.chars();
        (0..c).filter(move |&i| i != self.head_index())
    }

    /// Combined star lookup over the tail: returns `(t, h_gt0)`.
    #[inline]
    pub(crate) fn star_eval(&self, x: u64) -> (u16, u64) {
        let cb = self.cfg.char_bits();
        let cm = self.cfg.char_mask();
        let mut acc = 0u64;
        for (t, i) in self.star_tables.iter().zip(self.tail_indices()) {
            acc ^= t.get(((x >> (i * cb)) & cm) as u16);
        }
        ((acc & cm) as u16, acc >> cb)
    }

    /// The twisted key: head character replaced by `head XOR t`, tail kept.
    pub fn twist_key(&self, x: u64) -> u64 {
        assert!(self.cfg.contains_key(x), "key {x:#x} outside universe");
        let (t, _) = self.star_eval(x);
        let shift = self.head_index() * self.cfg.char_bits();
        x ^ ((t as u64) << shift)
    }

    /// The decomposed form: a twister function over the tail characters and
    /// a plain simple tabulation hasher with the same table contents. Feeding
    /// [`TwistedTab::twist_key`] output through the second component must
    /// reproduce [`KeyHasher::hash`].
    pub fn decompose(&self) -> (TwisterFn, SimpleTab) {
        let cb = self.cfg.char_bits();
        let twister_tables: Vec<CharTable> = self
            .star_tables
            .iter()
            .map(|t| {
                CharTable::new(
                    t.entries().iter().map(|&e| e & mask(cb)).collect(),
                    cb,
                )
                .expect("masked entries fit")
            })
            .collect();
        let hash_tables: Vec<CharTable> = self
            .star_tables
            .iter()
            .map(|t| {
                CharTable::new(
                    t.entries().iter().map(|&e| e >> cb).collect(),
                    self.cfg.out_bits(),
                )
                .expect("shifted entries fit")
            })
            .collect();
        // Simple-tab tables in character order, head slot taken by the head table.
        let mut tables = Vec::with_capacity(self.cfg.chars() as usize);
        let mut it = hash_tables.into_iter();
        for i in 0..self.cfg.chars() {
            if i == self.head_index() {
                tables.push(self.head_table.clone());
            } else {
                tables.push(it.next().expect("one hash table per tail character"));
            }
        }
        let simple = SimpleTab::from_tables(self.cfg, tables).expect("shapes checked");
        (
            TwisterFn {
                cfg: self.cfg,
                head_index: self.head_index(),
                tables: twister_tables,
            },
            simple,
        )
    }
}

impl KeyHasher for TwistedTab {
    /// The two-statement form: star XOR over the tail, then one head lookup.
    #[inline]
    fn hash(&self, x: u64) -> u64 {
        assert!(self.cfg.contains_key(x), "key {x:#x} outside universe");
        let (t, h_gt0) = self.star_eval(x);
        let head_char = self.cfg.char_at(x, self.head_index());
        h_gt0 ^ self.head_table.get(head_char ^ t)
    }

    fn out_bits(&self) -> u32 {
        self.cfg.out_bits()
    }
}

/// The twister component of a decomposed twisted hasher: a simple tabulation
/// function from the tail characters to one character.
#[derive(Debug, Clone)]
pub struct TwisterFn {
    cfg: TabConfig,
    head_index: u32,
    tables: Vec<CharTable>,
}

impl TwisterFn {
    pub fn combined_twister(&self, x: u64) -> u16 {
        let cb = self.cfg.char_bits();
        let chars = (0..self.cfg.chars())
            .filter(|&i| i != self.head_index)
            .map(|i| ((x >> (i * cb)) & self.cfg.char_mask()) as u16);
        (xor_lookup(&self.tables, chars) & self.cfg.char_mask()) as u16
    }

    /// Applies the single-round Feistel twist.
    pub fn twist(&self, x: u64) -> u64 {
        let t = self.combined_twister(x);
        x ^ ((t as u64) << (self.head_index * self.cfg.char_bits()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded(cfg: TabConfig, head: HeadPos, seed: u64) -> TwistedTab {
        TwistedTab::from_source(cfg, head, &EntropySource::seeded(seed)).unwrap()
    }

    #[test]
    fn zero_tables_are_identity_twist_and_zero_hash() {
        let cfg = TabConfig::new(4, 3, 8, 0).unwrap();
        let star = vec![
            CharTable::zeroed(16, 12),
            CharTable::zeroed(16, 12),
        ];
        let head = CharTable::zeroed(16, 8);
        let h = TwistedTab::from_parts(cfg, HeadPos::First, star, head).unwrap();
        for x in 0..cfg.universe() as u64 {
            assert_eq!(h.twist_key(x), x);
            assert_eq!(h.hash(x), 0);
        }
    }

    #[test]
    fn hand_evaluated_twister_flip() {
        // c = 2, char_bits = 1, star twister parts [1, 1]: the head bit flips.
        let cfg = TabConfig::new(1, 2, 1, 0).unwrap();
        let star = vec![CharTable::new(vec![0b01, 0b01], 2).unwrap()];
        let head = CharTable::zeroed(2, 1);
        let h = TwistedTab::from_parts(cfg, HeadPos::First, star, head).unwrap();
        for x in 0..4u64 {
            assert_eq!(h.twist_key(x), x ^ 1);
        }
    }

    #[test]
    fn twist_is_a_permutation() {
        // Exhaustive over u = 2^16 for a handful of seeds and both head spots.
        let cfg = TabConfig::new(8, 2, 16, 0).unwrap();
        for seed in 0..4 {
            for head in [HeadPos::First, HeadPos::Last] {
                let h = seeded(cfg, head, seed);
                let mut seen = vec![false; 1 << 16];
                for x in 0..(1u64 << 16) {
                    let y = h.twist_key(x) as usize;
                    assert!(!seen[y], "collision at {x}");
                    seen[y] = true;
                }
            }
        }
    }

    #[test]
    fn two_statement_matches_decomposed_form() {
        let cfg = TabConfig::new(8, 4, 32, 0).unwrap();
        for head in [HeadPos::First, HeadPos::Last] {
            let h = seeded(cfg, head, 7);
            let (twister, simple) = h.decompose();
            let mut x = 0x1234_5678_u64;
            for _ in 0..100_000 {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1);
                let key = x & 0xFFFF_FFFF;
                assert_eq!(twister.twist(key), h.twist_key(key));
                assert_eq!(simple.hash(h.twist_key(key)), h.hash(key));
            }
        }
    }

    #[test]
    fn rejects_single_character_geometry() {
        let cfg = TabConfig::new(8, 1, 8, 0).unwrap();
        let err = TwistedTab::from_source(cfg, HeadPos::First, &EntropySource::seeded(0));
        assert!(matches!(err.unwrap_err(), TabError::Config(_)));
    }
}
