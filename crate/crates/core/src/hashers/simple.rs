use crate::error::{Result, TabError};
use crate::keyspace::{fill_tables_from_stream, CharTable, EntropySource, EntropyStream, TabConfig};

use super::{xor_lookup, KeyHasher};

/// Simple tabulation: the hash of `x = (x_0, ..., x_{c-1})` is the bit-wise
/// XOR of `tables[i][x_i]`.
#[derive(Debug, Clone)]
pub struct SimpleTab {
    cfg: TabConfig,
    tables: Vec<CharTable>,
}

impl SimpleTab {
    /// Builds from explicit tables: `c` tables of `Σ` entries, `out_bits` wide.
    pub fn from_tables(cfg: TabConfig, tables: Vec<CharTable>) -> Result<Self> {
        if tables.len() != cfg.chars() as usize {
            return Err(TabError::Config(format!(
                "expected {} tables, got {}",
                cfg.chars(),
                tables.len()
            )));
        }
        for (i, t) in tables.iter().enumerate() {
            if t.len() != cfg.sigma() {
                return Err(TabError::Config(format!(
                    "table {i} has {} entries, alphabet size is {}",
                    t.len(),
                    cfg.sigma()
                )));
            }
            if t.entry_bits() != cfg.out_bits() {
                return Err(TabError::Config(format!(
                    "table {i} entry_bits {} != out_bits {}",
                    t.entry_bits(),
                    cfg.out_bits()
                )));
            }
        }
        Ok(SimpleTab { cfg, tables })
    }

    pub fn from_source(cfg: TabConfig, src: &EntropySource) -> Result<Self> {
        let tables = crate::keyspace::fill_tables(src, cfg.chars() as usize, cfg.sigma(), cfg.out_bits())?;
        SimpleTab::from_tables(cfg, tables)
    }

    pub fn from_stream(cfg: TabConfig, stream: &mut EntropyStream) -> Result<Self> {
        let tables =
            fill_tables_from_stream(stream, cfg.chars() as usize, cfg.sigma(), cfg.out_bits())?;
        SimpleTab::from_tables(cfg, tables)
    }

    pub fn cfg(&self) -> &TabConfig {
        &self.cfg
    }

    pub fn tables(&self) -> &[CharTable] {
        &self.tables
    }

    /// Evaluates on an explicit character vector. Used where the character
    /// count exceeds what fits in a 64-bit key.
    pub fn hash_chars(&self, chars: &[u16]) -> u64 {
        assert_eq!(chars.len(), self.tables.len());
        xor_lookup(&self.tables, chars.iter().copied())
    }
}

impl KeyHasher for SimpleTab {
    #[inline]
    fn hash(&self, x: u64) -> u64 {
        assert!(self.cfg.contains_key(x), "key {x:#x} outside universe");
        let cb = self.cfg.char_bits();
        let m = self.cfg.char_mask();
        let mut acc = 0u64;
        for (i, t) in self.tables.iter().enumerate() {
            acc ^= t.get(((x >> (i as u32 * cb)) & m) as u16);
        }
        acc
    }

    fn out_bits(&self) -> u32 {
        self.cfg.out_bits()
    }
}
