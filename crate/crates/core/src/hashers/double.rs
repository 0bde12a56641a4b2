use crate::error::{Result, TabError};
use crate::keyspace::{
    fill_tables_from_stream, CharTable, EntropySource, EntropyStream, TabConfig,
};

use super::{KeyHasher, SimpleTab};

/// Double tabulation: an inner simple tabulation maps a key to `d` derived
/// characters, an outer simple tabulation hashes those.
#[derive(Debug, Clone)]
pub struct DoubleTab {
    cfg: TabConfig,
    /// `c` tables of `d * char_bits`-bit entries realizing `Σ^c -> Σ^d`.
    inner: Vec<CharTable>,
    /// Simple tabulation on `d` characters with `out_bits` output.
    outer: SimpleTab,
}

impl DoubleTab {
    fn inner_bits(cfg: &TabConfig) -> Result<u32> {
        let d = cfg.derived_chars();
        if d == 0 {
            return Err(TabError::Config(
                "double tabulation needs at least 1 derived character".into(),
            ));
        }
        let bits = d * cfg.char_bits();
        if bits > 64 {
            return Err(TabError::Config(format!(
                "derived_chars * char_bits = {bits} exceeds 64"
            )));
        }
        Ok(bits)
    }

    /// Geometry of the outer function: `d` characters, same alphabet.
    pub fn outer_cfg(cfg: &TabConfig) -> Result<TabConfig> {
        Self::inner_bits(cfg)?;
        TabConfig::new(cfg.char_bits(), cfg.derived_chars(), cfg.out_bits(), 0)
    }

    pub fn from_parts(cfg: TabConfig, inner: Vec<CharTable>, outer: SimpleTab) -> Result<Self> {
        let inner_bits = Self::inner_bits(&cfg)?;
        if inner.len() != cfg.chars() as usize {
            return Err(TabError::Config(format!(
                "expected {} inner tables, got {}",
                cfg.chars(),
                inner.len()
            )));
        }
        for (i, t) in inner.iter().enumerate() {
            if t.len() != cfg.sigma() || t.entry_bits() != inner_bits {
                return Err(TabError::Config(format!(
                    "inner table {i}: {} entries of {} bits, expected {} of {inner_bits}",
                    t.len(),
                    t.entry_bits(),
                    cfg.sigma()
                )));
            }
        }
        if *outer.cfg() != Self::outer_cfg(&cfg)? {
            return Err(TabError::Config(
                "outer hasher geometry does not match derived characters".into(),
            ));
        }
        Ok(DoubleTab { cfg, inner, outer })
    }

    /// Fills the inner tables first, then the outer ones.
    pub fn from_source(cfg: TabConfig, src: &EntropySource) -> Result<Self> {
        let mut stream = src.stream()?;
        Self::from_stream(cfg, &mut stream)
    }

    pub fn from_stream(cfg: TabConfig, stream: &mut EntropyStream) -> Result<Self> {
        let inner_bits = Self::inner_bits(&cfg)?;
        let inner = fill_tables_from_stream(stream, cfg.chars() as usize, cfg.sigma(), inner_bits)?;
        let outer = SimpleTab::from_stream(Self::outer_cfg(&cfg)?, stream)?;
        DoubleTab::from_parts(cfg, inner, outer)
    }

    pub fn cfg(&self) -> &TabConfig {
        &self.cfg
    }

    pub fn inner_tables(&self) -> &[CharTable] {
        &self.inner
    }

    pub fn outer(&self) -> &SimpleTab {
        &self.outer
    }

    /// The inner function's value: `d` derived characters packed low-first.
    #[inline]
    pub fn inner_eval(&self, x: u64) -> u64 {
        assert!(self.cfg.contains_key(x), "key {x:#x} outside universe");
        let cb = self.cfg.char_bits();
        let cm = self.cfg.char_mask();
        let mut acc = 0u64;
        for (i, t) in self.inner.iter().enumerate() {
            acc ^= t.get(((x >> (i as u32 * cb)) & cm) as u16);
        }
        acc
    }

    /// The derived characters as a vector.
    pub fn inner_chars(&self, x: u64) -> Vec<u16> {
        let v = self.inner_eval(x);
        let cb = self.cfg.char_bits();
        (0..self.cfg.derived_chars())
            .map(|j| ((v >> (j * cb)) & self.cfg.char_mask()) as u16)
            .collect()
    }
}

impl KeyHasher for DoubleTab {
    #[inline]
    fn hash(&self, x: u64) -> u64 {
        self.outer.hash(self.inner_eval(x))
    }

    fn out_bits(&self) -> u32 {
        self.cfg.out_bits()
    }
}
