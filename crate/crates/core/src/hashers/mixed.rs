use crate::error::{Result, TabError};
use crate::keyspace::{
    fill_tables_from_stream, mask, CharTable, EntropySource, EntropyStream, TabConfig,
};

use super::{xor_lookup, KeyHasher, SimpleTab};

/// Mixed tabulation: the key is extended with `d` derived characters and the
/// whole derived key is hashed.
///
/// Stored in the `c + d`-lookup form: `combined` packs, per original
/// character, the derived-character contribution in the low `d * char_bits`
/// bits and the hash contribution above it; `derived_part` hashes the derived
/// characters.
#[derive(Debug, Clone)]
pub struct MixedTab {
    cfg: TabConfig,
    combined: Vec<CharTable>,
    derived_part: SimpleTab,
}

impl MixedTab {
    fn combined_bits(cfg: &TabConfig) -> Result<u32> {
        let d = cfg.derived_chars();
        if d == 0 {
            return Err(TabError::Config(
                "mixed tabulation needs at least 1 derived character".into(),
            ));
        }
        let bits = d * cfg.char_bits() + cfg.out_bits();
        if bits > 64 {
            return Err(TabError::Config(format!(
                "derived_chars * char_bits + out_bits = {bits} exceeds 64-bit combined entries"
            )));
        }
        Ok(bits)
    }

    /// Geometry of the derived-part hasher: `d` characters, `out_bits` output.
    pub fn derived_cfg(cfg: &TabConfig) -> Result<TabConfig> {
        Self::combined_bits(cfg)?;
        TabConfig::new(cfg.char_bits(), cfg.derived_chars(), cfg.out_bits(), 0)
    }

    pub fn from_parts(
        cfg: TabConfig,
        combined: Vec<CharTable>,
        derived_part: SimpleTab,
    ) -> Result<Self> {
        let bits = Self::combined_bits(&cfg)?;
        if combined.len() != cfg.chars() as usize {
            return Err(TabError::Config(format!(
                "expected {} combined tables, got {}",
                cfg.chars(),
                combined.len()
            )));
        }
        for (i, t) in combined.iter().enumerate() {
            if t.len() != cfg.sigma() || t.entry_bits() != bits {
                return Err(TabError::Config(format!(
                    "combined table {i}: {} entries of {} bits, expected {} of {bits}",
                    t.len(),
                    t.entry_bits(),
                    cfg.sigma()
                )));
            }
        }
        if *derived_part.cfg() != Self::derived_cfg(&cfg)? {
            return Err(TabError::Config(
                "derived-part hasher geometry does not match derived characters".into(),
            ));
        }
        Ok(MixedTab {
            cfg,
            combined,
            derived_part,
        })
    }

    /// Fills the combined tables first, then the derived-part tables.
    pub fn from_source(cfg: TabConfig, src: &EntropySource) -> Result<Self> {
        let mut stream = src.stream()?;
        Self::from_stream(cfg, &mut stream)
    }

    pub fn from_stream(cfg: TabConfig, stream: &mut EntropyStream) -> Result<Self> {
        let bits = Self::combined_bits(&cfg)?;
        let combined = fill_tables_from_stream(stream, cfg.chars() as usize, cfg.sigma(), bits)?;
        let derived_part = SimpleTab::from_stream(Self::derived_cfg(&cfg)?, stream)?;
        MixedTab::from_parts(cfg, combined, derived_part)
    }

    pub fn cfg(&self) -> &TabConfig {
        &self.cfg
    }

    pub fn combined_tables(&self) -> &[CharTable] {
        &self.combined
    }

    pub fn derived_part(&self) -> &SimpleTab {
        &self.derived_part
    }

    /// Combined lookup: `(v1, v2)` with `v1` the hash part and `v2` the packed
    /// derived characters.
    #[inline]
    fn combined_eval(&self, x: u64) -> (u64, u64) {
        assert!(self.cfg.contains_key(x), "key {x:#x} outside universe");
        let cb = self.cfg.char_bits();
        let cm = self.cfg.char_mask();
        let mut acc = 0u64;
        for (i, t) in self.combined.iter().enumerate() {
            acc ^= t.get(((x >> (i as u32 * cb)) & cm) as u16);
        }
        let dbits = self.cfg.derived_chars() * cb;
        (acc >> dbits, acc & mask(dbits))
    }

    /// The derived key `x ∘ h_1(x)`: the original `c` characters followed by
    /// the `d` derived ones. Injective in `x` since the original characters
    /// are a prefix.
    pub fn derive_key(&self, x: u64) -> Vec<u16> {
        let (_, v2) = self.combined_eval(x);
        let cb = self.cfg.char_bits();
        let cm = self.cfg.char_mask();
        let mut chars: Vec<u16> = (0..self.cfg.chars())
            .map(|i| ((x >> (i * cb)) & cm) as u16)
            .collect();
        chars.extend((0..self.cfg.derived_chars()).map(|j| ((v2 >> (j * cb)) & cm) as u16));
        chars
    }

    /// Splits the packed representation into the two definitional simple
    /// tabulation functions: the derived-key tables `h_1` (`c` tables of
    /// `d * char_bits` bits) and the full hash tables `h_2` (`c + d` tables
    /// of `out_bits` bits, original positions first).
    pub fn split_parts(&self) -> (Vec<CharTable>, Vec<CharTable>) {
        let dbits = self.cfg.derived_chars() * self.cfg.char_bits();
        let h1 = self
            .combined
            .iter()
            .map(|t| {
                CharTable::new(t.entries().iter().map(|&e| e & mask(dbits)).collect(), dbits)
                    .expect("masked entries fit")
            })
            .collect();
        let mut h2: Vec<CharTable> = self
            .combined
            .iter()
            .map(|t| {
                CharTable::new(
                    t.entries().iter().map(|&e| e >> dbits).collect(),
                    self.cfg.out_bits(),
                )
                .expect("shifted entries fit")
            })
            .collect();
        h2.extend(self.derived_part.tables().iter().cloned());
        (h1, h2)
    }

    /// The definitional route: evaluate `h_2` over all `c + d` characters of
    /// the derived key. Must agree with [`KeyHasher::hash`].
    pub fn definitional_hash(&self, x: u64) -> u64 {
        let (_, h2) = self.split_parts();
        xor_lookup(&h2, self.derive_key(x).into_iter())
    }
}

impl KeyHasher for MixedTab {
    /// The `c + d`-lookup route.
    #[inline]
    fn hash(&self, x: u64) -> u64 {
        let (v1, v2) = self.combined_eval(x);
        let cb = self.cfg.char_bits();
        let cm = self.cfg.char_mask();
        let chars =
            (0..self.cfg.derived_chars()).map(move |j| ((v2 >> (j * cb)) & cm) as u16);
        v1 ^ xor_lookup(self.derived_part.tables(), chars)
    }

    fn out_bits(&self) -> u32 {
        self.cfg.out_bits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tables_hash_to_zero_and_derive_suffix_zeros() {
        let cfg = TabConfig::new(4, 2, 8, 2).unwrap();
        let combined = vec![CharTable::zeroed(16, 16), CharTable::zeroed(16, 16)];
        let derived = SimpleTab::from_tables(
            MixedTab::derived_cfg(&cfg).unwrap(),
            vec![CharTable::zeroed(16, 8), CharTable::zeroed(16, 8)],
        )
        .unwrap();
        let h = MixedTab::from_parts(cfg, combined, derived).unwrap();
        for x in 0..256u64 {
            assert_eq!(h.hash(x), 0);
            let dk = h.derive_key(x);
            assert_eq!(dk[..2], [(x & 0xF) as u16, ((x >> 4) & 0xF) as u16]);
            assert_eq!(dk[2..], [0, 0]);
        }
    }

    #[test]
    fn derived_keys_are_prefix_injective() {
        let cfg = TabConfig::new(4, 2, 8, 2).unwrap();
        let h = MixedTab::from_source(cfg, &EntropySource::seeded(5)).unwrap();
        for x in 0..256u64 {
            for y in 0..x {
                assert_ne!(h.derive_key(x)[..2], h.derive_key(y)[..2]);
            }
        }
    }

    #[test]
    fn derived_chars_match_column_extraction() {
        // d = 2, c = 2, Σ = 16: the derived characters must equal an
        // independent simple-tab evaluation of the same table columns.
        let cfg = TabConfig::new(4, 2, 8, 2).unwrap();
        let h = MixedTab::from_source(cfg, &EntropySource::seeded(11)).unwrap();
        let (h1, _) = h.split_parts();
        for x in 0..256u64 {
            let packed = xor_lookup(&h1, [(x & 0xF) as u16, ((x >> 4) & 0xF) as u16].into_iter());
            let dk = h.derive_key(x);
            assert_eq!(dk[2], (packed & 0xF) as u16);
            assert_eq!(dk[3], ((packed >> 4) & 0xF) as u16);
        }
    }

    #[test]
    fn efficient_form_equals_definitional_form() {
        let cfg = TabConfig::new(8, 4, 16, 2).unwrap();
        let h = MixedTab::from_source(cfg, &EntropySource::seeded(13)).unwrap();
        let mut x = 1u64;
        for _ in 0..100_000 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1);
            let key = x & 0xFFFF_FFFF;
            assert_eq!(h.hash(key), h.definitional_hash(key));
        }
    }

    #[test]
    fn rejects_zero_derived_chars() {
        let cfg = TabConfig::new(8, 2, 16, 0).unwrap();
        assert!(matches!(
            MixedTab::from_source(cfg, &EntropySource::seeded(0)).unwrap_err(),
            TabError::Config(_)
        ));
    }

    #[test]
    fn rejects_oversized_combined_entries() {
        // 4 * 16 + 64 = 128 bits cannot be packed.
        let cfg = TabConfig::new(16, 2, 64, 4).unwrap();
        assert!(matches!(
            MixedTab::from_source(cfg, &EntropySource::seeded(0)).unwrap_err(),
            TabError::Config(_)
        ));
    }
}
