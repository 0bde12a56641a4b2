use serde::Serialize;

use tabhash::hashers::{
    DoubleTab, HeadPos, KeyHasher, MixedTab, MultShiftHasher, PolyHasher, SimpleTab, TrulyRandom,
    TwistedTab,
};
use tabhash::{EntropySource, Result, TabConfig};

/// The hash families the harness can run experiments against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Simple,
    Twisted,
    Double,
    Mixed,
    /// Degree `poly_k - 1` polynomial over the 2^61 - 1 field.
    PolyK,
    MultShift,
    TrulyRandom,
}

impl Scheme {
    pub fn id(&self) -> &'static str {
        match self {
            Scheme::Simple => "simple",
            Scheme::Twisted => "twisted",
            Scheme::Double => "double",
            Scheme::Mixed => "mixed",
            Scheme::PolyK => "poly-k",
            Scheme::MultShift => "mult-shift",
            Scheme::TrulyRandom => "truly-random",
        }
    }
}

/// One seeded hasher of any scheme, dispatched statically.
pub enum AnyHasher {
    Simple(SimpleTab),
    Twisted(TwistedTab),
    Double(DoubleTab),
    Mixed(MixedTab),
    Poly(PolyHasher),
    MultShift(MultShiftHasher),
    Truly(TrulyRandom),
}

impl KeyHasher for AnyHasher {
    fn hash(&self, x: u64) -> u64 {
        match self {
            AnyHasher::Simple(h) => h.hash(x),
            AnyHasher::Twisted(h) => h.hash(x),
            AnyHasher::Double(h) => h.hash(x),
            AnyHasher::Mixed(h) => h.hash(x),
            AnyHasher::Poly(h) => h.hash(x),
            AnyHasher::MultShift(h) => h.hash(x),
            AnyHasher::Truly(h) => h.hash(x),
        }
    }

    fn out_bits(&self) -> u32 {
        match self {
            AnyHasher::Simple(h) => h.out_bits(),
            AnyHasher::Twisted(h) => h.out_bits(),
            AnyHasher::Double(h) => h.out_bits(),
            AnyHasher::Mixed(h) => h.out_bits(),
            AnyHasher::Poly(h) => h.out_bits(),
            AnyHasher::MultShift(h) => h.out_bits(),
            AnyHasher::Truly(h) => h.out_bits(),
        }
    }
}

/// Builds a fresh hasher of the scheme at `cfg`, seeded. The twisted head is
/// the least significant character.
pub fn build_hasher(scheme: Scheme, cfg: &TabConfig, poly_k: u32, seed: u64) -> Result<AnyHasher> {
    let src = EntropySource::seeded(seed);
    Ok(match scheme {
        Scheme::Simple => AnyHasher::Simple(SimpleTab::from_source(*cfg, &src)?),
        Scheme::Twisted => {
            AnyHasher::Twisted(TwistedTab::from_source(*cfg, HeadPos::First, &src)?)
        }
        Scheme::Double => AnyHasher::Double(DoubleTab::from_source(*cfg, &src)?),
        Scheme::Mixed => AnyHasher::Mixed(MixedTab::from_source(*cfg, &src)?),
        Scheme::PolyK => {
            // Validation upstream keeps out_bits <= 32 so the modulus stays
            // far below the prime and uniformity on [m] holds to ~2^-29.
            AnyHasher::Poly(PolyHasher::from_source(poly_k, 1u64 << cfg.out_bits(), &src)?)
        }
        Scheme::MultShift => AnyHasher::MultShift(MultShiftHasher::from_source(cfg.out_bits(), &src)?),
        Scheme::TrulyRandom => AnyHasher::Truly(TrulyRandom::new(seed, cfg.out_bits())),
    })
}
