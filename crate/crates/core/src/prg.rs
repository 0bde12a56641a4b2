//! Sequential pseudo-random generation from twisted tabulation.
//!
//! The stream is `h(0), h(1), ...` for a twisted hasher whose head is the
//! least significant character. Consecutive counters share a tail, so the
//! star lookup `(t, h_gt0)` is cached in a register and refreshed only when
//! the head character wraps, once every `Σ` emissions.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Result, TabError};
use crate::hashers::{HeadPos, TwistedTab};
use crate::keyspace::{mask, TabConfig};

/// Supplies `(t, h_gt0)` for a given tail index.
enum TailSource<'a> {
    /// Star-table XOR of the hasher's own tables.
    Tables(&'a TwistedTab),
    /// The tail hash drawn from a seekable strong stream instead of tables.
    /// A conversion of a slow-but-strong generator into a fast one: the
    /// stream is consulted once per `Σ` emissions.
    Stream {
        rng: ChaCha20Rng,
        char_bits: u32,
        out_bits: u32,
    },
}

impl TailSource<'_> {
    fn eval(&mut self, tail: u64, char_bits: u32) -> (u16, u64) {
        match self {
            TailSource::Tables(h) => h.star_eval(tail << char_bits),
            TailSource::Stream {
                rng,
                char_bits,
                out_bits,
            } => {
                // Two words per tail index keeps repositioning O(1).
                rng.set_word_pos(tail as u128 * 4);
                let t = (rng.next_u64() & mask(*char_bits)) as u16;
                let h_gt0 = rng.next_u64() & mask(*out_bits);
                (t, h_gt0)
            }
        }
    }
}

/// Counter state plus the cached tail hash.
pub struct PrgState<'a> {
    cfg: TabConfig,
    head_table_hash: HeadLookup<'a>,
    tail: TailSource<'a>,
    counter: u64,
    exhausted: bool,
    cached: (u16, u64),
    stats: PrgStats,
}

enum HeadLookup<'a> {
    Table(&'a TwistedTab),
    Owned(Vec<u64>),
}

impl HeadLookup<'_> {
    #[inline]
    fn get(&self, ch: u16) -> u64 {
        match self {
            HeadLookup::Table(h) => h.head_table().get(ch),
            HeadLookup::Owned(v) => v[ch as usize],
        }
    }
}

/// Lookup and refresh counters for the amortization claims.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrgStats {
    pub emissions: u64,
    pub char_lookups: u64,
    pub tail_refreshes: u64,
}

impl<'a> PrgState<'a> {
    /// Positions the stream so the next emission is `hasher.hash(start)`.
    ///
    /// The hasher's head must be the least significant character and the
    /// geometry must have a tail (`c >= 2`).
    pub fn new(hasher: &'a TwistedTab, start: u64) -> Result<Self> {
        if hasher.head_pos() != HeadPos::First {
            return Err(TabError::Config(
                "sequential generation needs the head at the least significant character".into(),
            ));
        }
        let cfg = *hasher.cfg();
        if cfg.chars() < 2 {
            return Err(TabError::Config(
                "sequential generation needs c >= 2 (no tail exists)".into(),
            ));
        }
        cfg.check_key(start)?;
        let mut state = PrgState {
            cfg,
            head_table_hash: HeadLookup::Table(hasher),
            tail: TailSource::Tables(hasher),
            counter: start,
            exhausted: false,
            cached: (0, 0),
            stats: PrgStats::default(),
        };
        state.refresh_tail();
        state.stats = PrgStats::default(); // positioning cost is not stream cost
        Ok(state)
    }

    /// The alternative construction: no star tables, the tail hash comes from
    /// a seeded strong stream; only the head table is materialized.
    pub fn with_stream_tail(cfg: TabConfig, head_table_seed: u64, tail_seed: u64, start: u64) -> Result<Self> {
        if cfg.chars() < 2 {
            return Err(TabError::Config(
                "sequential generation needs c >= 2 (no tail exists)".into(),
            ));
        }
        cfg.check_key(start)?;
        let tables = crate::keyspace::fill_tables(
            &crate::keyspace::EntropySource::seeded(head_table_seed),
            1,
            cfg.sigma(),
            cfg.out_bits(),
        )?;
        let head = tables.into_iter().next().expect("one table");
        let mut state = PrgState {
            cfg,
            head_table_hash: HeadLookup::Owned(head.entries().to_vec()),
            tail: TailSource::Stream {
                rng: ChaCha20Rng::seed_from_u64(tail_seed),
                char_bits: cfg.char_bits(),
                out_bits: cfg.out_bits(),
            },
            counter: start,
            exhausted: false,
            cached: (0, 0),
            stats: PrgStats::default(),
        };
        state.refresh_tail();
        state.stats = PrgStats::default();
        Ok(state)
    }

    fn refresh_tail(&mut self) {
        let tail = self.counter >> self.cfg.char_bits();
        self.cached = self.tail.eval(tail, self.cfg.char_bits());
        self.stats.tail_refreshes += 1;
        if matches!(self.tail, TailSource::Tables(_)) {
            self.stats.char_lookups += self.cfg.chars() as u64 - 1;
        }
    }

    /// Emits the hash of the current counter and advances. `None` once the
    /// counter has wrapped past `Σ^c - 1`; reposition with a fresh state to
    /// continue.
    pub fn next_value(&mut self) -> Option<u64> {
        if self.exhausted {
            return None;
        }
        let (t, h_gt0) = self.cached;
        let head_char = (self.counter & self.cfg.char_mask()) as u16;
        let value = h_gt0 ^ self.head_table_hash.get(head_char ^ t);
        self.stats.char_lookups += 1;
        self.stats.emissions += 1;

        // u128 so that universes of exactly 2^64 keys wrap correctly.
        if self.counter as u128 + 1 >= self.cfg.universe() {
            self.exhausted = true;
        } else {
            self.counter += 1;
            if self.counter & self.cfg.char_mask() == 0 {
                self.refresh_tail();
            }
        }
        Some(value)
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn stats(&self) -> PrgStats {
        self.stats
    }
}

impl Iterator for PrgState<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        self.next_value()
    }
}
