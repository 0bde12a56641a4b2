//! Experiment harness: wires the hashers, the verification machinery, and
//! the hash-consuming structures into reproducible seeded experiments with
//! machine-readable reports.
//!
//! Reproducibility contract: a spec plus a master seed determines the report
//! byte for byte. Per-trial seeds come from [`derive_seed`], a counter-mode
//! derivation (ChaCha20 keyed by the parent seed, stream = index, first
//! word); trials are embarrassingly parallel and reduced in seed order.

mod experiments;
mod input;
mod report;
mod scheme;

pub use experiments::{conditioned_twisted, run_experiment};
pub use input::{gen_input, InputKind};
pub use report::{emit_report, read_json_report, write_report, write_report_stdout, ReportFormat, ReportRow};
pub use scheme::{build_hasher, AnyHasher, Scheme};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use std::path::PathBuf;

use tabhash::{Result, TabConfig, TabError};

/// Derives an independent seed for trial `index` from `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(parent);
    rng.set_stream(index);
    rng.next_u64()
}

/// Environment variable consulted for the default master seed.
pub const SEED_ENV_VAR: &str = "TABHASH_SEED";

/// The experiments the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Joint distribution of k fixed keys: exact enumeration at tiny
    /// geometries (simple/twisted), chi-square otherwise.
    Independence,
    /// XOR over 2x2 key rectangles under simple tabulation; always 0.
    XorWitness,
    /// n balls into m bins: max load and max deviation from n/m.
    Bins,
    /// k-th central moment of the bin counts around n/m.
    Moments,
    /// Mean unsuccessful-search probe count at load n/m.
    Linprobe,
    /// Max total probe count over windows of ceil(lg n) distinct-key
    /// operations on a table preloaded with n keys.
    Window,
    /// Cuckoo build success (one retry) for n keys in two tables of size m.
    Cuckoo,
    /// Two-choice placement of n balls into m bins; max load.
    TwoChoice,
    /// Empirical Pr[h(q) = min h(S)] over independently seeded hashers.
    Minwise,
    /// Jaccard estimate at overlap 1/2: trials minwise repetitions when
    /// k <= 1, one k-partitioned evaluation otherwise.
    Jaccard,
    /// k-partition estimate of a 0.3 label fraction over n items.
    Kpartition,
    /// Threshold sampling at uniform probability 0.1; sample size.
    Sample,
    /// Peeling of the derived-key matrix of n random keys.
    Peel,
    /// Exhaustive k-uniqueness of the full inner function table.
    Kunique,
    /// Sequential generator output vs pointwise twisted hashing.
    PrgEquiv,
    /// Dump n sequential values as little-endian binary.
    PrgDump,
    /// Bin concentration conditioned on h(q) = a vs unconditioned,
    /// paired per seed.
    ConditionedBins,
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Experiment::Independence => "independence",
            Experiment::XorWitness => "xor-witness",
            Experiment::Bins => "bins",
            Experiment::Moments => "moments",
            Experiment::Linprobe => "linprobe",
            Experiment::Window => "window",
            Experiment::Cuckoo => "cuckoo",
            Experiment::TwoChoice => "two-choice",
            Experiment::Minwise => "minwise",
            Experiment::Jaccard => "jaccard",
            Experiment::Kpartition => "kpartition",
            Experiment::Sample => "sample",
            Experiment::Peel => "peel",
            Experiment::Kunique => "kunique",
            Experiment::PrgEquiv => "prg-equiv",
            Experiment::PrgDump => "prg-dump",
            Experiment::ConditionedBins => "conditioned-bins",
        }
    }
}

/// A fully described experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub scheme: Scheme,
    pub cfg: TabConfig,
    /// Input size (balls, keys, set size, stream length).
    pub n: u64,
    /// Table/bin count where applicable.
    pub m: u64,
    /// Order parameter: tuple size, moment order, partition count.
    pub k: u64,
    /// Per-seed inner repetitions (hashers, queries, repetitions).
    pub trials: u64,
    /// Independent seed repetitions.
    pub seeds: u64,
    /// Degree+1 of the polynomial scheme.
    pub poly_k: u32,
    pub input: InputKind,
    /// Also compute the idealized-hasher column from the same trial seeds.
    pub baseline: bool,
    pub master_seed: u64,
    /// Binary output target for the dump experiment.
    pub dump_path: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Validates experiment/scheme compatibility before any work happens.
    pub fn validate(&self) -> Result<()> {
        use Experiment::*;
        let cfg = &self.cfg;
        if self.n == 0 && self.experiment != Kunique {
            return Err(TabError::Config("n must be positive".into()));
        }
        if self.seeds == 0 {
            return Err(TabError::Config("seeds must be positive".into()));
        }
        match self.scheme {
            Scheme::Double | Scheme::Mixed if cfg.derived_chars() == 0 => {
                return Err(TabError::Config(
                    "double/mixed schemes need derived characters (--derived >= 1)".into(),
                ));
            }
            Scheme::PolyK => {
                if cfg.universe() > tabhash::hashers::MERSENNE_61 as u128 {
                    return Err(TabError::Config(
                        "polynomial scheme needs the universe below 2^61 - 1".into(),
                    ));
                }
                if self.poly_k == 0 {
                    return Err(TabError::Config("poly-k degree must be >= 1".into()));
                }
                if cfg.out_bits() > 32 {
                    return Err(TabError::Config(
                        "polynomial scheme is run with at most 32 output bits".into(),
                    ));
                }
            }
            _ => {}
        }
        let pow2_bins = || -> Result<()> {
            if self.m == 0 || !self.m.is_power_of_two() {
                return Err(TabError::Config(format!(
                    "m = {} must be a power of two",
                    self.m
                )));
            }
            if (self.m as u128) > (1u128 << cfg.out_bits()) {
                return Err(TabError::Config(format!(
                    "m = {} exceeds the hash range 2^{}",
                    self.m,
                    cfg.out_bits()
                )));
            }
            Ok(())
        };
        match self.experiment {
            XorWitness => {
                if self.scheme != Scheme::Simple {
                    return Err(TabError::Config(
                        "the xor-witness identity is specific to simple tabulation".into(),
                    ));
                }
                if cfg.chars() < 2 {
                    return Err(TabError::Config("xor-witness needs c >= 2".into()));
                }
            }
            PrgEquiv | PrgDump | ConditionedBins => {
                if self.scheme != Scheme::Twisted {
                    return Err(TabError::Config(format!(
                        "{} requires the twisted scheme",
                        self.experiment.id()
                    )));
                }
                if cfg.chars() < 2 {
                    return Err(TabError::Config("twisted geometry needs c >= 2".into()));
                }
                if self.experiment == PrgDump && self.dump_path.is_none() {
                    return Err(TabError::Config(
                        "prg-dump needs an output path for the binary stream".into(),
                    ));
                }
                if self.experiment == ConditionedBins {
                    pow2_bins()?;
                }
            }
            Bins | Moments | TwoChoice => {
                pow2_bins()?;
                if self.experiment == TwoChoice {
                    let bits = self.m.trailing_zeros();
                    if 2 * bits > cfg.out_bits() {
                        return Err(TabError::Config(format!(
                            "two-choice needs 2 lg m = {} hash bits, have {}",
                            2 * bits,
                            cfg.out_bits()
                        )));
                    }
                }
            }
            Linprobe | Window => {
                pow2_bins()?;
                if self.n >= self.m {
                    return Err(TabError::Config(format!(
                        "load n = {} must stay below m = {}",
                        self.n, self.m
                    )));
                }
            }
            Cuckoo => {
                if self.m == 0 {
                    return Err(TabError::Config("m must be positive".into()));
                }
            }
            Independence => {
                if self.k == 0 || self.k > 4 {
                    return Err(TabError::Config(format!(
                        "independence tuple size k = {} outside 1..=4",
                        self.k
                    )));
                }
            }
            Jaccard | Kpartition => {
                if self.k > 1 && !self.k.is_power_of_two() {
                    return Err(TabError::Config(format!(
                        "partition count k = {} must be a power of two",
                        self.k
                    )));
                }
            }
            Peel | Kunique => {
                if cfg.derived_chars() == 0 {
                    return Err(TabError::Config(
                        "peel/kunique need derived characters (--derived >= 1)".into(),
                    ));
                }
            }
            Minwise | Sample => {}
        }
        if (self.n as u128) > self.cfg.universe() {
            return Err(TabError::Domain(format!(
                "n = {} exceeds the universe of {} keys",
                self.n,
                self.cfg.universe()
            )));
        }
        Ok(())
    }
}
