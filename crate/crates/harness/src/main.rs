use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tabhash::keyspace::{entry_width, fill_tables};
use tabhash::{EntropySource, TabConfig, TabError};
use tabhash_harness::{
    emit_report, run_experiment, Experiment, ExperimentSpec, InputKind, ReportFormat, Scheme,
    SEED_ENV_VAR,
};

/// Seeded tabulation-hashing experiments with machine-readable reports.
#[derive(Parser)]
#[command(name = "tabhash", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and emit a report (CSV or JSON).
    Run(RunArgs),
    /// Fill character tables from a seed and write them as a table file.
    DumpTables {
        #[arg(long, env = SEED_ENV_VAR, default_value_t = 0)]
        seed: u64,
        /// Bits per character (table length is 2^char-bits).
        #[arg(long, default_value_t = 8)]
        char_bits: u32,
        /// Number of tables.
        #[arg(long, default_value_t = 4)]
        count: u32,
        /// Bits per entry.
        #[arg(long, default_value_t = 32)]
        entry_bits: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time the hash families on one core and print ns per evaluation.
    /// Informational only; no pass/fail thresholds.
    Bench {
        #[arg(long, env = SEED_ENV_VAR, default_value_t = 0)]
        seed: u64,
        /// Evaluations per family.
        #[arg(long, default_value_t = 10_000_000)]
        count: u64,
    },
    /// Write n sequential twisted-tabulation values as little-endian binary
    /// (ceil(out-bits / 8) bytes per value).
    Prg {
        #[arg(long, env = SEED_ENV_VAR, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 8)]
        char_bits: u32,
        #[arg(long, default_value_t = 4)]
        chars: u32,
        #[arg(long, default_value_t = 32)]
        out_bits: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    #[arg(long, value_enum, default_value = "simple")]
    scheme: Scheme,
    #[arg(long, default_value_t = 8)]
    char_bits: u32,
    #[arg(long, default_value_t = 4)]
    chars: u32,
    #[arg(long, default_value_t = 32)]
    out_bits: u32,
    #[arg(long, default_value_t = 0)]
    derived: u32,
    #[arg(long, default_value_t = 1024)]
    n: u64,
    #[arg(long, default_value_t = 1024)]
    m: u64,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long, default_value_t = 16)]
    trials: u64,
    /// Independent seed repetitions.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Coefficient count for the polynomial scheme.
    #[arg(long, default_value_t = 2)]
    poly_k: u32,
    #[arg(long, env = SEED_ENV_VAR, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    input: InputKind,
    /// Also compute the idealized-hasher column from the same trial seeds.
    #[arg(long, default_value_t = false)]
    baseline: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormat,
    /// Report target; stdout when omitted. For prg-dump this is the binary
    /// stream target and the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> tabhash::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = TabConfig::new(args.char_bits, args.chars, args.out_bits, args.derived)?;
            let dump = matches!(args.experiment, Experiment::PrgDump);
            let spec = ExperimentSpec {
                experiment: args.experiment,
                scheme: args.scheme,
                cfg,
                n: args.n,
                m: args.m,
                k: args.k,
                trials: args.trials,
                seeds: args.seeds,
                poly_k: args.poly_k,
                input: args.input,
                baseline: args.baseline,
                master_seed: args.seed,
                dump_path: if dump { args.out.clone() } else { None },
            };
            let rows = run_experiment(&spec)?;
            match (&args.out, dump) {
                (Some(path), false) => emit_report(&rows, args.format, path)?,
                _ => tabhash_harness::write_report_stdout(&rows, args.format)?,
            }
            Ok(())
        }
        Command::DumpTables {
            seed,
            char_bits,
            count,
            entry_bits,
            out,
        } => {
            if !(1..=16).contains(&char_bits) {
                return Err(TabError::Config(format!(
                    "char_bits = {char_bits} outside 1..=16"
                )));
            }
            let tables = fill_tables(
                &EntropySource::seeded(seed),
                count as usize,
                1usize << char_bits,
                entry_bits,
            )?;
            tabhash::tablefile::write_tables(&out, char_bits, &tables)?;
            eprintln!(
                "wrote {count} tables of {} {entry_bits}-bit entries to {}",
                1usize << char_bits,
                out.display()
            );
            Ok(())
        }
        Command::Bench { seed, count } => bench(seed, count),
        Command::Prg {
            seed,
            count,
            char_bits,
            chars,
            out_bits,
            out,
        } => {
            let cfg = TabConfig::new(char_bits, chars, out_bits, 0)?;
            let h = tabhash::hashers::TwistedTab::from_source(
                cfg,
                tabhash::hashers::HeadPos::First,
                &EntropySource::seeded(seed),
            )?;
            let mut prg = tabhash::prg::PrgState::new(&h, 0)?;
            let width = entry_width(out_bits);
            let mut w = std::io::BufWriter::new(std::fs::File::create(&out)?);
            for i in 0..count {
                let v = prg.next_value().ok_or_else(|| {
                    TabError::Domain(format!("stream exhausted after {i} values"))
                })?;
                w.write_all(&v.to_le_bytes()[..width])?;
            }
            w.flush()?;
            eprintln!("wrote {count} values x {width} bytes to {}", out.display());
            Ok(())
        }
    }
}

/// One-core timing of the families over 32-bit keys at the (8, 4, 32)
/// geometry, plus the sequential generator.
fn bench(seed: u64, count: u64) -> tabhash::Result<()> {
    use std::time::Instant;
    use tabhash::hashers::{
        HeadPos, KeyHasher, MultShiftHasher, PolyHasher, SimpleTab, TwistedTab,
    };

    let cfg = TabConfig::new(8, 4, 32, 0)?;
    let src = EntropySource::seeded(seed);
    let keys: Vec<u64> = {
        // xorshift-mixed counter keeps the key stream out of the caches'
        // favor without paying for a real generator in the timed loop.
        (0..count)
            .map(|i| (i.wrapping_mul(0x9E3779B97F4A7C15) >> 32) & 0xFFFF_FFFF)
            .collect()
    };
    let time = |name: &str, f: &dyn Fn(u64) -> u64| {
        let start = Instant::now();
        let mut acc = 0u64;
        for &k in &keys {
            acc ^= f(k);
        }
        let ns = start.elapsed().as_nanos() as f64 / count as f64;
        println!("{name:12} {ns:7.2} ns/hash (checksum {acc:016x})");
    };

    let simple = SimpleTab::from_source(cfg, &src)?;
    time("simple", &|k| simple.hash(k));
    let twisted = TwistedTab::from_source(cfg, HeadPos::First, &src)?;
    time("twisted", &|k| twisted.hash(k));
    let poly2 = PolyHasher::from_source(2, 1 << 32, &src)?;
    time("poly-2", &|k| poly2.hash(k));
    let ms = MultShiftHasher::from_source(32, &src)?;
    time("mult-shift", &|k| ms.hash(k));

    let mut prg = tabhash::prg::PrgState::new(&twisted, 0)?;
    let start = std::time::Instant::now();
    let mut acc = 0u64;
    for _ in 0..count {
        match prg.next_value() {
            Some(v) => acc ^= v,
            None => prg = tabhash::prg::PrgState::new(&twisted, 0)?,
        }
    }
    let ns = start.elapsed().as_nanos() as f64 / count as f64;
    println!("{:12} {ns:7.2} ns/value (checksum {acc:016x})", "prg");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tabhash: {e}");
            match e {
                TabError::Io(_) | TabError::EntropyExhausted { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
