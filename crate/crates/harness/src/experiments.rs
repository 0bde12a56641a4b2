use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use tabhash::analysis::{
    empirical_central_moment, exact_joint_distribution, independence_chi_square, is_k_unique,
    peel_unique, DerivedKeyMatrix, EnumScheme,
};
use tabhash::apps::{
    cuckoo_build, jaccard_kpartition, jaccard_repetition, kpartition_fraction, minwise_sample,
    threshold_sample, two_choice_place, LinearProbeTable, TableOp,
};
use tabhash::hashers::{HeadPos, KeyHasher, TrulyRandom, TwistedTab};
use tabhash::keyspace::{entry_width, CharTable};
use tabhash::prg::PrgState;
use tabhash::{EntropySource, Result, TabConfig, TabError};

use crate::input::{gen_input, rectangle_keys};
use crate::report::ReportRow;
use crate::scheme::{build_hasher, AnyHasher, Scheme};
use crate::{derive_seed, Experiment, ExperimentSpec};

/// Sub-seed roles under one trial seed, so hasher, input, baseline and
/// auxiliary hashers never share randomness.
mod sub {
    pub const HASHER: u64 = 0;
    pub const INPUT: u64 = 1;
    pub const BASELINE: u64 = 2;
    pub const HASHER2: u64 = 3;
    pub const RETRY: u64 = 4;
    pub const RETRY2: u64 = 5;
    pub const AUX: u64 = 6;
    /// Parent for the per-seed loop, so trial indices never collide with
    /// the role indices above.
    pub const TRIALS: u64 = 7;
}

struct Ctx<'a> {
    spec: &'a ExperimentSpec,
    params: String,
}

impl Ctx<'_> {
    fn row(&self, seed: u64, statistic: &str, value: f64, baseline: Option<f64>) -> ReportRow {
        ReportRow {
            experiment: self.spec.experiment.id().into(),
            scheme: self.spec.scheme.id().into(),
            params: self.params.clone(),
            seed,
            statistic: statistic.into(),
            value,
            baseline,
        }
    }

    fn hasher(&self, seed: u64) -> Result<AnyHasher> {
        build_hasher(self.spec.scheme, &self.spec.cfg, self.spec.poly_k, seed)
    }
}

/// Runs the experiment; rows come back in deterministic seed order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ReportRow>> {
    spec.validate()?;
    let cfg = spec.cfg;
    let params = format!(
        r#"{{"char_bits":{},"chars":{},"out_bits":{},"derived":{},"n":{},"m":{},"k":{},"trials":{},"seeds":{},"input":"{}","master_seed":{}}}"#,
        cfg.char_bits(),
        cfg.chars(),
        cfg.out_bits(),
        cfg.derived_chars(),
        spec.n,
        spec.m,
        spec.k,
        spec.trials,
        spec.seeds,
        spec.input.id(),
        spec.master_seed,
    );
    let ctx = Ctx { spec, params };
    match spec.experiment {
        Experiment::Independence => independence(&ctx),
        Experiment::XorWitness => xor_witness(&ctx),
        Experiment::Bins => bins(&ctx),
        Experiment::Moments => moments(&ctx),
        Experiment::Linprobe => linprobe(&ctx),
        Experiment::Window => window(&ctx),
        Experiment::Cuckoo => cuckoo(&ctx),
        Experiment::TwoChoice => two_choice(&ctx),
        Experiment::Minwise => minwise(&ctx),
        Experiment::Jaccard => jaccard(&ctx),
        Experiment::Kpartition => kpartition(&ctx),
        Experiment::Sample => sample(&ctx),
        Experiment::Peel => peel(&ctx),
        Experiment::Kunique => kunique(&ctx),
        Experiment::PrgEquiv => prg_equiv(&ctx),
        Experiment::PrgDump => prg_dump(&ctx),
        Experiment::ConditionedBins => conditioned_bins(&ctx),
    }
}

/// Parallel map over seed indices, reduced in order.
fn per_seed<F>(ctx: &Ctx, f: F) -> Result<Vec<ReportRow>>
where
    F: Fn(u64, u64) -> Result<Vec<ReportRow>> + Sync,
{
    let spec = ctx.spec;
    let trials_master = derive_seed(spec.master_seed, sub::TRIALS);
    let results: Vec<Result<Vec<ReportRow>>> = (0..spec.seeds)
        .into_par_iter()
        .map(|i| f(i, derive_seed(trials_master, i)))
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn bin_counts<H: KeyHasher>(h: &H, keys: &[u64], m: u64) -> Vec<u32> {
    let mask = m - 1;
    let mut counts = vec![0u32; m as usize];
    for &k in keys {
        counts[(h.hash(k) & mask) as usize] += 1;
    }
    counts
}

fn max_load(counts: &[u32]) -> u64 {
    counts.iter().copied().max().unwrap_or(0) as u64
}

fn max_abs_dev(counts: &[u32], mu: f64) -> f64 {
    counts
        .iter()
        .map(|&c| (c as f64 - mu).abs())
        .fold(0.0, f64::max)
}

fn independence(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    let keys = gen_input(spec.input, spec.k.max(1), &spec.cfg, derive_seed(spec.master_seed, sub::INPUT))?;
    let enum_scheme = match spec.scheme {
        Scheme::Simple => Some(EnumScheme::Simple),
        Scheme::Twisted => Some(EnumScheme::Twisted),
        _ => None,
    };
    if let Some(scheme) = enum_scheme {
        if let Ok(dist) = exact_joint_distribution(&spec.cfg, scheme, &keys) {
            let cells = dist.counts.len() as f64;
            let expected = dist.total as f64 / cells;
            let worst = dist
                .counts
                .iter()
                .map(|&c| (c as f64 - expected).abs())
                .fold(0.0, f64::max);
            return Ok(vec![
                ctx.row(spec.master_seed, "enumerated_fillings", dist.total as f64, None),
                ctx.row(spec.master_seed, "max_count_deviation", worst, None),
                ctx.row(
                    spec.master_seed,
                    "uniform",
                    if dist.is_uniform() { 1.0 } else { 0.0 },
                    None,
                ),
            ]);
        }
    }
    // Too large to enumerate (or a non-tabulation scheme): chi-square.
    per_seed(ctx, |_, rep_seed| {
        let hasher_master = derive_seed(rep_seed, sub::HASHER);
        let r = independence_chi_square(
            |t| ctx.hasher(derive_seed(hasher_master, t)).expect("validated scheme"),
            &keys,
            spec.cfg.out_bits(),
            spec.trials,
        )?;
        let baseline = if spec.baseline {
            let baseline_master = derive_seed(rep_seed, sub::BASELINE);
            let b = independence_chi_square(
                |t| TrulyRandom::new(derive_seed(baseline_master, t), spec.cfg.out_bits()),
                &keys,
                spec.cfg.out_bits(),
                spec.trials,
            )?;
            Some(b.p_value)
        } else {
            None
        };
        Ok(vec![
            ctx.row(rep_seed, "chi_square", r.statistic, None),
            ctx.row(rep_seed, "p_value", r.p_value, baseline),
        ])
    })
}

fn xor_witness(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    per_seed(ctx, |_, trial| {
        let h = ctx.hasher(derive_seed(trial, sub::HASHER))?;
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(trial, sub::INPUT));
        let cfg = &spec.cfg;
        let mut worst = 0u64;
        // A handful of random rectangles per seed, random positions and base.
        for _ in 0..spec.trials.max(1) {
            let i = rng.gen_range(0..cfg.chars());
            let mut j = rng.gen_range(0..cfg.chars());
            while j == i {
                j = rng.gen_range(0..cfg.chars());
            }
            let base = (rng.gen::<u128>() % cfg.universe()) as u64;
            let sigma = cfg.sigma() as u16;
            let a = (rng.gen_range(0..sigma), rng.gen_range(0..sigma));
            let b = (rng.gen_range(0..sigma), rng.gen_range(0..sigma));
            let keys = rectangle_keys(cfg, base, i, a, j, b);
            let x = keys.iter().fold(0u64, |acc, &k| acc ^ h.hash(k));
            worst = worst.max(x);
        }
        Ok(vec![ctx.row(trial, "max_rectangle_xor", worst as f64, None)])
    })
}

fn bins(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    let mu = spec.n as f64 / spec.m as f64;
    per_seed(ctx, |_, trial| {
        let keys = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let h = ctx.hasher(derive_seed(trial, sub::HASHER))?;
        let counts = bin_counts(&h, &keys, spec.m);
        let (bl_load, bl_dev) = if spec.baseline {
            let b = TrulyRandom::new(derive_seed(trial, sub::BASELINE), spec.cfg.out_bits());
            let bc = bin_counts(&b, &keys, spec.m);
            (Some(max_load(&bc) as f64), Some(max_abs_dev(&bc, mu)))
        } else {
            (None, None)
        };
        Ok(vec![
            ctx.row(trial, "max_load", max_load(&counts) as f64, bl_load),
            ctx.row(trial, "max_abs_dev", max_abs_dev(&counts, mu), bl_dev),
        ])
    })
}

fn moments(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    let mu = spec.n as f64 / spec.m as f64;
    let order = spec.k.max(1) as u32;
    per_seed(ctx, |_, trial| {
        let keys = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let h = ctx.hasher(derive_seed(trial, sub::HASHER))?;
        let counts: Vec<f64> = bin_counts(&h, &keys, spec.m)
            .into_iter()
            .map(f64::from)
            .collect();
        let moment = empirical_central_moment(&counts, order, mu)?;
        let baseline = if spec.baseline {
            let b = TrulyRandom::new(derive_seed(trial, sub::BASELINE), spec.cfg.out_bits());
            let bc: Vec<f64> = bin_counts(&b, &keys, spec.m)
                .into_iter()
                .map(f64::from)
                .collect();
            Some(empirical_central_moment(&bc, order, mu)?)
        } else {
            None
        };
        Ok(vec![ctx.row(trial, "central_moment", moment, baseline)])
    })
}

/// Fills a probe table with the keys and measures unsuccessful searches for
/// fresh keys outside the stored set.
fn mean_unsuccessful<H: KeyHasher>(
    h: H,
    keys: &[u64],
    m: u64,
    queries: u64,
    rng: &mut ChaCha20Rng,
    universe: u128,
) -> Result<f64> {
    let mut t = LinearProbeTable::new(m as usize, h)?;
    let stored: std::collections::HashSet<u64> = keys.iter().copied().collect();
    for &k in keys {
        t.insert(k, 0)?;
    }
    let mut total = 0u64;
    for _ in 0..queries {
        let mut q = (rng.gen::<u128>() % universe) as u64;
        while stored.contains(&q) {
            q = (rng.gen::<u128>() % universe) as u64;
        }
        total += t.query(q).1;
    }
    Ok(total as f64 / queries as f64)
}

fn linprobe(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    per_seed(ctx, |_, trial| {
        let keys = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let queries = spec.trials.max(1);
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(trial, sub::AUX));
        let mean = mean_unsuccessful(
            ctx.hasher(derive_seed(trial, sub::HASHER))?,
            &keys,
            spec.m,
            queries,
            &mut rng,
            spec.cfg.universe(),
        )?;
        let baseline = if spec.baseline {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(trial, sub::AUX));
            Some(mean_unsuccessful(
                TrulyRandom::new(derive_seed(trial, sub::BASELINE), spec.cfg.out_bits()),
                &keys,
                spec.m,
                queries,
                &mut rng,
                spec.cfg.universe(),
            )?)
        } else {
            None
        };
        Ok(vec![ctx.row(trial, "mean_unsuccessful_probes", mean, baseline)])
    })
}

/// Max window cost: preload n keys, run `trials` windows of ceil(lg n)
/// unsuccessful searches on distinct fresh keys.
fn window_max<H: KeyHasher>(
    h: H,
    keys: &[u64],
    m: u64,
    windows: u64,
    rng: &mut ChaCha20Rng,
    universe: u128,
) -> Result<f64> {
    let mut t = LinearProbeTable::new(m as usize, h)?;
    let mut used: std::collections::HashSet<u64> = keys.iter().copied().collect();
    for &k in keys {
        t.insert(k, 0)?;
    }
    let w = (64 - (keys.len().max(2) as u64 - 1).leading_zeros()) as usize; // ceil(lg n)
    let mut ops = Vec::new();
    for _ in 0..windows * w as u64 {
        let mut q = (rng.gen::<u128>() % universe) as u64;
        while !used.insert(q) {
            q = (rng.gen::<u128>() % universe) as u64;
        }
        ops.push(TableOp::Query(q));
    }
    let costs = tabhash::apps::window_cost(&mut t, &ops, w)?;
    Ok(costs.into_iter().max().unwrap_or(0) as f64)
}

fn window(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    per_seed(ctx, |_, trial| {
        let keys = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let windows = spec.trials.max(1);
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(trial, sub::AUX));
        let worst = window_max(
            ctx.hasher(derive_seed(trial, sub::HASHER))?,
            &keys,
            spec.m,
            windows,
            &mut rng,
            spec.cfg.universe(),
        )?;
        let baseline = if spec.baseline {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(trial, sub::AUX));
            Some(window_max(
                TrulyRandom::new(derive_seed(trial, sub::BASELINE), spec.cfg.out_bits()),
                &keys,
                spec.m,
                windows,
                &mut rng,
                spec.cfg.universe(),
            )?)
        } else {
            None
        };
        Ok(vec![ctx.row(trial, "max_window_cost", worst, baseline)])
    })
}

fn cuckoo_attempt(ctx: &Ctx, keys: &[u64], trial: u64, s0: u64, s1: u64) -> Result<bool> {
    let spec = ctx.spec;
    let h0 = ctx.hasher(derive_seed(trial, s0))?;
    let h1 = ctx.hasher(derive_seed(trial, s1))?;
    let max_kicks = 32 * (64 - (spec.n.max(2) - 1).leading_zeros()) as u64; // 32 ceil(lg n)
    Ok(cuckoo_build(keys, &h0, &h1, spec.m as usize, max_kicks)?.is_ok())
}

fn cuckoo(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    per_seed(ctx, |_, trial| {
        let keys = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let first = cuckoo_attempt(ctx, &keys, trial, sub::HASHER, sub::HASHER2)?;
        let with_retry = first || cuckoo_attempt(ctx, &keys, trial, sub::RETRY, sub::RETRY2)?;
        Ok(vec![
            ctx.row(trial, "first_try_success", first as u64 as f64, None),
            ctx.row(trial, "success_with_retry", with_retry as u64 as f64, None),
        ])
    })
}

fn two_choice(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    per_seed(ctx, |_, trial| {
        let keys = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let h = ctx.hasher(derive_seed(trial, sub::HASHER))?;
        let r = two_choice_place(&keys, &h, spec.m as usize)?;
        let baseline = if spec.baseline {
            let b = TrulyRandom::new(derive_seed(trial, sub::BASELINE), spec.cfg.out_bits());
            Some(two_choice_place(&keys, &b, spec.m as usize)?.max_load as f64)
        } else {
            None
        };
        Ok(vec![ctx.row(trial, "max_load", r.max_load as f64, baseline)])
    })
}

fn minwise(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    let set = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(spec.master_seed, sub::INPUT))?;
    let q = set[0];
    let hits = |master: u64,
                mk: &(dyn Fn(u64) -> Result<Box<dyn KeyHasher + Send>> + Sync)|
     -> Result<(u64, u64)> {
        let counted: Vec<Result<(u64, u64)>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| {
                let h = mk(derive_seed(master, t))?;
                let s = minwise_sample(&h, &set)?;
                Ok(((h.hash(q) == s.hash) as u64, s.collisions))
            })
            .collect();
        let mut hit = 0;
        let mut collisions = 0;
        for c in counted {
            let (h, col) = c?;
            hit += h;
            collisions += col;
        }
        Ok((hit, collisions))
    };
    let hasher_master = derive_seed(spec.master_seed, sub::HASHER);
    let (hit, collisions) = hits(hasher_master, &|seed| {
        Ok(Box::new(ctx.hasher(seed)?) as Box<dyn KeyHasher + Send>)
    })?;
    let baseline = if spec.baseline {
        let baseline_master = derive_seed(spec.master_seed, sub::BASELINE);
        let (bh, _) = hits(baseline_master, &|seed| {
            Ok(Box::new(TrulyRandom::new(seed, spec.cfg.out_bits())) as Box<dyn KeyHasher + Send>)
        })?;
        Some(bh as f64 / spec.trials as f64)
    } else {
        None
    };
    Ok(vec![
        ctx.row(
            spec.master_seed,
            "min_probability",
            hit as f64 / spec.trials as f64,
            baseline,
        ),
        ctx.row(spec.master_seed, "tie_events", collisions as f64, None),
    ])
}

/// A and B overlap in half the union: A is the first 3/4, B the last 3/4.
fn overlapping_sets(union: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let n = union.len();
    (union[..3 * n / 4].to_vec(), union[n / 4..].to_vec())
}

fn jaccard(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    per_seed(ctx, |_, trial| {
        let union = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let (a, b) = overlapping_sets(&union);
        let est = if spec.k > 1 {
            jaccard_kpartition(
                &ctx.hasher(derive_seed(trial, sub::HASHER))?,
                &a,
                &b,
                spec.k as usize,
            )?
        } else {
            let hseed = derive_seed(trial, sub::HASHER);
            jaccard_repetition(
                |rep| ctx.hasher(derive_seed(hseed, rep)).expect("validated scheme"),
                spec.trials,
                &a,
                &b,
            )?
        };
        let baseline = if spec.baseline {
            let bseed = derive_seed(trial, sub::BASELINE);
            Some(if spec.k > 1 {
                jaccard_kpartition(
                    &TrulyRandom::new(bseed, spec.cfg.out_bits()),
                    &a,
                    &b,
                    spec.k as usize,
                )?
            } else {
                jaccard_repetition(
                    |rep| TrulyRandom::new(derive_seed(bseed, rep), spec.cfg.out_bits()),
                    spec.trials,
                    &a,
                    &b,
                )?
            })
        } else {
            None
        };
        Ok(vec![ctx.row(trial, "jaccard_estimate", est, baseline)])
    })
}

/// Label fraction estimated by k-partition bottom samples; truth is 0.3.
pub const KPARTITION_RED_FRACTION: f64 = 0.3;

fn kpartition(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    let k = spec.k.max(1) as usize;
    per_seed(ctx, |_, trial| {
        let keys = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let reds = (KPARTITION_RED_FRACTION * keys.len() as f64).round() as usize;
        let items: Vec<(u64, bool)> = keys
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i < reds))
            .collect();
        let h = ctx.hasher(derive_seed(trial, sub::HASHER))?;
        let est = kpartition_fraction(&h, &items, k)?;
        let baseline = if spec.baseline {
            let b = TrulyRandom::new(derive_seed(trial, sub::BASELINE), spec.cfg.out_bits());
            Some(kpartition_fraction(&b, &items, k)?)
        } else {
            None
        };
        Ok(vec![ctx.row(trial, "red_fraction_estimate", est, baseline)])
    })
}

/// Uniform threshold-sampling probability used by the sample experiment.
pub const SAMPLE_PROBABILITY: f64 = 0.1;

fn sample(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    per_seed(ctx, |_, trial| {
        let keys = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let items: Vec<(u64, f64)> = keys.iter().map(|&x| (x, SAMPLE_PROBABILITY)).collect();
        let h = ctx.hasher(derive_seed(trial, sub::HASHER))?;
        let size = threshold_sample(&h, &items)?.len() as f64;
        let baseline = if spec.baseline {
            let b = TrulyRandom::new(derive_seed(trial, sub::BASELINE), spec.cfg.out_bits());
            Some(threshold_sample(&b, &items)?.len() as f64)
        } else {
            None
        };
        Ok(vec![ctx.row(trial, "sample_size", size, baseline)])
    })
}

fn peel(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    per_seed(ctx, |_, trial| {
        let keys = gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        let inner = tabhash::hashers::DoubleTab::from_source(
            spec.cfg,
            &EntropySource::seeded(derive_seed(trial, sub::HASHER)),
        )?;
        let matrix = DerivedKeyMatrix::from_double(&inner, &keys)?;
        let verdict = peel_unique(&matrix);
        let residual = match &verdict {
            tabhash::analysis::PeelVerdict::Peelable => 0,
            tabhash::analysis::PeelVerdict::Residual(r) => r.len(),
        };
        Ok(vec![
            ctx.row(trial, "peelable", verdict.is_peelable() as u64 as f64, None),
            ctx.row(trial, "residual_keys", residual as f64, None),
        ])
    })
}

fn kunique(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    if spec.cfg.universe() > 1 << 20 {
        return Err(TabError::Feasibility(format!(
            "kunique enumerates the whole universe; {} keys is too many",
            spec.cfg.universe()
        )));
    }
    per_seed(ctx, |_, trial| {
        let inner = tabhash::hashers::DoubleTab::from_source(
            spec.cfg,
            &EntropySource::seeded(derive_seed(trial, sub::HASHER)),
        )?;
        let rows: Vec<Vec<u16>> = (0..spec.cfg.universe() as u64)
            .map(|x| inner.inner_chars(x))
            .collect();
        let verdict = is_k_unique(&rows, spec.k.max(1) as usize)?;
        Ok(vec![ctx.row(
            trial,
            "k_unique",
            verdict.is_k_unique() as u64 as f64,
            None,
        )])
    })
}

fn prg_equiv(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    per_seed(ctx, |_, trial| {
        let h = TwistedTab::from_source(
            spec.cfg,
            HeadPos::First,
            &EntropySource::seeded(derive_seed(trial, sub::HASHER)),
        )?;
        let mut prg = PrgState::new(&h, 0)?;
        let mut mismatches = 0u64;
        for x in 0..spec.n {
            let v = prg
                .next_value()
                .ok_or_else(|| TabError::Domain("stream exhausted before n values".into()))?;
            if v != h.hash(x) {
                mismatches += 1;
            }
        }
        Ok(vec![ctx.row(trial, "mismatches", mismatches as f64, None)])
    })
}

fn prg_dump(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    let path = spec.dump_path.as_ref().expect("validated");
    let h = TwistedTab::from_source(
        spec.cfg,
        HeadPos::First,
        &EntropySource::seeded(derive_seed(spec.master_seed, sub::HASHER)),
    )?;
    let mut prg = PrgState::new(&h, 0)?;
    let width = entry_width(spec.cfg.out_bits());
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for _ in 0..spec.n {
        let v = prg
            .next_value()
            .ok_or_else(|| TabError::Domain("stream exhausted before n values".into()))?;
        w.write_all(&v.to_le_bytes()[..width])?;
    }
    w.flush()?;
    Ok(vec![ctx.row(spec.master_seed, "values_written", spec.n as f64, None)])
}

/// Builds a twisted hasher conditioned on `hash(q) = a` by fixing the head
/// table entry of q's twisted head after all other entries are drawn, and
/// the unconditioned hasher sharing every other entry.
pub fn conditioned_twisted(
    cfg: &TabConfig,
    seed: u64,
    q: u64,
    a: u64,
) -> Result<(TwistedTab, TwistedTab)> {
    let plain = TwistedTab::from_source(*cfg, HeadPos::First, &EntropySource::seeded(seed))?;
    let t_q = ((plain.twist_key(q) ^ q) & cfg.char_mask()) as u16;
    let twisted_head = cfg.char_at(q, 0) ^ t_q;
    let h_gt0 = plain.hash(q) ^ plain.head_table().get(twisted_head);
    let mut entries = plain.head_table().entries().to_vec();
    entries[twisted_head as usize] = (a & cfg.out_mask()) ^ h_gt0;
    let head = CharTable::new(entries, cfg.out_bits())?;
    let conditioned = TwistedTab::from_parts(*cfg, HeadPos::First, plain.star_tables().to_vec(), head)?;
    Ok((conditioned, plain))
}

fn conditioned_bins(ctx: &Ctx) -> Result<Vec<ReportRow>> {
    let spec = ctx.spec;
    let mu = spec.n as f64 / spec.m as f64;
    per_seed(ctx, |_, trial| {
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(trial, sub::AUX));
        let q = (rng.gen::<u128>() % spec.cfg.universe()) as u64;
        let a = rng.gen::<u64>() & spec.cfg.out_mask();
        let (cond, plain) = conditioned_twisted(&spec.cfg, derive_seed(trial, sub::HASHER), q, a)?;
        debug_assert_eq!(cond.hash(q), a);
        let mut keys =
            gen_input(spec.input, spec.n, &spec.cfg, derive_seed(trial, sub::INPUT))?;
        keys.retain(|&x| x != q); // q is the query ball, not a regular ball
        let dev_cond = max_abs_dev(&bin_counts(&cond, &keys, spec.m), mu);
        let dev_plain = max_abs_dev(&bin_counts(&plain, &keys, spec.m), mu);
        Ok(vec![ctx.row(trial, "max_abs_dev_conditioned", dev_cond, Some(dev_plain))])
    })
}
