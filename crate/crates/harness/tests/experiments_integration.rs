//! Experiment-level integration checks that complement the acceptance suite:
//! the generator's distributional inheritance, the remaining experiment
//! paths, and baseline pairing.

use tabhash::TabConfig;
use tabhash_harness::{run_experiment, Experiment, ExperimentSpec, InputKind, Scheme};

fn base(experiment: Experiment, scheme: Scheme, cfg: TabConfig) -> ExperimentSpec {
    ExperimentSpec {
        experiment,
        scheme,
        cfg,
        n: 1024,
        m: 1024,
        k: 1,
        trials: 8,
        seeds: 10,
        poly_k: 2,
        input: InputKind::Random,
        baseline: false,
        master_seed: 0x7E57,
        dump_path: None,
    }
}

fn stat(rows: &[tabhash_harness::ReportRow], name: &str) -> Vec<(f64, Option<f64>)> {
    rows.iter()
        .filter(|r| r.statistic == name)
        .map(|r| (r.value, r.baseline))
        .collect()
}

/// The sequential stream is the twisted hash of consecutive counters, so the
/// stream's values must pass the same bin-concentration experiment: run bins
/// with consecutive input under twisted tabulation against the idealized
/// baseline.
#[test]
fn prg_stream_inherits_bin_concentration() {
    let cfg = TabConfig::new(8, 4, 14, 0).unwrap();
    let mut s = base(Experiment::Bins, Scheme::Twisted, cfg);
    s.input = InputKind::Consecutive;
    s.n = 1 << 14;
    s.m = 1 << 14;
    s.seeds = 30;
    s.baseline = true;
    let rows = run_experiment(&s).unwrap();
    for (load, baseline) in stat(&rows, "max_load") {
        let b = baseline.unwrap();
        assert!(load <= 3.0 * b, "stream max load {load} vs baseline {b}");
        assert!(load <= 12.0, "stream max load {load} above 3 lg n / lg lg n");
    }
}

/// Unsuccessful-search cost at half load with the idealized scheme matches
/// the classic (1 + 1/(1-a)^2)/2 = 2.5 within 10%.
#[test]
fn linprobe_experiment_matches_classic_mean() {
    let cfg = TabConfig::new(8, 4, 16, 0).unwrap();
    let mut s = base(Experiment::Linprobe, Scheme::TrulyRandom, cfg);
    s.n = 1 << 13;
    s.m = 1 << 14;
    s.trials = 2000;
    s.seeds = 30;
    let rows = run_experiment(&s).unwrap();
    let means: Vec<f64> = stat(&rows, "mean_unsuccessful_probes")
        .iter()
        .map(|(v, _)| *v)
        .collect();
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    assert!(
        (grand - 2.5).abs() / 2.5 < 0.10,
        "mean unsuccessful probes {grand} not within 10% of 2.5"
    );
    // Simple tabulation should sit in the same regime.
    let mut s2 = s.clone();
    s2.scheme = Scheme::Simple;
    let rows = run_experiment(&s2).unwrap();
    let means: Vec<f64> = stat(&rows, "mean_unsuccessful_probes")
        .iter()
        .map(|(v, _)| *v)
        .collect();
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    assert!((grand - 2.5).abs() / 2.5 < 0.15, "simple tab mean {grand}");
}

/// Jaccard via one k-partitioned evaluation concentrates around 1/2.
#[test]
fn jaccard_kpartition_mode() {
    let cfg = TabConfig::new(8, 4, 32, 2).unwrap();
    let mut s = base(Experiment::Jaccard, Scheme::Mixed, cfg);
    s.n = 4096;
    s.k = 256;
    s.seeds = 40;
    let rows = run_experiment(&s).unwrap();
    let good = stat(&rows, "jaccard_estimate")
        .iter()
        .filter(|(v, _)| (v - 0.5).abs() <= 0.12)
        .count();
    assert!(good >= 36, "only {good}/40 estimates near 1/2");
}

/// The repetition mode too, with the polynomial baseline scheme for range.
#[test]
fn jaccard_repetition_mode_with_poly() {
    let cfg = TabConfig::new(8, 4, 24, 0).unwrap();
    let mut s = base(Experiment::Jaccard, Scheme::PolyK, cfg);
    s.n = 512;
    s.k = 1; // repetition mode
    s.trials = 256;
    s.seeds = 20;
    s.poly_k = 3;
    let rows = run_experiment(&s).unwrap();
    let good = stat(&rows, "jaccard_estimate")
        .iter()
        .filter(|(v, _)| (v - 0.5).abs() <= 0.15)
        .count();
    assert!(good >= 18, "only {good}/20 estimates near 1/2");
}

/// Exhaustive uniqueness of a toy inner function over the whole universe.
#[test]
fn kunique_experiment_toy_universe() {
    // u = 2^8, d = 3 eight-bit derived characters: random functions at this
    // size are overwhelmingly 2-unique (injective); k = 2 keeps it exact.
    let cfg = TabConfig::new(4, 2, 8, 3).unwrap();
    let mut s = base(Experiment::Kunique, Scheme::Double, cfg);
    s.n = 1;
    s.k = 2;
    s.seeds = 20;
    let rows = run_experiment(&s).unwrap();
    let unique: f64 = stat(&rows, "k_unique").iter().map(|(v, _)| v).sum();
    assert!(unique >= 19.0, "only {unique}/20 toy functions 2-unique");
}

/// The chi-square path of the independence experiment: non-significant for
/// simple tabulation at a geometry too large to enumerate.
#[test]
fn independence_chi_square_path() {
    let cfg = TabConfig::new(4, 2, 4, 0).unwrap();
    let mut s = base(Experiment::Independence, Scheme::Simple, cfg);
    s.k = 2; // pairs: 256 cells
    s.trials = 20_000;
    s.seeds = 10;
    s.baseline = true;
    let rows = run_experiment(&s).unwrap();
    let ps = stat(&rows, "p_value");
    assert_eq!(ps.len(), 10);
    let significant = ps.iter().filter(|(v, _)| *v < 0.001).count();
    assert!(significant <= 1, "{significant}/10 runs significant");
}

/// The exact path kicks in at the tiny geometry and reports uniformity.
#[test]
fn independence_exact_path() {
    let cfg = TabConfig::new(1, 2, 1, 0).unwrap();
    let mut s = base(Experiment::Independence, Scheme::Twisted, cfg);
    s.k = 3;
    s.input = InputKind::Consecutive;
    let rows = run_experiment(&s).unwrap();
    let uniform = stat(&rows, "uniform");
    assert_eq!(uniform.len(), 1);
    assert_eq!(uniform[0].0, 1.0);
    assert_eq!(stat(&rows, "max_count_deviation")[0].0, 0.0);
}

/// Kpartition and sample experiments under the mult-shift baseline run and
/// stay in range (weak hashing, loose checks; these are plumbing tests).
#[test]
fn kpartition_and_sample_run_under_baselines() {
    let cfg = TabConfig::new(8, 4, 32, 0).unwrap();
    let mut s = base(Experiment::Kpartition, Scheme::MultShift, cfg);
    s.n = 20_000;
    s.k = 128;
    s.seeds = 5;
    s.baseline = true;
    let rows = run_experiment(&s).unwrap();
    for (v, b) in stat(&rows, "red_fraction_estimate") {
        assert!((0.0..=1.0).contains(&v));
        assert!((0.0..=1.0).contains(&b.unwrap()));
    }

    let mut s = base(Experiment::Sample, Scheme::TrulyRandom, cfg);
    s.n = 20_000;
    s.seeds = 5;
    let rows = run_experiment(&s).unwrap();
    for (v, _) in stat(&rows, "sample_size") {
        assert!((1500.0..=2500.0).contains(&v), "sample size {v}");
    }
}

/// Baseline pairing invariant: rerunning with the baseline flag does not
/// change the primary values, and every row carries its seed.
#[test]
fn baseline_pairing_is_stable() {
    let cfg = TabConfig::new(8, 2, 10, 0).unwrap();
    let mut s = base(Experiment::Bins, Scheme::Simple, cfg);
    s.n = 512;
    s.m = 1024;
    s.seeds = 6;
    let plain = run_experiment(&s).unwrap();
    s.baseline = true;
    let with_baseline = run_experiment(&s).unwrap();
    for (a, b) in plain.iter().zip(&with_baseline) {
        assert_eq!(a.value, b.value);
        assert_eq!(a.seed, b.seed);
        assert!(a.baseline.is_none());
        assert!(b.baseline.is_some());
    }
}
