//! Exit gate: one test and one printed PASS/FAIL line per acceptance
//! criterion. Every test holds one lock so wall-clock budgets are measured
//! without competing work.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;

use relay_auction::experiments::stats::{bootstrap_lower_bound, mean};
use relay_auction::experiments::{run_experiment, ExperimentPlan, MetricsRow, ScenarioConfig};
use relay_auction::mechanism::{Instance, Mechanism};
use relay_auction::model::{BidMatrix, MueBid};
use relay_auction::properties::{self, SueMisreport, DEVIATION_FACTORS, GAIN_TOLERANCE};
use relay_auction::seed;
use relay_auction::tier1::Tier1Rule;
use relay_auction::tier2::{self, exact_max_weight_matching, greedy_matching, AskVector, Edge, SueBidMatrix};
use relay_auction::worked;

static CLOCK: Mutex<()> = Mutex::new(());

fn timed() -> std::sync::MutexGuard<'static, ()> {
    CLOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_1_group_auction_golden() {
    let _g = timed();
    let start = Instant::now();
    let runs = 1000;
    let mut r = worked::group_auction().unwrap();
    for _ in 1..runs {
        r = worked::group_auction().unwrap();
    }
    let per_run = start.elapsed() / runs;
    let pass = r.winners == [0, 1, 3, 4]
        && (r.clearing_price - 20.0 / 9.0).abs() < 1e-9
        && (r.gathered_budget - 26.676).abs() <= 0.02
        && per_run < Duration::from_millis(1);
    verdict(
        1,
        pass,
        format!(
            "winners {:?} price {:.4} F {:.3} time {:?}/run",
            r.winners.iter().map(|j| j + 1).collect::<Vec<_>>(),
            r.clearing_price,
            r.gathered_budget,
            per_run
        ),
    );
}

#[test]
fn criterion_2_double_auction_golden() {
    let _g = timed();
    let run = worked::double_auction(Mechanism::Tarco).unwrap();
    let r = &run.report;
    let pass = r.sue_utilities[0] == 1.0
        && r.sue_utilities[1] == 0.0
        && r.scb_utilities[0] == 1.0
        && r.scb_utilities[1] == 2.0
        && run.tier2.scb_of(2).is_none()
        && r.sue_utilities[2] == 0.0
        && r.scb_utilities[2] == 0.0;
    verdict(
        2,
        pass,
        format!(
            "U = {:?}, U^k = {:?}, relay 3 assigned {:?}",
            r.sue_utilities,
            r.scb_utilities,
            run.tier2.scb_of(2)
        ),
    );
}

#[test]
fn criterion_3_property_suite() {
    let _g = timed();
    let cfg = ScenarioConfig {
        num_scbs: 10,
        num_sues: 10,
        mues_per_group: 50,
        ..ScenarioConfig::default()
    };
    let seeds = properties::scenario_seeds(3, 100);
    let start = Instant::now();
    let sweep = properties::property_sweep(&cfg, &seeds, &Mechanism::ALL).unwrap();
    let elapsed = start.elapsed();
    let summary: Vec<String> = sweep
        .iter()
        .map(|s| format!("{} {}/{} ok", s.mechanism, s.instances - s.failed_instances, s.instances))
        .collect();
    for s in &sweep {
        for msg in &s.samples {
            println!("    {msg}");
        }
    }
    let vita = sweep.iter().find(|s| s.mechanism == Mechanism::Vita).unwrap();
    let pass = sweep.iter().all(|s| s.passed()) && elapsed < Duration::from_secs(60);
    verdict(
        3,
        pass,
        format!(
            "{}; VITA relay IR violations {}, payments below ask {}; {:.1?}",
            summary.join(", "),
            vita.sue_ir_violations,
            vita.below_ask_payments,
            elapsed
        ),
    );
}

#[test]
fn criterion_4_matching_oracle() {
    let _g = timed();
    let mut rng = seed::rng(4, &[]);
    let (mut worst_ratio, mut exact_mismatch) = (f64::INFINITY, 0usize);
    let trials = 10_000;
    for _ in 0..trials {
        let l = rng.random_range(1..=8);
        let r = rng.random_range(1..=8);
        let density: f64 = rng.random();
        let mut edges = Vec::new();
        for i in 0..l {
            for k in 0..r {
                if rng.random::<f64>() < density {
                    // Coarse weights make ties common.
                    let w = if rng.random::<bool>() {
                        f64::from(rng.random_range(0..5u32))
                    } else {
                        rng.random::<f64>() * 10.0
                    };
                    edges.push(Edge::new(i, k, w));
                }
            }
        }
        let opt = common::exhaustive_max_weight(&edges, l, r);
        let g = greedy_matching(&edges).total_weight;
        let x = exact_max_weight_matching(&edges).total_weight;
        if (x - opt).abs() > 1e-9 * opt.max(1.0) {
            exact_mismatch += 1;
        }
        if opt > 0.0 {
            worst_ratio = worst_ratio.min(g / opt);
        }
    }
    verdict(
        4,
        worst_ratio >= 0.5 - 1e-12 && exact_mismatch == 0,
        format!("{trials} instances, worst greedy/optimum {worst_ratio:.4}, exact mismatches {exact_mismatch}"),
    );
}

fn paired_gap(rows: &[MetricsRow], hi: Mechanism, lo: Mechanism, metric: fn(&MetricsRow) -> f64, rng: &mut impl Rng) -> (f64, f64) {
    let mut by_key: BTreeMap<(usize, usize), BTreeMap<Mechanism, f64>> = BTreeMap::new();
    for r in rows {
        by_key.entry((r.n_i, r.repetition)).or_default().insert(r.mechanism, metric(r));
    }
    let diffs: Vec<f64> = by_key.values().map(|m| m[&hi] - m[&lo]).collect();
    (mean(&diffs), bootstrap_lower_bound(&diffs, 2000, 0.95, rng))
}

#[test]
fn criterion_5_ordering() {
    let _g = timed();
    let plan = ExperimentPlan::new(
        ScenarioConfig {
            num_scbs: 5,
            num_sues: 10,
            repetitions: 100,
            seed: 5,
            ..ScenarioConfig::default()
        },
        vec![50, 60, 70, 80, 90, 100],
    )
    .unwrap();
    let out = run_experiment(&plan).unwrap();
    let mut rng = seed::rng(5, &[99]);
    use Mechanism::*;
    let mut pass = true;
    let mut detail = Vec::new();
    type Ordering = (&'static str, [Mechanism; 5], fn(&MetricsRow) -> f64);
    let orders: [Ordering; 2] = [
        ("welfare", [Optb, Mwd, Vita, Tarco, Rnd], |r| r.social_welfare),
        ("MUE utility", [Vita, Mwd, Tarco, Optb, Rnd], |r| r.avg_mue_utility),
    ];
    for (name, order, metric) in orders {
        let mut parts = Vec::new();
        for w in order.windows(2) {
            let (gap, lb) = paired_gap(&out.rows, w[0], w[1], metric, &mut rng);
            let ok = gap > 0.0 && lb > 0.0;
            pass &= ok;
            parts.push(format!("{}>{} gap {gap:.4} lb {lb:.4}{}", w[0], w[1], if ok { "" } else { " (x)" }));
        }
        detail.push(format!("{name}: {}", parts.join(", ")));
    }
    verdict(5, pass, detail.join("; "));
}

#[test]
fn criterion_6_truthfulness_harness() {
    let _g = timed();
    let start = Instant::now();
    let cfg = ScenarioConfig::default();
    let seeds = properties::scenario_seeds(6, 100);
    let trials = 10;
    let mut clean = 0;
    let mut worst = 0.0f64;
    let mut rmea = (0usize, 0usize, 0.0f64);
    for &s in &seeds {
        let inst = Instance::generate(&cfg, s).unwrap();
        let mut rng = seed::rng(s, &[seed::label::DEVIATION, 0]);
        let r = properties::deviation_test_mue(&inst, Mechanism::Tarco, trials, &mut rng).unwrap();
        if r.max_gain <= GAIN_TOLERANCE {
            clean += 1;
        }
        worst = worst.max(r.max_gain);
        let mut rng = seed::rng(s, &[seed::label::DEVIATION, 1]);
        let r = properties::deviation_test_sue(&inst, Mechanism::Tarco, trials, &mut rng).unwrap();
        rmea.0 += r.trials;
        rmea.1 += r.violations;
        rmea.2 = rmea.2.max(r.max_gain);
    }
    let clean_rate = clean as f64 / seeds.len() as f64;

    // Lone relay under VITA, and the identity deviation everywhere.
    let bids = BidMatrix::from_nested(vec![vec![
        vec![MueBid::new(4.0, 1, 5.0), MueBid::new(6.0, 1, 7.0)],
        vec![MueBid::new(2.0, 1, 3.0), MueBid::new(3.0, 1, 4.0)],
    ]])
    .unwrap();
    let lone = Instance::from_bids(0, bids, AskVector(vec![1.0, 0.5])).unwrap();
    let truthful = lone.run(Mechanism::Vita).unwrap();
    let mut lone_gain = 0.0f64;
    for f in DEVIATION_FACTORS.iter().copied().chain([1.0]) {
        for t in [SueMisreport::Row, SueMisreport::Entry(0), SueMisreport::Entry(1)] {
            let d = properties::sue_gain(&lone, &truthful, 0, t, f).unwrap();
            if truthful.tier2.scb_of(0).is_some() {
                lone_gain = lone_gain.max(d.gain);
            }
        }
    }
    let inst = Instance::generate(&cfg, seeds[0]).unwrap();
    let mut identity_gain = 0.0f64;
    for m in Mechanism::ALL {
        let run = inst.run(m).unwrap();
        for g in 0..3 {
            identity_gain = identity_gain.max(properties::sue_gain(&inst, &run, g, SueMisreport::Row, 1.0).unwrap().gain.abs());
            let truth = *inst.bids.get(g, 0, 0);
            identity_gain = identity_gain.max(properties::mue_gain(&inst, &run, g, 0, 0, truth).unwrap().abs());
        }
    }
    let elapsed = start.elapsed();
    println!(
        "    RMEA relay deviations: {} of {} picks profitable, max gain {:.6}",
        rmea.1, rmea.0, rmea.2
    );
    let pass = clean_rate >= 0.95 && lone_gain <= GAIN_TOLERANCE && identity_gain == 0.0 && elapsed < Duration::from_secs(120);
    verdict(
        6,
        pass,
        format!(
            "TARCO MUE max gain <= 1e-6 on {:.0}% of seeds (need 95%), worst {worst:.4}; VITA lone-bidder gain {lone_gain}; identity gain {identity_gain}; {elapsed:.1?}",
            100.0 * clean_rate
        ),
    );
}

/// Mean seconds per call of `small` and `large` over `runs` alternating
/// rounds, after one warm-up call each.
fn paired_times(runs: usize, mut small: impl FnMut(), mut large: impl FnMut()) -> (f64, f64) {
    small();
    large();
    let (mut ts, mut tl) = (Duration::ZERO, Duration::ZERO);
    for _ in 0..runs {
        let t = Instant::now();
        small();
        ts += t.elapsed();
        let t = Instant::now();
        large();
        tl += t.elapsed();
    }
    (ts.as_secs_f64() / runs as f64, tl.as_secs_f64() / runs as f64)
}

#[test]
fn criterion_7_complexity_smoke() {
    let _g = timed();
    let group_instance = |n: usize| {
        let cfg = ScenarioConfig {
            num_scbs: 4,
            num_sues: 2,
            mues_per_group: n,
            ..ScenarioConfig::default()
        };
        Instance::generate(&cfg, 7).unwrap()
    };
    let (small, large) = (group_instance(25_000), group_instance(50_000));
    let (p_small, p_large) = paired_times(
        10,
        || {
            std::hint::black_box(small.tier1(Tier1Rule::Sampling).unwrap());
        },
        || {
            std::hint::black_box(large.tier1(Tier1Rule::Sampling).unwrap());
        },
    );

    let market = |n: usize, m: usize| {
        let mut rng = seed::rng(7, &[n as u64, m as u64]);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random::<f64>() * 2.0).collect()).collect();
        let a = AskVector((0..m).map(|_| rng.random::<f64>()).collect());
        (SueBidMatrix::from_rows(rows).unwrap(), a)
    };
    let (bs, as_) = market(1000, 1000);
    let (bl, al) = market(1000, 2000);
    let (r_small, r_large) = paired_times(
        10,
        || {
            std::hint::black_box(tier2::rmea(&bs, &as_).unwrap());
        },
        || {
            std::hint::black_box(tier2::rmea(&bl, &al).unwrap());
        },
    );
    let (p_ratio, r_ratio) = (p_large / p_small, r_large / r_small);
    verdict(
        7,
        p_ratio <= 2.5 && r_ratio <= 2.5,
        format!(
            "phase I n 25k->50k: {:.2} ms -> {:.2} ms (x{p_ratio:.2}); RMEA N*M 1e6->2e6: {:.2} ms -> {:.2} ms (x{r_ratio:.2})",
            p_small * 1e3,
            p_large * 1e3,
            r_small * 1e3,
            r_large * 1e3
        ),
    );
}

fn files_of(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        if e.file_type().unwrap().is_file() {
            out.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap());
        }
    }
    out
}

#[test]
fn criterion_8_determinism() {
    let _g = timed();
    let exe = env!("CARGO_BIN_EXE_relay-auction");
    let root = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for attempt in 0..2 {
        let run_dir = root.path().join(format!("run{attempt}"));
        let status = Command::new(exe)
            .args(["run", "--scbs", "4", "--sues", "5", "--sweep", "10,20", "--repetitions", "2", "--seed", "8", "--dump-first", "--out"])
            .arg(&run_dir)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        let verify_dir = root.path().join(format!("verify{attempt}"));
        let status = Command::new(exe)
            .args(["verify", "--scenarios", "3", "--trials", "3", "--scbs", "4", "--sues", "4", "--sweep", "10", "--seed", "8", "--out"])
            .arg(&verify_dir)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        let mut files = files_of(&run_dir);
        files.extend(files_of(&verify_dir));
        outputs.push(files);
    }
    let names: Vec<&String> = outputs[0].keys().collect();
    let differing: Vec<&String> = names.iter().copied().filter(|n| outputs[0][*n] != outputs[1].get(*n).cloned().unwrap_or_default()).collect();
    verdict(
        8,
        differing.is_empty() && outputs[0].len() == outputs[1].len() && names.len() >= 7,
        format!("{} CSV files compared, differing: {differing:?}", names.len()),
    );
}
