use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use relay_auction::experiments::{self, plot, ExperimentPlan};
use relay_auction::mechanism::{Instance, Mechanism};
use relay_auction::properties::{self, DeviationReport, GAIN_TOLERANCE};
use relay_auction::seed::{self, label};
use relay_auction::{io, worked, EPS};

#[derive(Parser)]
#[command(version, about = "Two-stage relay-aided offloading auctions and their simulation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded sweep over the group size and write metrics CSVs.
    Run(RunArgs),
    /// Replay the two worked examples and compare against the expected values.
    Example,
    /// Run the property and truthfulness suites.
    Verify(VerifyArgs),
    /// Render SVG charts from a summary CSV.
    Plot {
        /// summary.csv written by `run`
        summary: PathBuf,
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Overrides {
    /// Config file (flat TOML keys, see the README)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated mechanism tags
    #[arg(long, value_delimiter = ',')]
    mechanisms: Option<Vec<Mechanism>>,
    /// Comma-separated group sizes
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<usize>>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    scbs: Option<usize>,
    #[arg(long)]
    sues: Option<usize>,
}

impl Overrides {
    fn plan(&self) -> Result<ExperimentPlan> {
        let mut plan = match &self.config {
            Some(p) => ExperimentPlan::from_file(p)?,
            None => ExperimentPlan::default(),
        };
        let sc = &mut plan.scenario;
        if let Some(s) = self.seed {
            sc.seed = s;
        }
        if let Some(m) = &self.mechanisms {
            sc.mechanisms = m.clone();
        }
        if let Some(r) = self.repetitions {
            sc.repetitions = r;
        }
        if let Some(m) = self.scbs {
            sc.num_scbs = m;
        }
        if let Some(n) = self.sues {
            sc.num_sues = n;
        }
        if let Some(s) = &self.sweep {
            plan.sweep = s.clone();
            if let Some(&first) = s.first() {
                plan.scenario.mues_per_group = first;
            }
        }
        plan.validate()?;
        Ok(plan)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write per-run wall-clock times to timings.csv
    #[arg(long)]
    timings: bool,
    /// Dump topology, bids and per-mechanism outcomes of the first instance
    #[arg(long)]
    dump_first: bool,
    /// Also render SVG charts into <out>/plots
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Number of seeded scenarios
    #[arg(long, default_value_t = 100)]
    scenarios: usize,
    /// Deviation picks per scenario and mechanism
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Write deviations.csv here
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` means a hard assertion failed.
fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => run(&args),
        Command::Example => Ok(example()),
        Command::Verify(args) => verify(&args),
        Command::Plot { summary, out } => {
            let rows = io::read_summary(&summary)?;
            for p in plot::emit_plots(&rows, &out)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
    }
}

fn run(args: &RunArgs) -> Result<bool> {
    let plan = args.overrides.plan()?;
    let out = experiments::run_experiment(&plan)?;
    let summary = experiments::summarize(&out.rows);
    let dir = &args.out;
    io::write_metrics(&dir.join("metrics.csv"), &out.rows)?;
    io::write_summary(&dir.join("summary.csv"), &summary)?;
    if args.timings {
        io::write_timings(&dir.join("timings.csv"), &out.rows)?;
    }
    if args.plot {
        plot::emit_plots(&summary, &dir.join("plots"))?;
    }
    if args.dump_first {
        dump_first(&plan, dir)?;
    }
    println!(
        "{:<6} {:>5} {:>14} {:>14} {:>14} {:>14}",
        "mech", "n_i", "mue_utility", "sue_utility", "scb_utility", "welfare"
    );
    for s in &summary {
        println!(
            "{:<6} {:>5} {:>14.6} {:>14.6} {:>14.6} {:>14.6}",
            s.mechanism.tag(),
            s.n_i,
            s.avg_mue_utility,
            s.avg_sue_utility,
            s.avg_scb_utility,
            s.social_welfare
        );
    }
    for f in out.hard_failures.iter().take(20) {
        eprintln!("hard failure: {f}");
    }
    Ok(out.hard_failures.is_empty())
}

fn dump_first(plan: &ExperimentPlan, dir: &Path) -> Result<()> {
    let n = plan.sweep[0];
    let s = experiments::runner::repetition_seed(plan.scenario.seed, n, 0);
    let inst = Instance::generate(&plan.scenario.with_group_size(n), s)?;
    if let Some(top) = &inst.topology {
        io::write_topology(&dir.join("topology.csv"), top)?;
    }
    io::write_bids(&dir.join("bids.csv"), &inst.bids)?;
    let runs = plan
        .scenario
        .mechanisms
        .iter()
        .map(|&m| inst.run(m))
        .collect::<relay_auction::Result<Vec<_>>>()?;
    io::write_runs(dir, &runs, &inst.bids, s)?;
    Ok(())
}

fn line(ok: bool, what: &str, got: String, want: String) -> bool {
    println!("[{}] {what:<34} got {got:<28} expected {want}", if ok { "ok" } else { "FAIL" });
    ok
}

fn example() -> bool {
    let mut ok = true;
    println!("group auction: five members, first half {{1, 4, 5}}");
    match worked::group_auction() {
        Ok(r) => {
            let winners: Vec<usize> = r.winners.iter().map(|j| j + 1).collect();
            ok &= line(winners == [1, 2, 4, 5], "winners", format!("{winners:?}"), "[1, 2, 4, 5]".into());
            ok &= line(
                (r.clearing_price - 20.0 / 9.0).abs() < 1e-9,
                "clearing price",
                format!("{:.4}", r.clearing_price),
                "20/9 = 2.2222".into(),
            );
            ok &= line(
                (r.gathered_budget - 80.0 / 3.0).abs() < 0.02,
                "gathered budget",
                format!("{:.3}", r.gathered_budget),
                "26.667".into(),
            );
        }
        Err(e) => ok = line(false, "group auction", e.to_string(), "a result".into()),
    }
    println!("double auction: three relays, three SCBs");
    match worked::double_auction(Mechanism::Tarco) {
        Ok(run) => {
            let r = &run.report;
            let checks = [
                ("U_1 (relay 1)", r.sue_utilities[0], 1.0),
                ("U_2 (relay 2)", r.sue_utilities[1], 0.0),
                ("U_3 (relay 3)", r.sue_utilities[2], 0.0),
                ("U^1 (SCB 1)", r.scb_utilities[0], 1.0),
                ("U^2 (SCB 2)", r.scb_utilities[1], 2.0),
                ("U^3 (SCB 3)", r.scb_utilities[2], 0.0),
            ];
            for (what, got, want) in checks {
                ok &= line((got - want).abs() <= EPS, what, format!("{got}"), format!("{want}"));
            }
            ok &= line(
                run.tier2.scb_of(2).is_none(),
                "relay 3 loses",
                format!("{:?}", run.tier2.scb_of(2)),
                "None".into(),
            );
        }
        Err(e) => ok = line(false, "double auction", e.to_string(), "a result".into()),
    }
    match worked::double_auction(Mechanism::Vita) {
        Ok(run) => {
            let pairs: Vec<(usize, usize)> = run.tier2.assignment.iter().map(|(&i, &k)| (i + 1, k + 1)).collect();
            ok &= line(
                pairs == [(2, 1), (3, 2)],
                "VITA matching",
                format!("{pairs:?}"),
                "[(2, 1), (3, 2)]".into(),
            );
        }
        Err(e) => ok = line(false, "VITA double auction", e.to_string(), "a result".into()),
    }
    println!("{}", if ok { "all worked examples match" } else { "MISMATCH" });
    ok
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let mut ok = example();
    let plan = args.overrides.plan()?;
    let cfg = plan.scenario.with_group_size(plan.sweep[0]);
    let seeds = properties::scenario_seeds(cfg.seed, args.scenarios);

    println!(
        "\nproperty sweep: {} scenarios, M={} N={} n_i={}",
        seeds.len(),
        cfg.num_scbs,
        cfg.num_sues,
        cfg.mues_per_group
    );
    for s in properties::property_sweep(&cfg, &seeds, &cfg.mechanisms)? {
        println!(
            "[{}] {:<5} failed instances {:>3}/{}  relay IR violations {:>4}  payments below ask {:>4}",
            if s.passed() { "ok" } else { "FAIL" },
            s.mechanism.tag(),
            s.failed_instances,
            s.instances,
            s.sue_ir_violations,
            s.below_ask_payments
        );
        for msg in &s.samples {
            eprintln!("    {msg}");
        }
        ok &= s.passed();
    }

    println!("\ndeviation tests: {} picks per scenario, tolerance {GAIN_TOLERANCE:e}", args.trials);
    let mut reports: Vec<DeviationReport> = Vec::new();
    for (idx, &s) in seeds.iter().enumerate() {
        let inst = Instance::generate(&cfg, s)?;
        for (slot, &m) in cfg.mechanisms.iter().enumerate() {
            let mut rng = seed::rng(s, &[label::DEVIATION, slot as u64, 0]);
            reports.push(properties::deviation_test_mue(&inst, m, args.trials, &mut rng)?);
            if matches!(m, Mechanism::Tarco | Mechanism::Mwd | Mechanism::Vita) {
                let mut rng = seed::rng(s, &[label::DEVIATION, slot as u64, 1]);
                reports.push(properties::deviation_test_sue(&inst, m, args.trials, &mut rng)?);
            }
        }
        log::info!("deviation scenario {idx} done");
    }
    for &m in &cfg.mechanisms {
        for tier in [properties::Tier::I, properties::Tier::II] {
            let rs: Vec<&DeviationReport> = reports.iter().filter(|r| r.mechanism == m && r.tier == tier).collect();
            if rs.is_empty() {
                continue;
            }
            let clean = rs.iter().filter(|r| r.max_gain <= GAIN_TOLERANCE).count();
            let trials: usize = rs.iter().map(|r| r.trials).sum();
            let violations: usize = rs.iter().map(|r| r.violations).sum();
            let max_gain = rs.iter().map(|r| r.max_gain).fold(0.0, f64::max);
            print!(
                "{:<5} tier {:<2} clean scenarios {:>5.1}%  violating picks {:>5}/{:<5} max gain {:.6}",
                m.tag(),
                tier.to_string(),
                100.0 * clean as f64 / rs.len() as f64,
                violations,
                trials,
                max_gain
            );
            if m == Mechanism::Vita && tier == properties::Tier::II {
                let same: usize = rs.iter().map(|r| r.same_matching_deviations).sum();
                let g = rs.iter().map(|r| r.same_matching_max_gain).fold(0.0, f64::max);
                print!("  unchanged-matching deviations {same} max gain {g:.6}");
            }
            println!();
        }
    }
    if let Some(dir) = &args.out {
        let path = dir.join("deviations.csv");
        io::write_deviations(&path, &reports).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("\n{}", if ok { "all hard assertions passed" } else { "HARD ASSERTION FAILED" });
    Ok(ok)
}
