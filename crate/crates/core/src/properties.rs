//! Executable economic properties: per-run individual rationality and budget
//! balance checks, randomized paired-seed deviation tests, and sweeps.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::config::ScenarioConfig;
use crate::mechanism::{Instance, Mechanism, MechanismRun};
use crate::model::MueBid;
use crate::settlement::SettlementReport;
use crate::tier1::Tier1Table;
use crate::tier2::{greedy_matching, surplus_graph, Tier2Outcome};
use crate::{seed, EPS};

/// Deviation grid applied to reported values.
pub const DEVIATION_FACTORS: [f64; 6] = [0.25, 0.5, 0.8, 1.25, 2.0, 4.0];

/// A deviation counts as profitable only above this gain.
pub const GAIN_TOLERANCE: f64 = 1e-6;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub violations: Vec<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn fail(&mut self, msg: String) {
        self.violations.push(msg);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub mue_ir: Check,
    pub scb_ir: Check,
    pub sue_ir: Check,
    pub budget_balance: Check,
    pub conservation: Check,
}

impl PropertyCheck {
    fn named(&self) -> [(&'static str, &Check); 5] {
        [
            ("mue_ir", &self.mue_ir),
            ("scb_ir", &self.scb_ir),
            ("sue_ir", &self.sue_ir),
            ("budget_balance", &self.budget_balance),
            ("conservation", &self.conservation),
        ]
    }

    pub fn all_passed(&self) -> bool {
        self.named().iter().all(|(_, c)| c.passed())
    }

    /// Failed checks that must never fail for `mechanism` under truthful
    /// bids. Relay IR is only hard where the mechanism guarantees it.
    pub fn hard_failures(&self, mechanism: Mechanism) -> Vec<String> {
        self.named()
            .iter()
            .filter(|(name, _)| *name != "sue_ir" || mechanism.sue_ir_guaranteed())
            .flat_map(|(name, c)| c.violations.iter().map(move |v| format!("{name}: {v}")))
            .collect()
    }
}

/// IR for every MUE, SUE and SCB, budget balance between relays and SCBs,
/// and conservation of tier-I payments inside executed groups.
pub fn check_all(report: &SettlementReport, outcome: &Tier2Outcome) -> PropertyCheck {
    let mut pc = PropertyCheck::default();
    for (g, row) in report.mue_utilities.iter().enumerate() {
        for (j, &u) in row.iter().enumerate() {
            if u < -EPS {
                pc.mue_ir.fail(format!("MUE {j} of group {g} has utility {u}"));
            }
        }
    }
    for (k, &u) in report.scb_utilities.iter().enumerate() {
        if u < -EPS {
            pc.scb_ir.fail(format!("SCB {k} has utility {u}"));
        }
    }
    for (i, &u) in report.sue_utilities.iter().enumerate() {
        if u < -EPS {
            pc.sue_ir.fail(format!("SUE {i} has utility {u}"));
        }
    }

    let paid: f64 = outcome.payments.values().sum();
    let received: f64 = report.scb_revenue.iter().sum();
    if !close(paid, received) {
        pc.budget_balance
            .fail(format!("relays pay {paid} in total but SCBs receive {received}"));
    }
    for (&i, &p) in &outcome.payments {
        match report.sue_payments.get(i) {
            Some(&settled) if close(settled, p) => {}
            other => pc
                .budget_balance
                .fail(format!("SUE {i} owes {p} but settled {other:?}")),
        }
    }

    for &(i, _) in &report.executed_groups {
        let charged: f64 = report.mue_payments[i].iter().sum();
        if !close(charged, report.sue_collected[i]) {
            pc.conservation.fail(format!(
                "group {i} is charged {charged} but its relay collects {}",
                report.sue_collected[i]
            ));
        }
    }
    pc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tier {
    I,
    II,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::I => "I",
            Tier::II => "II",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub mechanism: Mechanism,
    pub tier: Tier,
    pub seed: u64,
    pub trials: usize,
    /// Trials in which at least one deviation gained more than the tolerance.
    pub violations: usize,
    pub max_gain: f64,
    /// Deviations that left the greedy matching unchanged (VITA only).
    pub same_matching_deviations: usize,
    pub same_matching_max_gain: f64,
}

impl DeviationReport {
    fn empty(mechanism: Mechanism, tier: Tier, seed: u64) -> Self {
        DeviationReport {
            mechanism,
            tier,
            seed,
            trials: 0,
            violations: 0,
            max_gain: 0.0,
            same_matching_deviations: 0,
            same_matching_max_gain: 0.0,
        }
    }

    pub fn violation_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.violations as f64 / self.trials as f64
        }
    }

    fn absorb(&mut self, trial: &[SueDeviation]) {
        self.trials += 1;
        let mut worst = 0.0f64;
        for d in trial {
            worst = worst.max(d.gain);
            if d.same_matching == Some(true) {
                self.same_matching_deviations += 1;
                self.same_matching_max_gain = self.same_matching_max_gain.max(d.gain);
            }
        }
        if worst > GAIN_TOLERANCE {
            self.violations += 1;
        }
        self.max_gain = self.max_gain.max(worst);
    }
}

impl fmt::Display for DeviationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<5} tier {:<2} seed {:>20}  trials {:>4}  violations {:>4} ({:>5.1}%)  max gain {:.6}",
            self.mechanism.tag(),
            self.tier,
            self.seed,
            self.trials,
            self.violations,
            100.0 * self.violation_rate(),
            self.max_gain
        )?;
        if self.mechanism == Mechanism::Vita && self.tier == Tier::II {
            write!(
                f,
                "  same-matching {} max gain {:.6}",
                self.same_matching_deviations, self.same_matching_max_gain
            )?;
        }
        Ok(())
    }
}

/// Which reported fields of an MUE bid are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MueMisreport {
    Budget,
    Valuation,
    Both,
}

impl MueMisreport {
    pub const ALL: [MueMisreport; 3] = [MueMisreport::Budget, MueMisreport::Valuation, MueMisreport::Both];

    pub fn apply(self, bid: &MueBid, factor: f64) -> MueBid {
        let mut out = *bid;
        if matches!(self, MueMisreport::Budget | MueMisreport::Both) {
            out.budget *= factor;
        }
        if matches!(self, MueMisreport::Valuation | MueMisreport::Both) {
            out.valuation *= factor;
        }
        out
    }
}

/// Utility change of MUE `mue` in `group` when it reports `reported` for
/// `scb` instead of its true bid, everything else unchanged.
pub fn mue_gain(
    instance: &Instance,
    truthful: &MechanismRun,
    group: usize,
    mue: usize,
    scb: usize,
    reported: MueBid,
) -> Result<f64> {
    let mech = truthful.mechanism;
    let mut column = instance.bids.column(group, scb).to_vec();
    column[mue] = reported;
    let cell = instance.tier1_cell(mech.tier1_rule(), group, scb, &column)?;
    let mut table: Tier1Table = truthful.tier1.clone();
    table.0[group][scb] = cell;
    let deviant = instance.finish(mech, table)?;
    Ok(deviant.report.mue_utilities[group][mue] - truthful.report.mue_utilities[group][mue])
}

/// Random `(group, MUE, SCB)` picks, each tried against the whole factor
/// grid for every [`MueMisreport`].
pub fn deviation_test_mue<R: Rng + ?Sized>(
    instance: &Instance,
    mechanism: Mechanism,
    trials: usize,
    rng: &mut R,
) -> Result<DeviationReport> {
    let truthful = instance.run(mechanism)?;
    let picks: Vec<(usize, usize, usize)> = (0..trials)
        .map(|_| {
            let g = rng.random_range(0..instance.num_groups());
            let j = rng.random_range(0..instance.bids.group_size(g));
            let k = rng.random_range(0..instance.num_scbs());
            (g, j, k)
        })
        .collect();
    let gains = picks
        .par_iter()
        .map(|&(g, j, k)| {
            let truth = *instance.bids.get(g, j, k);
            let mut out = Vec::with_capacity(DEVIATION_FACTORS.len() * MueMisreport::ALL.len());
            for mode in MueMisreport::ALL {
                for f in DEVIATION_FACTORS {
                    let gain = mue_gain(instance, &truthful, g, j, k, mode.apply(&truth, f))?;
                    out.push(SueDeviation {
                        gain,
                        same_matching: None,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = DeviationReport::empty(mechanism, Tier::I, instance.seed);
    for trial in &gains {
        report.absorb(trial);
    }
    Ok(report)
}

/// Which tier-II bids of a relay are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SueMisreport {
    Row,
    Entry(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SueDeviation {
    pub gain: f64,
    /// For VITA: whether the greedy matching kept the same edge set.
    pub same_matching: Option<bool>,
}

/// Utility change of relay `sue` when it scales its gathered-budget bids.
pub fn sue_gain(
    instance: &Instance,
    truthful: &MechanismRun,
    sue: usize,
    target: SueMisreport,
    factor: f64,
) -> Result<SueDeviation> {
    let mech = truthful.mechanism;
    let mut bids = truthful.sue_bids.clone();
    match target {
        SueMisreport::Row => bids.row_mut(sue).iter_mut().for_each(|b| *b *= factor),
        SueMisreport::Entry(k) => bids.set(sue, k, bids.get(sue, k) * factor),
    }
    let same_matching = if mech == Mechanism::Vita {
        let before = greedy_matching(&surplus_graph(&truthful.sue_bids, &instance.asks)?);
        let after = greedy_matching(&surplus_graph(&bids, &instance.asks)?);
        Some(before.pairs() == after.pairs())
    } else {
        None
    };
    let deviant = instance.finish_with_bids(mech, truthful.tier1.clone(), bids)?;
    Ok(SueDeviation {
        gain: deviant.report.sue_utilities[sue] - truthful.report.sue_utilities[sue],
        same_matching,
    })
}

/// Random relay picks; each tries the factor grid on its whole bid row and
/// on one random entry.
pub fn deviation_test_sue<R: Rng + ?Sized>(
    instance: &Instance,
    mechanism: Mechanism,
    trials: usize,
    rng: &mut R,
) -> Result<DeviationReport> {
    let truthful = instance.run(mechanism)?;
    let picks: Vec<(usize, usize)> = (0..trials)
        .map(|_| {
            (
                rng.random_range(0..instance.num_groups()),
                rng.random_range(0..instance.num_scbs()),
            )
        })
        .collect();
    let gains = picks
        .par_iter()
        .map(|&(i, k)| {
            let mut out = Vec::with_capacity(2 * DEVIATION_FACTORS.len());
            for target in [SueMisreport::Row, SueMisreport::Entry(k)] {
                for f in DEVIATION_FACTORS {
                    out.push(sue_gain(instance, &truthful, i, target, f)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = DeviationReport::empty(mechanism, Tier::II, instance.seed);
    for trial in &gains {
        report.absorb(trial);
    }
    Ok(report)
}

/// Outcome of running [`check_all`] on many truthful instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub mechanism: Mechanism,
    pub instances: usize,
    /// Instances with at least one hard failure.
    pub failed_instances: usize,
    pub sue_ir_violations: usize,
    /// VITA payments that fell below the matched ask.
    pub below_ask_payments: usize,
    /// The first few failure messages, for diagnostics.
    pub samples: Vec<String>,
}

impl SweepSummary {
    pub fn passed(&self) -> bool {
        self.failed_instances == 0
    }
}

/// Runs every mechanism on one instance per seed and checks the properties.
pub fn property_sweep(config: &ScenarioConfig, seeds: &[u64], mechanisms: &[Mechanism]) -> Result<Vec<SweepSummary>> {
    let per_seed = seeds
        .par_iter()
        .map(|&s| {
            let inst = Instance::generate(config, s)?;
            mechanisms
                .iter()
                .map(|&m| {
                    let run = inst.run(m)?;
                    let pc = check_all(&run.report, &run.tier2);
                    let below = run
                        .tier2
                        .assignment
                        .iter()
                        .filter(|&(i, &k)| run.tier2.payments[i] < inst.asks.get(k) - EPS)
                        .count();
                    let hard: Vec<String> = pc
                        .hard_failures(m)
                        .into_iter()
                        .map(|v| format!("seed {s}: {v}"))
                        .collect();
                    Ok((hard, pc.sue_ir.violations.len(), below))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mechanisms
        .iter()
        .enumerate()
        .map(|(idx, &m)| {
            let mut s = SweepSummary {
                mechanism: m,
                instances: seeds.len(),
                failed_instances: 0,
                sue_ir_violations: 0,
                below_ask_payments: 0,
                samples: Vec::new(),
            };
            for row in &per_seed {
                let (hard, sue_ir, below) = &row[idx];
                if !hard.is_empty() {
                    s.failed_instances += 1;
                    s.samples.extend(hard.iter().take(3).cloned());
                }
                s.sue_ir_violations += sue_ir;
                s.below_ask_payments += below;
            }
            s.samples.truncate(10);
            s
        })
        .collect())
}

/// Seeds for a batch of `count` scenarios derived from `base`.
pub fn scenario_seeds(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|r| seed::derive(base, &[seed::label::REPETITION, r]))
        .collect()
}
