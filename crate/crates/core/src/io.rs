//! CSV layouts. Every file has a header row; floats are written in shortest
//! round-trip form, so identical inputs give byte-identical files.
//!
//! | file              | columns                                                           |
//! |-------------------|-------------------------------------------------------------------|
//! | `topology.csv`    | kind, id, group, x, y                                             |
//! | `bids.csv`        | group, mue, scb, budget, valuation, demand                        |
//! | `tier1.csv`       | mechanism, group, scb, mue, won, payment, clearing_price, gathered_budget |
//! | `tier2.csv`       | sue, scb, payment, mechanism                                      |
//! | `settlement.csv`  | entity, group, id, utility, mechanism, seed                       |
//! | `metrics.csv`     | mechanism, n_i, repetition, seed, avg_mue_utility, avg_sue_utility, avg_scb_utility, social_welfare |
//! | `timings.csv`     | mechanism, n_i, repetition, runtime_ms                            |
//! | `summary.csv`     | mechanism, n_i, repetitions, avg_mue_utility, avg_sue_utility, avg_scb_utility, social_welfare |
//! | `deviations.csv`  | mechanism, tier, seed, trials, violations, max_gain, same_matching_deviations, same_matching_max_gain |

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::runner::{MetricsRow, SummaryRow};
use crate::mechanism::{Mechanism, MechanismRun};
use crate::model::{BidMatrix, Topology};
use crate::properties::DeviationReport;

pub fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::csv(path, e))
}

#[derive(Debug, Serialize)]
struct TopologyRecord {
    kind: &'static str,
    id: usize,
    group: Option<usize>,
    x: f64,
    y: f64,
}

pub fn write_topology(path: &Path, top: &Topology) -> Result<()> {
    let scbs = top.scb_positions.iter().enumerate().map(|(id, p)| TopologyRecord {
        kind: "scb",
        id,
        group: None,
        x: p.x,
        y: p.y,
    });
    let sues = top.sue_positions.iter().enumerate().map(|(id, p)| TopologyRecord {
        kind: "sue",
        id,
        group: Some(id),
        x: p.x,
        y: p.y,
    });
    let mues = top.mue_positions.iter().enumerate().flat_map(|(g, ps)| {
        ps.iter().enumerate().map(move |(id, p)| TopologyRecord {
            kind: "mue",
            id,
            group: Some(g),
            x: p.x,
            y: p.y,
        })
    });
    write_rows(path, scbs.chain(sues).chain(mues))
}

#[derive(Debug, Serialize)]
struct BidRecord {
    group: usize,
    mue: usize,
    scb: usize,
    budget: f64,
    valuation: f64,
    demand: u32,
}

pub fn write_bids(path: &Path, bids: &BidMatrix) -> Result<()> {
    let mut rows = Vec::new();
    for g in 0..bids.num_groups() {
        for j in 0..bids.group_size(g) {
            for k in 0..bids.num_scbs() {
                let b = bids.get(g, j, k);
                rows.push(BidRecord {
                    group: g,
                    mue: j,
                    scb: k,
                    budget: b.budget,
                    valuation: b.valuation,
                    demand: b.demand,
                });
            }
        }
    }
    write_rows(path, rows)
}

#[derive(Debug, Serialize)]
struct Tier1Record {
    mechanism: Mechanism,
    group: usize,
    scb: usize,
    mue: usize,
    won: bool,
    payment: f64,
    clearing_price: f64,
    gathered_budget: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Tier2Record {
    pub sue: usize,
    pub scb: usize,
    pub payment: f64,
    pub mechanism: Mechanism,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SettlementRecord {
    pub entity: String,
    pub group: Option<usize>,
    pub id: usize,
    pub utility: f64,
    pub mechanism: Mechanism,
    pub seed: u64,
}

/// One row per group member and SCB.
fn tier1_records(run: &MechanismRun, bids: &BidMatrix) -> Vec<Tier1Record> {
    let mut rows = Vec::new();
    for (g, cells) in run.tier1.0.iter().enumerate() {
        for (k, cell) in cells.iter().enumerate() {
            for j in 0..bids.group_size(g) {
                rows.push(Tier1Record {
                    mechanism: run.mechanism,
                    group: g,
                    scb: k,
                    mue: j,
                    won: cell.payments.contains_key(&j),
                    payment: cell.payment(j).unwrap_or(0.0),
                    clearing_price: cell.clearing_price,
                    gathered_budget: cell.gathered_budget,
                });
            }
        }
    }
    rows
}

fn tier2_records(run: &MechanismRun) -> Vec<Tier2Record> {
    run.tier2
        .assignment
        .iter()
        .map(|(&sue, &scb)| Tier2Record {
            sue,
            scb,
            payment: run.tier2.payments[&sue],
            mechanism: run.mechanism,
        })
        .collect()
}

fn settlement_records(run: &MechanismRun, seed: u64) -> Vec<SettlementRecord> {
    let r = &run.report;
    let rec = |entity: &str, group, id, utility| SettlementRecord {
        entity: entity.to_string(),
        group,
        id,
        utility,
        mechanism: run.mechanism,
        seed,
    };
    let mut rows = Vec::new();
    for (g, us) in r.mue_utilities.iter().enumerate() {
        for (j, &u) in us.iter().enumerate() {
            rows.push(rec("mue", Some(g), j, u));
        }
    }
    for (i, &u) in r.sue_utilities.iter().enumerate() {
        rows.push(rec("sue", Some(i), i, u));
    }
    for (k, &u) in r.scb_utilities.iter().enumerate() {
        rows.push(rec("scb", None, k, u));
    }
    rows
}

/// Writes `tier1.csv`, `tier2.csv` and `settlement.csv` for several runs on
/// the same instance.
pub fn write_runs(dir: &Path, runs: &[MechanismRun], bids: &BidMatrix, seed: u64) -> Result<()> {
    write_rows(&dir.join("tier1.csv"), runs.iter().flat_map(|r| tier1_records(r, bids)))?;
    write_rows(&dir.join("tier2.csv"), runs.iter().flat_map(tier2_records))?;
    write_rows(&dir.join("settlement.csv"), runs.iter().flat_map(|r| settlement_records(r, seed)))
}

#[derive(Debug, Serialize)]
struct MetricsRecord {
    mechanism: Mechanism,
    n_i: usize,
    repetition: usize,
    seed: u64,
    avg_mue_utility: f64,
    avg_sue_utility: f64,
    avg_scb_utility: f64,
    social_welfare: f64,
}

/// Metrics without wall-clock columns, so reruns are byte-identical.
pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| MetricsRecord {
            mechanism: r.mechanism,
            n_i: r.n_i,
            repetition: r.repetition,
            seed: r.seed,
            avg_mue_utility: r.avg_mue_utility,
            avg_sue_utility: r.avg_sue_utility,
            avg_scb_utility: r.avg_scb_utility,
            social_welfare: r.social_welfare,
        }),
    )
}

#[derive(Debug, Serialize)]
struct TimingRecord {
    mechanism: Mechanism,
    n_i: usize,
    repetition: usize,
    runtime_ms: f64,
}

pub fn write_timings(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| TimingRecord {
            mechanism: r.mechanism,
            n_i: r.n_i,
            repetition: r.repetition,
            runtime_ms: r.runtime_ms,
        }),
    )
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

pub fn write_deviations(path: &Path, reports: &[DeviationReport]) -> Result<()> {
    write_rows(path, reports)
}
