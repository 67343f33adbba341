use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mechanism::{Instance, Mechanism};
use crate::properties::check_all;
use crate::seed::{self, label};

use super::config::ExperimentPlan;

/// One mechanism on one repetition. Averages run over the whole population,
/// losers included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub mechanism: Mechanism,
    pub n_i: usize,
    pub repetition: usize,
    pub seed: u64,
    pub avg_mue_utility: f64,
    pub avg_sue_utility: f64,
    pub avg_scb_utility: f64,
    pub social_welfare: f64,
    pub runtime_ms: f64,
}

/// Means over repetitions for one `(n_i, mechanism)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mechanism: Mechanism,
    pub n_i: usize,
    pub repetitions: usize,
    pub avg_mue_utility: f64,
    pub avg_sue_utility: f64,
    pub avg_scb_utility: f64,
    pub social_welfare: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    /// Ordered by `(n_i, repetition, mechanism)` as listed in the plan.
    pub rows: Vec<MetricsRow>,
    /// Property-check failures that must never happen under truthful bids.
    pub hard_failures: Vec<String>,
}

pub fn repetition_seed(base: u64, n_i: usize, repetition: usize) -> u64 {
    seed::derive(base, &[label::REPETITION, n_i as u64, repetition as u64])
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    plan.validate()?;
    let sc = &plan.scenario;
    let jobs: Vec<(usize, usize)> = plan
        .sweep
        .iter()
        .flat_map(|&n| (0..sc.repetitions).map(move |r| (n, r)))
        .collect();
    let per_job = jobs
        .par_iter()
        .map(|&(n, rep)| {
            let cfg = sc.with_group_size(n);
            let s = repetition_seed(sc.seed, n, rep);
            let inst = Instance::generate(&cfg, s)?;
            let mut rows = Vec::with_capacity(sc.mechanisms.len());
            let mut failures = Vec::new();
            for &m in &sc.mechanisms {
                let start = Instant::now();
                let run = inst.run(m)?;
                let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
                let r = &run.report;
                failures.extend(
                    check_all(r, &run.tier2)
                        .hard_failures(m)
                        .into_iter()
                        .map(|v| format!("{m} n_i={n} repetition={rep}: {v}")),
                );
                rows.push(MetricsRow {
                    mechanism: m,
                    n_i: n,
                    repetition: rep,
                    seed: s,
                    avg_mue_utility: r.total_mue_utility() / r.num_mues() as f64,
                    avg_sue_utility: mean(&r.sue_utilities),
                    avg_scb_utility: mean(&r.scb_utilities),
                    social_welfare: r.social_welfare,
                    runtime_ms,
                });
            }
            Ok((rows, failures))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = ExperimentOutput::default();
    for (rows, failures) in per_job {
        out.rows.extend(rows);
        out.hard_failures.extend(failures);
    }
    Ok(out)
}

/// Means per `(n_i, mechanism)`, in first-appearance order of the rows.
pub fn summarize(rows: &[MetricsRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, Mechanism)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.n_i, r.mechanism)) {
            keys.push((r.n_i, r.mechanism));
        }
    }
    keys.into_iter()
        .map(|(n, m)| {
            let cell: Vec<&MetricsRow> = rows.iter().filter(|r| r.n_i == n && r.mechanism == m).collect();
            let avg = |f: fn(&MetricsRow) -> f64| mean(&cell.iter().map(|r| f(r)).collect::<Vec<_>>());
            SummaryRow {
                mechanism: m,
                n_i: n,
                repetitions: cell.len(),
                avg_mue_utility: avg(|r| r.avg_mue_utility),
                avg_sue_utility: avg(|r| r.avg_sue_utility),
                avg_scb_utility: avg(|r| r.avg_scb_utility),
                social_welfare: avg(|r| r.social_welfare),
            }
        })
        .collect()
}
