//! Realized utilities. A group's tier-I outcome for SCB `k` executes only if
//! its relay wins `k` in tier II; everything else settles at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BidMatrix;
use crate::tier1::Tier1Table;
use crate::tier2::{AskVector, Tier2Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlementReport {
    /// `[group][mue]`, evaluated with true budgets and valuations.
    pub mue_utilities: Vec<Vec<f64>>,
    /// What each MUE is charged, `[group][mue]`.
    pub mue_payments: Vec<Vec<f64>>,
    pub sue_utilities: Vec<f64>,
    /// Gathered budget a relay actually collects (zero unless executed).
    pub sue_collected: Vec<f64>,
    /// Tier-II payment of each relay (zero for losers).
    pub sue_payments: Vec<f64>,
    pub scb_utilities: Vec<f64>,
    pub scb_revenue: Vec<f64>,
    pub social_welfare: f64,
    /// Executed `(sue, scb)` pairs, ascending by SUE.
    pub executed_groups: Vec<(usize, usize)>,
}

impl SettlementReport {
    pub fn total_mue_utility(&self) -> f64 {
        self.mue_utilities.iter().flatten().sum()
    }

    pub fn num_mues(&self) -> usize {
        self.mue_utilities.iter().map(Vec::len).sum()
    }
}

pub fn settle(
    tier1: &Tier1Table,
    tier2: &Tier2Outcome,
    asks: &AskVector,
    true_bids: &BidMatrix,
) -> Result<SettlementReport> {
    let groups = true_bids.num_groups();
    let scbs = asks.len();
    if tier1.num_groups() != groups {
        return Err(Error::Dimension(format!(
            "tier-I table covers {} groups, bids cover {groups}",
            tier1.num_groups()
        )));
    }
    let mut report = SettlementReport {
        mue_utilities: (0..groups).map(|g| vec![0.0; true_bids.group_size(g)]).collect(),
        mue_payments: (0..groups).map(|g| vec![0.0; true_bids.group_size(g)]).collect(),
        sue_utilities: vec![0.0; groups],
        sue_collected: vec![0.0; groups],
        sue_payments: vec![0.0; groups],
        scb_utilities: vec![0.0; scbs],
        scb_revenue: vec![0.0; scbs],
        social_welfare: 0.0,
        executed_groups: Vec::new(),
    };

    for (&sue, &scb) in &tier2.assignment {
        if sue >= groups || scb >= scbs {
            return Err(Error::Dimension(format!("assignment ({sue}, {scb}) is out of range")));
        }
        let payment = tier2
            .payment(sue)
            .ok_or_else(|| Error::Dimension(format!("winning SUE {sue} has no payment")))?;
        let group = tier1.get(sue, scb);
        if group.is_empty() {
            log::warn!("SUE {sue} won SCB {scb} with an empty tier-I result; settling with F = 0");
        }
        for (&mue, &charged) in &group.payments {
            let truth = true_bids.get(sue, mue, scb);
            report.mue_payments[sue][mue] = charged;
            report.mue_utilities[sue][mue] = if charged <= truth.budget {
                truth.valuation - charged
            } else {
                0.0
            };
        }
        let gathered = group.gathered_budget;
        let ask = asks.get(scb);
        report.sue_collected[sue] = gathered;
        report.sue_payments[sue] = payment;
        report.sue_utilities[sue] = gathered - payment;
        report.scb_revenue[scb] = payment;
        report.scb_utilities[scb] = payment - ask;
        report.social_welfare += gathered - ask;
        report.executed_groups.push((sue, scb));
    }
    Ok(report)
}
