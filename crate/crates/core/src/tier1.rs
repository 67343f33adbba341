//! Tier-I group auction run by each relay over its members.
//!
//! For every SCB the relay sorts its members' unit budgets (budget / demand),
//! splits them at random into two halves, computes the optimal single-price
//! revenue of each half and extracts the smaller revenue from the other half.
//! The resulting per-cycle clearing price is then offered to every member;
//! those who can afford it from both budget and valuation win.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MueBid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitBudgetEntry {
    pub mue_index: usize,
    pub unit_budget: f64,
}

/// Unit budgets of `members` sorted non-increasing; equal values keep
/// ascending member order.
pub fn sorted_unit_budgets(bids: &[MueBid], members: impl IntoIterator<Item = usize>) -> Vec<UnitBudgetEntry> {
    let mut entries: Vec<UnitBudgetEntry> = members
        .into_iter()
        .map(|j| UnitBudgetEntry {
            mue_index: j,
            unit_budget: bids[j].unit_budget(),
        })
        .collect();
    entries.sort_by(|a, b| {
        b.unit_budget
            .total_cmp(&a.unit_budget)
            .then(a.mue_index.cmp(&b.mue_index))
    });
    entries
}

fn check_sorted(entries: &[UnitBudgetEntry]) -> Result<()> {
    match entries
        .windows(2)
        .position(|w| w[1].unit_budget > w[0].unit_budget)
    {
        Some(p) => Err(Error::Unsorted { position: p + 1 }),
        None => Ok(()),
    }
}

/// Revenue of the best single price on a sorted array: max over 1-based
/// positions `i` of `i * unit_budget_i`, or 0 when empty.
pub fn opt_single_price(entries: &[UnitBudgetEntry]) -> Result<f64> {
    check_sorted(entries)?;
    Ok(entries
        .iter()
        .enumerate()
        .map(|(i, e)| (i + 1) as f64 * e.unit_budget)
        .fold(0.0, f64::max))
}

/// What a winner is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeRule {
    /// Clearing price times demand.
    ClearingPrice,
    /// The winner's whole reported budget (the OPTB upper bound).
    FullBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAuctionResult {
    /// Winning members, ascending.
    pub winners: Vec<usize>,
    /// Per-cycle price; `f64::INFINITY` when nothing could be sold.
    pub clearing_price: f64,
    pub gathered_budget: f64,
    pub payments: BTreeMap<usize, f64>,
}

impl GroupAuctionResult {
    pub fn no_sale() -> Self {
        GroupAuctionResult {
            winners: Vec::new(),
            clearing_price: f64::INFINITY,
            gathered_budget: 0.0,
            payments: BTreeMap::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.winners.is_empty()
    }

    pub fn payment(&self, mue: usize) -> Option<f64> {
        self.payments.get(&mue).copied()
    }
}

/// Profit extraction of revenue `target` from `sorted_half`, with the
/// resulting price offered to the whole group.
pub fn compt_bgt(sorted_half: &[UnitBudgetEntry], target: f64, group_bids: &[MueBid]) -> Result<GroupAuctionResult> {
    compt_bgt_with(sorted_half, target, group_bids, ChargeRule::ClearingPrice)
}

pub fn compt_bgt_with(
    sorted_half: &[UnitBudgetEntry],
    target: f64,
    group_bids: &[MueBid],
    rule: ChargeRule,
) -> Result<GroupAuctionResult> {
    check_sorted(sorted_half)?;
    let Some(j) = (1..=sorted_half.len())
        .rev()
        .find(|&j| j as f64 * sorted_half[j - 1].unit_budget >= target)
    else {
        return Ok(GroupAuctionResult::no_sale());
    };
    let price = target / j as f64;
    Ok(charge_at_price(price, group_bids, |_| true, rule))
}

/// Offers `price` per cycle to every eligible member of the group; strict
/// inequalities on both budget and valuation.
fn charge_at_price(
    price: f64,
    group_bids: &[MueBid],
    eligible: impl Fn(usize) -> bool,
    rule: ChargeRule,
) -> GroupAuctionResult {
    let mut payments = BTreeMap::new();
    let mut gathered = 0.0;
    for (j, bid) in group_bids.iter().enumerate() {
        if !eligible(j) {
            continue;
        }
        let p = price * f64::from(bid.demand);
        if p < bid.budget && p < bid.valuation {
            let charged = match rule {
                ChargeRule::ClearingPrice => p,
                ChargeRule::FullBudget => bid.budget,
            };
            payments.insert(j, charged);
            gathered += charged;
        }
    }
    GroupAuctionResult {
        winners: payments.keys().copied().collect(),
        clearing_price: price,
        gathered_budget: gathered,
        payments,
    }
}

/// Membership of each group member in the first or second sample half.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    in_first: Vec<bool>,
}

impl Split {
    /// Balanced partition of `n` members: a random permutation decides who
    /// goes where, a fair coin decides which half takes the odd member. The
    /// draw consumes the stream identically regardless of the bids.
    pub fn draw<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let first_len = if n % 2 == 1 && rng.random::<bool>() {
            n / 2 + 1
        } else {
            n / 2
        };
        let mut in_first = vec![false; n];
        for &j in &order[..first_len] {
            in_first[j] = true;
        }
        Split { in_first }
    }

    pub fn from_first(n: usize, first: &[usize]) -> Self {
        let mut in_first = vec![false; n];
        for &j in first {
            in_first[j] = true;
        }
        Split { in_first }
    }

    pub fn len(&self) -> usize {
        self.in_first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_first.is_empty()
    }

    pub fn in_first(&self, mue: usize) -> bool {
        self.in_first[mue]
    }

    /// Sorted unit budgets of the two halves.
    pub fn halves(&self, bids: &[MueBid]) -> (Vec<UnitBudgetEntry>, Vec<UnitBudgetEntry>) {
        let first = sorted_unit_budgets(bids, (0..bids.len()).filter(|&j| self.in_first[j]));
        let second = sorted_unit_budgets(bids, (0..bids.len()).filter(|&j| !self.in_first[j]));
        (first, second)
    }
}

/// One group-auction round for one SCB under a fixed split.
pub fn extract_with_split(bids: &[MueBid], split: &Split, rule: ChargeRule) -> Result<GroupAuctionResult> {
    if split.len() != bids.len() {
        return Err(Error::Dimension(format!(
            "split covers {} members, group has {}",
            split.len(),
            bids.len()
        )));
    }
    let (first, second) = split.halves(bids);
    let r1 = opt_single_price(&first)?;
    let r2 = opt_single_price(&second)?;
    if r1 < r2 {
        compt_bgt_with(&second, r1, bids, rule)
    } else if r1 > r2 {
        compt_bgt_with(&first, r2, bids, rule)
    } else {
        let a = compt_bgt_with(&second, r1, bids, rule)?;
        let b = compt_bgt_with(&first, r2, bids, rule)?;
        Ok(average_outcomes(&a, &b))
    }
}

/// Equal-revenue halves: the gathered budget is the mean of both extractions.
/// Each member pays the mean of its two charges so payments still sum to the
/// gathered budget.
fn average_outcomes(a: &GroupAuctionResult, b: &GroupAuctionResult) -> GroupAuctionResult {
    let mut payments = BTreeMap::new();
    for &j in a.payments.keys().chain(b.payments.keys()) {
        let p = 0.5 * (a.payment(j).unwrap_or(0.0) + b.payment(j).unwrap_or(0.0));
        payments.insert(j, p);
    }
    let prices: Vec<f64> = [a.clearing_price, b.clearing_price]
        .into_iter()
        .filter(|p| p.is_finite())
        .collect();
    let clearing_price = if prices.is_empty() {
        f64::INFINITY
    } else {
        prices.iter().sum::<f64>() / prices.len() as f64
    };
    GroupAuctionResult {
        winners: payments.keys().copied().collect(),
        clearing_price,
        gathered_budget: 0.5 * (a.gathered_budget + b.gathered_budget),
        payments,
    }
}

/// Baseline: a random reference member sets the per-cycle price at its unit
/// budget, and members valuing the service strictly more than it buy.
pub fn rnd_with_reference(bids: &[MueBid], reference: usize) -> GroupAuctionResult {
    if bids.len() < 2 {
        return GroupAuctionResult::no_sale();
    }
    let anchor = bids[reference];
    charge_at_price(
        anchor.unit_budget(),
        bids,
        |j| j != reference && bids[j].valuation > anchor.valuation,
        ChargeRule::ClearingPrice,
    )
}

/// Which tier-I procedure a mechanism uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tier1Rule {
    Sampling,
    UpperBound,
    Random,
}

/// Runs one group auction for one SCB, drawing its randomness from `rng`.
pub fn auction_column<R: Rng + ?Sized>(rule: Tier1Rule, bids: &[MueBid], rng: &mut R) -> Result<GroupAuctionResult> {
    if bids.is_empty() {
        return Err(Error::Dimension("group auction over an empty group".into()));
    }
    match rule {
        Tier1Rule::Sampling => extract_with_split(bids, &Split::draw(bids.len(), rng), ChargeRule::ClearingPrice),
        Tier1Rule::UpperBound => extract_with_split(bids, &Split::draw(bids.len(), rng), ChargeRule::FullBudget),
        Tier1Rule::Random => Ok(rnd_with_reference(bids, rng.random_range(0..bids.len()))),
    }
}

/// Sampling group auction for every SCB of one group; `group_bids[k]` holds
/// all members' bids for SCB `k`.
pub fn phase1<R: Rng + ?Sized>(group_bids: &[Vec<MueBid>], rng: &mut R) -> Result<Vec<GroupAuctionResult>> {
    run_group(Tier1Rule::Sampling, group_bids, rng)
}

/// Same winners as [`phase1`], but each winner is charged its full budget.
pub fn phase1_optb<R: Rng + ?Sized>(group_bids: &[Vec<MueBid>], rng: &mut R) -> Result<Vec<GroupAuctionResult>> {
    run_group(Tier1Rule::UpperBound, group_bids, rng)
}

pub fn phase1_rnd<R: Rng + ?Sized>(group_bids: &[Vec<MueBid>], rng: &mut R) -> Result<Vec<GroupAuctionResult>> {
    run_group(Tier1Rule::Random, group_bids, rng)
}

fn run_group<R: Rng + ?Sized>(
    rule: Tier1Rule,
    group_bids: &[Vec<MueBid>],
    rng: &mut R,
) -> Result<Vec<GroupAuctionResult>> {
    group_bids
        .iter()
        .map(|column| auction_column(rule, column, rng))
        .collect()
}

/// Tier-I results of every group for every SCB, `[group][scb]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tier1Table(pub Vec<Vec<GroupAuctionResult>>);

impl Tier1Table {
    pub fn get(&self, group: usize, scb: usize) -> &GroupAuctionResult {
        &self.0[group][scb]
    }

    pub fn num_groups(&self) -> usize {
        self.0.len()
    }

    /// Gathered budgets `F_i(k)` as rows per group.
    pub fn gathered_budgets(&self) -> Vec<Vec<f64>> {
        self.0
            .iter()
            .map(|row| row.iter().map(|r| r.gathered_budget).collect())
            .collect()
    }
}
