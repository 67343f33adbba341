//! The two small worked examples used as golden fixtures: a five-member group
//! auction under a fixed split, and a three-relay, three-SCB double auction.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::mechanism::{Instance, Mechanism, MechanismRun};
use crate::model::{BidMatrix, MueBid};
use crate::tier1::{self, ChargeRule, GroupAuctionResult, Split, Tier1Table};
use crate::tier2::{AskVector, SueBidMatrix};

/// Budget, demand and valuation of the five group members.
pub fn group_auction_bids() -> Vec<MueBid> {
    [(30.0, 4, 35.0), (20.0, 3, 26.0), (18.0, 6, 9.0), (13.0, 2, 16.0), (8.0, 3, 14.0)]
        .into_iter()
        .map(|(b, d, v)| MueBid::new(b, d, v))
        .collect()
}

/// Members 0, 3 and 4 form the first sample half.
pub fn group_auction_split() -> Split {
    Split::from_first(5, &[0, 3, 4])
}

pub fn group_auction() -> Result<GroupAuctionResult> {
    tier1::extract_with_split(&group_auction_bids(), &group_auction_split(), ChargeRule::ClearingPrice)
}

/// Relay bids (constant across SCBs), asks and gathered budgets.
pub fn double_auction_inputs() -> (SueBidMatrix, AskVector, Vec<f64>) {
    let bids = SueBidMatrix::from_rows([2.0, 5.0, 4.0].iter().map(|&b| vec![b; 3]).collect())
        .expect("rectangular rows");
    (bids, AskVector(vec![1.0, 3.0, 5.0]), vec![3.0, 5.0, 7.0])
}

/// The double-auction example as a full instance. Each group has a single
/// member of unit demand whose tier-I payment is the group's gathered
/// budget, so settlement reproduces the example's relay accounting.
pub fn double_auction_instance() -> Result<(Instance, Tier1Table, SueBidMatrix)> {
    let (bids, asks, gathered) = double_auction_inputs();
    let m = asks.len();
    let nested = gathered
        .iter()
        .map(|&f| vec![vec![MueBid::new(f + 1.0, 1, f + 1.0)]; m])
        .collect();
    let instance = Instance::from_bids(0, BidMatrix::from_nested(nested)?, asks)?;
    let table = Tier1Table(
        gathered
            .iter()
            .map(|&f| {
                vec![
                    GroupAuctionResult {
                        winners: vec![0],
                        clearing_price: f,
                        gathered_budget: f,
                        payments: BTreeMap::from([(0, f)]),
                    };
                    m
                ]
            })
            .collect(),
    );
    Ok((instance, table, bids))
}

pub fn double_auction(mechanism: Mechanism) -> Result<MechanismRun> {
    let (instance, table, bids) = double_auction_instance()?;
    instance.finish_with_bids(mechanism, table, bids)
}
