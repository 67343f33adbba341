//! Tier-II double auction between relays (SUEs) and base stations (SCBs).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod matching;

pub use matching::{exact_max_weight_matching, greedy_matching, Edge, Matching};

/// Reserve price of every SCB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AskVector(pub Vec<f64>);

impl AskVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, scb: usize) -> f64 {
        self.0[scb]
    }
}

/// `rows[i][k]` is SUE `i`'s bid for SCB `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SueBidMatrix {
    rows: Vec<Vec<f64>>,
}

impl SueBidMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::Dimension(format!("bid row {i} has {} entries, expected {width}", rows[i].len())));
        }
        Ok(SueBidMatrix { rows })
    }

    pub fn num_sues(&self) -> usize {
        self.rows.len()
    }

    pub fn num_scbs(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, sue: usize, scb: usize) -> f64 {
        self.rows[sue][scb]
    }

    pub fn set(&mut self, sue: usize, scb: usize, bid: f64) {
        self.rows[sue][scb] = bid;
    }

    pub fn row(&self, sue: usize) -> &[f64] {
        &self.rows[sue]
    }

    pub fn row_mut(&mut self, sue: usize) -> &mut [f64] {
        &mut self.rows[sue]
    }

    fn check_against(&self, asks: &AskVector) -> Result<()> {
        if self.num_sues() > 0 && self.num_scbs() != asks.len() {
            return Err(Error::Dimension(format!(
                "bids cover {} SCBs but {} asks were given",
                self.num_scbs(),
                asks.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tier2Outcome {
    /// SUE -> SCB, injective.
    pub assignment: BTreeMap<usize, usize>,
    /// What each winning SUE pays; the SCB receives the same amount.
    pub payments: BTreeMap<usize, f64>,
}

impl Tier2Outcome {
    pub fn winning_sues(&self) -> BTreeSet<usize> {
        self.assignment.keys().copied().collect()
    }

    pub fn winning_scbs(&self) -> BTreeSet<usize> {
        self.assignment.values().copied().collect()
    }

    pub fn scb_of(&self, sue: usize) -> Option<usize> {
        self.assignment.get(&sue).copied()
    }

    pub fn payment(&self, sue: usize) -> Option<f64> {
        self.payments.get(&sue).copied()
    }
}

/// Greedy allocation in SUE order: each SUE takes the remaining SCB with the
/// largest surplus `B - A` (lowest index on ties) if that surplus is
/// non-negative, and pays its bid.
pub fn rmea(bids: &SueBidMatrix, asks: &AskVector) -> Result<Tier2Outcome> {
    bids.check_against(asks)?;
    let mut available = vec![true; asks.len()];
    let mut out = Tier2Outcome::default();
    for i in 0..bids.num_sues() {
        let mut best: Option<(usize, f64)> = None;
        for (k, &free) in available.iter().enumerate() {
            if !free {
                continue;
            }
            let surplus = bids.get(i, k) - asks.get(k);
            if best.is_none_or(|(_, s)| surplus > s) {
                best = Some((k, surplus));
            }
        }
        if let Some((k, surplus)) = best {
            if surplus >= 0.0 {
                out.assignment.insert(i, k);
                out.payments.insert(i, bids.get(i, k));
                available[k] = false;
            }
        }
    }
    Ok(out)
}

/// Edges `(i, k)` weighted `B - A` for every pair whose bid meets the ask.
pub fn surplus_graph(bids: &SueBidMatrix, asks: &AskVector) -> Result<Vec<Edge>> {
    bids.check_against(asks)?;
    let mut edges = Vec::new();
    for i in 0..bids.num_sues() {
        for k in 0..asks.len() {
            let b = bids.get(i, k);
            if b >= asks.get(k) {
                edges.push(Edge::new(i, k, b - asks.get(k)));
            }
        }
    }
    Ok(edges)
}

/// Matchings behind a VITA outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VitaDetails {
    pub matching: Matching,
    /// Greedy matching after deleting each winner's edges, by winner.
    pub without: BTreeMap<usize, Matching>,
}

/// VCG-style payments over the greedy matching:
/// `P_i = w(E*_-i) - (w(E*) - w(i, k)) + A_k`.
pub fn vita(bids: &SueBidMatrix, asks: &AskVector) -> Result<Tier2Outcome> {
    vita_detailed(bids, asks).map(|(out, _)| out)
}

pub fn vita_detailed(bids: &SueBidMatrix, asks: &AskVector) -> Result<(Tier2Outcome, VitaDetails)> {
    let graph = surplus_graph(bids, asks)?;
    let matching = greedy_matching(&graph);
    let mut out = Tier2Outcome::default();
    let mut without = BTreeMap::new();
    for e in &matching.edges {
        let reduced: Vec<Edge> = graph.iter().filter(|x| x.sue != e.sue).copied().collect();
        let alt = greedy_matching(&reduced);
        let others = matching.total_weight - e.weight;
        let payment = alt.total_weight - others + asks.get(e.scb);
        if payment < asks.get(e.scb) {
            log::debug!(
                "VITA payment {payment:.6} of SUE {} is below the ask {:.6} of SCB {}",
                e.sue,
                asks.get(e.scb),
                e.scb
            );
        }
        out.assignment.insert(e.sue, e.scb);
        out.payments.insert(e.sue, payment);
        without.insert(e.sue, alt);
    }
    Ok((out, VitaDetails { matching, without }))
}

/// Exact maximum-weight winner determination, pay-as-bid.
pub fn mwd(bids: &SueBidMatrix, asks: &AskVector) -> Result<Tier2Outcome> {
    let graph = surplus_graph(bids, asks)?;
    let matching = exact_max_weight_matching(&graph);
    let mut out = Tier2Outcome::default();
    for e in &matching.edges {
        out.assignment.insert(e.sue, e.scb);
        out.payments.insert(e.sue, bids.get(e.sue, e.scb));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tier2Rule {
    Rmea,
    Vita,
    Mwd,
}

pub fn run(rule: Tier2Rule, bids: &SueBidMatrix, asks: &AskVector) -> Result<Tier2Outcome> {
    match rule {
        Tier2Rule::Rmea => rmea(bids, asks),
        Tier2Rule::Vita => vita(bids, asks),
        Tier2Rule::Mwd => mwd(bids, asks),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_rows(values: &[f64], m: usize) -> SueBidMatrix {
        SueBidMatrix::from_rows(values.iter().map(|&v| vec![v; m]).collect()).unwrap()
    }

    #[test]
    fn reserve_not_met_gives_empty_outcome() {
        let b = constant_rows(&[0.5, 0.2], 2);
        let a = AskVector(vec![1.0, 2.0]);
        for rule in [Tier2Rule::Rmea, Tier2Rule::Vita, Tier2Rule::Mwd] {
            assert!(run(rule, &b, &a).unwrap().assignment.is_empty());
        }
    }

    #[test]
    fn bid_equal_to_ask_is_accepted() {
        let b = constant_rows(&[1.5], 1);
        let a = AskVector(vec![1.5]);
        let out = rmea(&b, &a).unwrap();
        assert_eq!(out.scb_of(0), Some(0));
        assert_eq!(out.payment(0), Some(1.5));
    }

    #[test]
    fn rmea_breaks_ties_by_lowest_scb() {
        let b = SueBidMatrix::from_rows(vec![vec![3.0, 4.0, 4.0]]).unwrap();
        let a = AskVector(vec![1.0, 2.0, 2.0]);
        assert_eq!(rmea(&b, &a).unwrap().scb_of(0), Some(0));
        let b = SueBidMatrix::from_rows(vec![vec![2.0, 4.0, 4.0]]).unwrap();
        assert_eq!(rmea(&b, &a).unwrap().scb_of(0), Some(1));
    }

    #[test]
    fn rmea_stops_when_scbs_run_out() {
        let b = constant_rows(&[5.0, 5.0, 5.0], 2);
        let a = AskVector(vec![1.0, 1.0]);
        let out = rmea(&b, &a).unwrap();
        assert_eq!(out.assignment, [(0, 0), (1, 1)].into());
    }

    #[test]
    fn lone_bidder_pays_the_reserve() {
        let b = SueBidMatrix::from_rows(vec![vec![4.0, 9.0]]).unwrap();
        let a = AskVector(vec![1.0, 2.0]);
        let out = vita(&b, &a).unwrap();
        assert_eq!(out.scb_of(0), Some(1));
        assert_eq!(out.payment(0), Some(2.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let b = constant_rows(&[1.0], 2);
        assert!(rmea(&b, &AskVector(vec![1.0])).is_err());
        assert!(SueBidMatrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
