//! The five mechanisms compared by the harness, and seeded problem instances
//! that every mechanism consumes identically.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::experiments::config::ScenarioConfig;
use crate::model::{self, BidMatrix, MueBid, Topology};
use crate::seed::{self, label};
use crate::settlement::{settle, SettlementReport};
use crate::tier1::{self, GroupAuctionResult, Tier1Rule, Tier1Table};
use crate::tier2::{self, AskVector, SueBidMatrix, Tier2Outcome, Tier2Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    /// Sampling group auction + greedy RMEA allocation.
    Tarco,
    /// TARCO with winners charged their full budgets (upper bound).
    Optb,
    /// Random-reference group auction + RMEA.
    Rnd,
    /// Sampling group auction + exact max-weight matching, pay-as-bid.
    Mwd,
    /// Sampling group auction + VCG-style payments over greedy matching.
    Vita,
}

impl Mechanism {
    pub const ALL: [Mechanism; 5] = [
        Mechanism::Tarco,
        Mechanism::Optb,
        Mechanism::Rnd,
        Mechanism::Mwd,
        Mechanism::Vita,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Mechanism::Tarco => "TARCO",
            Mechanism::Optb => "OPTB",
            Mechanism::Rnd => "RND",
            Mechanism::Mwd => "MWD",
            Mechanism::Vita => "VITA",
        }
    }

    pub fn tier1_rule(self) -> Tier1Rule {
        match self {
            Mechanism::Optb => Tier1Rule::UpperBound,
            Mechanism::Rnd => Tier1Rule::Random,
            Mechanism::Tarco | Mechanism::Mwd | Mechanism::Vita => Tier1Rule::Sampling,
        }
    }

    pub fn tier2_rule(self) -> Tier2Rule {
        match self {
            Mechanism::Tarco | Mechanism::Optb | Mechanism::Rnd => Tier2Rule::Rmea,
            Mechanism::Mwd => Tier2Rule::Mwd,
            Mechanism::Vita => Tier2Rule::Vita,
        }
    }

    /// Whether relays are guaranteed non-negative utility under truthful
    /// bids. Pay-as-bid with a non-negative surplus filter is; VCG over a
    /// greedy matching is not.
    pub fn sue_ir_guaranteed(self) -> bool {
        self.tier2_rule() != Tier2Rule::Vita
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mechanism::ALL
            .into_iter()
            .find(|m| m.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownMechanism(s.to_string()))
    }
}

impl Serialize for Mechanism {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for Mechanism {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Asks uniform on the half-open interval `(lo, hi]`.
pub fn sample_asks<R: Rng + ?Sized>(num_scbs: usize, range: (f64, f64), rng: &mut R) -> AskVector {
    let (lo, hi) = range;
    AskVector(
        (0..num_scbs)
            .map(|_| hi - rng.random::<f64>() * (hi - lo))
            .collect(),
    )
}

/// One problem instance. The seed also fixes the tier-I randomness: the
/// stream of group `i` for SCB `k` depends only on `(seed, i, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub seed: u64,
    pub topology: Option<Topology>,
    pub bids: BidMatrix,
    pub asks: AskVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismRun {
    pub mechanism: Mechanism,
    pub tier1: Tier1Table,
    /// Tier-II bids; truthful relays bid their gathered budgets.
    pub sue_bids: SueBidMatrix,
    pub tier2: Tier2Outcome,
    pub report: SettlementReport,
}

impl Instance {
    pub fn generate(config: &ScenarioConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let topology = model::generate_topology(config, &mut seed::rng(seed, &[label::TOPOLOGY]))?;
        let bids = model::generate_bids(
            &topology,
            &config.radio,
            config.demand_range,
            &mut seed::rng(seed, &[label::BIDS]),
        )?;
        let asks = sample_asks(config.num_scbs, config.ask_range, &mut seed::rng(seed, &[label::ASKS]));
        Ok(Instance {
            seed,
            topology: Some(topology),
            bids,
            asks,
        })
    }

    pub fn from_bids(seed: u64, bids: BidMatrix, asks: AskVector) -> Result<Self> {
        if bids.num_scbs() != asks.len() {
            return Err(Error::Dimension(format!(
                "bids cover {} SCBs but {} asks were given",
                bids.num_scbs(),
                asks.len()
            )));
        }
        Ok(Instance {
            seed,
            topology: None,
            bids,
            asks,
        })
    }

    pub fn num_groups(&self) -> usize {
        self.bids.num_groups()
    }

    pub fn num_scbs(&self) -> usize {
        self.asks.len()
    }

    /// Tier-I auction of `group` for `scb` on the given (possibly misreported)
    /// column of bids.
    pub fn tier1_cell(&self, rule: Tier1Rule, group: usize, scb: usize, column: &[MueBid]) -> Result<GroupAuctionResult> {
        let mut rng = seed::rng(self.seed, &[label::TIER1, group as u64, scb as u64]);
        tier1::auction_column(rule, column, &mut rng)
    }

    pub fn tier1(&self, rule: Tier1Rule) -> Result<Tier1Table> {
        let rows = (0..self.num_groups())
            .map(|g| {
                (0..self.num_scbs())
                    .map(|k| self.tier1_cell(rule, g, k, self.bids.column(g, k)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Tier1Table(rows))
    }

    pub fn run(&self, mechanism: Mechanism) -> Result<MechanismRun> {
        let table = self.tier1(mechanism.tier1_rule())?;
        self.finish(mechanism, table)
    }

    /// Tier II with truthful relay bids, then settlement against true bids.
    pub fn finish(&self, mechanism: Mechanism, table: Tier1Table) -> Result<MechanismRun> {
        let sue_bids = SueBidMatrix::from_rows(table.gathered_budgets())?;
        self.finish_with_bids(mechanism, table, sue_bids)
    }

    pub fn finish_with_bids(&self, mechanism: Mechanism, table: Tier1Table, sue_bids: SueBidMatrix) -> Result<MechanismRun> {
        let outcome = tier2::run(mechanism.tier2_rule(), &sue_bids, &self.asks)?;
        let report = settle(&table, &outcome, &self.asks, &self.bids)?;
        Ok(MechanismRun {
            mechanism,
            tier1: table,
            sue_bids,
            tier2: outcome,
            report,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for m in Mechanism::ALL {
            assert_eq!(m.tag().parse::<Mechanism>().unwrap(), m);
        }
        assert_eq!("vita".parse::<Mechanism>().unwrap(), Mechanism::Vita);
        assert!(matches!("VCG".parse::<Mechanism>(), Err(Error::UnknownMechanism(_))));
    }

    #[test]
    fn asks_lie_in_half_open_unit_interval() {
        let mut rng = seed::rng(2, &[]);
        let a = sample_asks(10_000, (0.0, 1.0), &mut rng);
        assert!(a.0.iter().all(|&x| x > 0.0 && x <= 1.0));
    }

    #[test]
    fn mechanisms_share_tier1_randomness() {
        let cfg = ScenarioConfig {
            num_scbs: 3,
            num_sues: 3,
            mues_per_group: 12,
            ..ScenarioConfig::default()
        };
        let inst = Instance::generate(&cfg, 99).unwrap();
        let tarco = inst.run(Mechanism::Tarco).unwrap();
        let vita = inst.run(Mechanism::Vita).unwrap();
        let optb = inst.run(Mechanism::Optb).unwrap();
        assert_eq!(tarco.tier1, vita.tier1);
        for g in 0..3 {
            for k in 0..3 {
                assert_eq!(tarco.tier1.get(g, k).winners, optb.tier1.get(g, k).winners);
            }
        }
    }
}
