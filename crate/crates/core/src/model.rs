//! Network topology, link capacities, MUE valuations and bid sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn uniform<R: Rng + ?Sized>(side: f64, rng: &mut R) -> Self {
        Position {
            x: rng.random::<f64>() * side,
            y: rng.random::<f64>() * side,
        }
    }
}

/// Log-distance path loss with Shannon rates. Powers are in mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub path_loss_exponent: f64,
    pub tx_power_mue: f64,
    pub tx_power_sue: f64,
    pub noise_power: f64,
    pub bandwidth: f64,
    pub min_distance_clamp: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            path_loss_exponent: 4.0,
            tx_power_mue: 100.0,
            tx_power_sue: 200.0,
            noise_power: 1e-6,
            bandwidth: 1e6,
            min_distance_clamp: 1.0,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("path_loss_exponent", self.path_loss_exponent),
            ("tx_power_mue", self.tx_power_mue),
            ("tx_power_sue", self.tx_power_sue),
            ("noise_power", self.noise_power),
            ("bandwidth", self.bandwidth),
            ("min_distance_clamp", self.min_distance_clamp),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {value}")));
            }
        }
        if !(2.0..=6.0).contains(&self.path_loss_exponent) {
            return Err(Error::Config(format!(
                "path_loss_exponent must lie in [2, 6], got {}",
                self.path_loss_exponent
            )));
        }
        Ok(())
    }

    /// Shannon rate of a single hop at `tx_power`, distance clamped below.
    pub fn link_rate(&self, from: &Position, to: &Position, tx_power: f64) -> f64 {
        let d = from.distance(to).max(self.min_distance_clamp);
        let snr = tx_power * d.powf(-self.path_loss_exponent) / self.noise_power;
        self.bandwidth * (1.0 + snr).log2()
    }
}

/// Rate of the direct MUE -> SCB link.
pub fn direct_capacity(mue: &Position, scb: &Position, p: &RadioParams) -> f64 {
    p.link_rate(mue, scb, p.tx_power_mue)
}

/// Half-duplex decode-and-forward rate through the relay: both hops share
/// the slot, and the weaker hop bounds the end-to-end rate.
pub fn relay_capacity(mue: &Position, relay: &Position, scb: &Position, p: &RadioParams) -> f64 {
    let first = p.link_rate(mue, relay, p.tx_power_mue);
    let second = p.link_rate(relay, scb, p.tx_power_sue);
    0.5 * first.min(second)
}

/// Ratio of relayed to direct rate, clamped at zero.
pub fn valuation(mue: &Position, relay: &Position, scb: &Position, p: &RadioParams) -> f64 {
    // Both capacities are strictly positive, so the clamp never binds.
    (relay_capacity(mue, relay, scb, p) / direct_capacity(mue, scb, p)).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub scb_positions: Vec<Position>,
    pub sue_positions: Vec<Position>,
    /// `mue_positions[i]` are the members of the group relayed by SUE `i`.
    pub mue_positions: Vec<Vec<Position>>,
}

impl Topology {
    pub fn num_scbs(&self) -> usize {
        self.scb_positions.len()
    }

    pub fn num_groups(&self) -> usize {
        self.sue_positions.len()
    }

    pub fn group_size(&self, group: usize) -> usize {
        self.mue_positions[group].len()
    }

    /// Global MUE id -> group index, with ids assigned group by group.
    pub fn group_of_mue(&self) -> Vec<usize> {
        self.mue_positions
            .iter()
            .enumerate()
            .flat_map(|(g, members)| std::iter::repeat_n(g, members.len()))
            .collect()
    }
}

pub fn generate_topology<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Topology> {
    if config.num_scbs == 0 || config.num_sues == 0 || config.mues_per_group == 0 {
        return Err(Error::Config(format!(
            "network must be non-empty (M={}, N={}, n_i={})",
            config.num_scbs, config.num_sues, config.mues_per_group
        )));
    }
    if !(config.area_side.is_finite() && config.area_side > 0.0) {
        return Err(Error::Config(format!("area_side must be > 0, got {}", config.area_side)));
    }
    let side = config.area_side;
    let scb_positions = (0..config.num_scbs).map(|_| Position::uniform(side, rng)).collect();
    let sue_positions = (0..config.num_sues).map(|_| Position::uniform(side, rng)).collect();
    let mue_positions = (0..config.num_sues)
        .map(|_| {
            (0..config.mues_per_group)
                .map(|_| Position::uniform(side, rng))
                .collect()
        })
        .collect();
    Ok(Topology {
        scb_positions,
        sue_positions,
        mue_positions,
    })
}

/// One MUE's bid towards one SCB: budget, valuation and demand in CPU cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MueBid {
    pub budget: f64,
    pub valuation: f64,
    pub demand: u32,
}

impl MueBid {
    pub fn new(budget: f64, demand: u32, valuation: f64) -> Self {
        MueBid {
            budget,
            valuation,
            demand,
        }
    }

    pub fn unit_budget(&self) -> f64 {
        self.budget / f64::from(self.demand)
    }
}

/// Bids indexed by group, SCB and member. Stored SCB-major within a group
/// because the group auction consumes one SCB column at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidMatrix {
    bids: Vec<Vec<Vec<MueBid>>>,
}

impl BidMatrix {
    /// `bids[group][scb][mue]`; every group must list the same SCB count and
    /// the same member count for every SCB.
    pub fn from_nested(bids: Vec<Vec<Vec<MueBid>>>) -> Result<Self> {
        let num_scbs = bids.first().map_or(0, Vec::len);
        for (g, per_scb) in bids.iter().enumerate() {
            if per_scb.len() != num_scbs {
                return Err(Error::Dimension(format!(
                    "group {g} lists {} SCBs, expected {num_scbs}",
                    per_scb.len()
                )));
            }
            let members = per_scb.first().map_or(0, Vec::len);
            if per_scb.iter().any(|col| col.len() != members) {
                return Err(Error::Dimension(format!("group {g} has ragged member lists")));
            }
            if let Some(bad) = per_scb.iter().flatten().find(|b| b.demand == 0) {
                return Err(Error::Dimension(format!("group {g} has a zero-demand bid {bad:?}")));
            }
        }
        Ok(BidMatrix { bids })
    }

    pub fn num_groups(&self) -> usize {
        self.bids.len()
    }

    pub fn num_scbs(&self) -> usize {
        self.bids.first().map_or(0, Vec::len)
    }

    pub fn group_size(&self, group: usize) -> usize {
        self.bids[group].first().map_or(0, Vec::len)
    }

    pub fn get(&self, group: usize, mue: usize, scb: usize) -> &MueBid {
        &self.bids[group][scb][mue]
    }

    pub fn get_mut(&mut self, group: usize, mue: usize, scb: usize) -> &mut MueBid {
        &mut self.bids[group][scb][mue]
    }

    /// All members' bids of `group` for `scb`, in member order.
    pub fn column(&self, group: usize, scb: usize) -> &[MueBid] {
        &self.bids[group][scb]
    }

    /// All of `group`'s columns, SCB-major.
    pub fn group(&self, group: usize) -> &[Vec<MueBid>] {
        &self.bids[group]
    }
}

pub fn generate_bids<R: Rng + ?Sized>(
    top: &Topology,
    p: &RadioParams,
    demand_range: (u32, u32),
    rng: &mut R,
) -> Result<BidMatrix> {
    let (lo, hi) = demand_range;
    if lo == 0 || lo > hi {
        return Err(Error::Config(format!("demand range must satisfy 1 <= lo <= hi, got [{lo}, {hi}]")));
    }
    let mut bids = Vec::with_capacity(top.num_groups());
    for (g, relay) in top.sue_positions.iter().enumerate() {
        let members = &top.mue_positions[g];
        let mut per_scb = vec![Vec::with_capacity(members.len()); top.num_scbs()];
        for mue in members {
            for (k, scb) in top.scb_positions.iter().enumerate() {
                let v = valuation(mue, relay, scb, p);
                let budget = open_uniform(v, rng);
                let demand = rng.random_range(lo..=hi);
                per_scb[k].push(MueBid::new(budget, demand, v));
            }
        }
        bids.push(per_scb);
    }
    BidMatrix::from_nested(bids)
}

/// Uniform draw on the open interval (0, upper).
fn open_uniform<R: Rng + ?Sized>(upper: f64, rng: &mut R) -> f64 {
    loop {
        let x = rng.random::<f64>() * upper;
        if x > 0.0 && x < upper {
            return x;
        }
        if upper <= 0.0 {
            return 0.0;
        }
    }
}
