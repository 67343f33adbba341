//! Two-stage auctions for relay-aided computation offloading in a two-tier
//! cellular network.
//!
//! Macro-cell users (MUEs) are grouped behind small-cell relays (SUEs). Each
//! relay runs a group auction over its members (tier I, [`tier1`]) and then
//! bids the gathered budget for a small-cell base station (SCB) in a double
//! auction run by the macro cell (tier II, [`tier2`]). [`settlement`] turns the
//! two results into realized utilities, [`properties`] measures the economic
//! guarantees, and [`experiments`] drives seeded comparative sweeps.

pub mod error;
pub mod experiments;
pub mod io;
pub mod mechanism;
pub mod model;
pub mod properties;
pub mod seed;
pub mod settlement;
pub mod tier1;
pub mod tier2;
pub mod worked;

pub use error::{Error, Result};
pub use mechanism::{Instance, Mechanism, MechanismRun};

/// Absolute tolerance used for every floating-point equality invariant.
pub const EPS: f64 = 1e-9;
