//! Desk-scale highway V2V simulator built around vehicle obstruction of the
//! radio line of sight.
//!
//! The crate models a static multi-lane highway snapshot, computes per-link
//! received power with a multiple-knife-edge obstruction model, and evaluates
//! greedy geographic relay selection under three strategies: farthest
//! neighbor, most new neighbors, and tall-vehicle relaying (TVR). A
//! calibration pipeline derives TVR's distance threshold from simulated
//! traffic, and the analysis module produces the system-level metrics
//! (LOS ratios, PDR-vs-distance curves, tall-relay availability, best-route
//! comparisons, relay usage).
//!
//! Everything is deterministic given a seed: scenario generation, pair
//! sampling and route construction reproduce bit-identical results on reruns.

pub mod analysis;
pub mod calibration;
pub mod channel;
pub mod geometry;
pub mod routing;
pub mod scenario;
pub mod stats;

pub use channel::{ChannelParams, LinkBudget};
pub use geometry::{LinkProfile, ObstacleSample, Vehicle, VehicleClass, VehicleId};
pub use routing::{NeighborTable, Route, StrategyKind};
pub use scenario::{RoadConfig, Scenario};
