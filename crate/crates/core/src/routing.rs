//! Neighbor discovery under the channel model and greedy multi-hop route
//! construction under three relay-selection strategies.
//!
//! A neighbor is a vehicle that receives the current vehicle's signal above
//! the sensitivity threshold. All strategies forward only to neighbors
//! strictly closer to the destination, so routes are loop-free by
//! construction; when no such neighbor exists the route fails at a local
//! maximum, with no recovery mode.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::channel::{self, ChannelParams, LinkBudget};
use crate::geometry::{self, Vec2, VehicleClass, VehicleId};
use crate::scenario::Scenario;

/// Distance-difference threshold (m) of the tall-vehicle rule, as
/// calibrated on measured highway traffic.
pub const DEFAULT_X_MAX: f64 = 50.0;

/// Hop cap, well above the diameter of any snapshot this simulator builds.
pub const DEFAULT_HOP_CAP: usize = 100;

/// Relay-selection strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyKind {
    /// Greedy forwarding to the neighbor closest to the destination.
    FarthestNeighbor,
    /// Forward to the neighbor contributing the most new forward neighbors.
    MostNewNeighbors,
    /// Tall-vehicle relaying: prefer the farthest tall forward neighbor
    /// unless the farthest short one is more than `x_max` farther out.
    Tvr { x_max: f64 },
}

impl StrategyKind {
    /// TVR with the calibrated default threshold.
    pub fn tvr_default() -> Self {
        StrategyKind::Tvr { x_max: DEFAULT_X_MAX }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::FarthestNeighbor => "farthest",
            StrategyKind::MostNewNeighbors => "most_new",
            StrategyKind::Tvr { .. } => "tvr",
        }
    }

    /// Applies this strategy's selector at `tx`.
    pub fn select(&self, table: &NeighborTable, tx: VehicleId, destination: VehicleId) -> Option<VehicleId> {
        match *self {
            StrategyKind::FarthestNeighbor => select_farthest(table, tx, destination),
            StrategyKind::MostNewNeighbors => select_most_new(table, tx, destination),
            StrategyKind::Tvr { x_max } => select_tvr(table, tx, destination, x_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    /// Greedy forwarding reached a vehicle with no neighbor closer to the
    /// destination.
    #[error("greedy local maximum at vehicle {at} after {hops_so_far} hops")]
    LocalMaximum { at: VehicleId, hops_so_far: usize },
    #[error("route exceeded the {cap}-hop cap")]
    HopCapExceeded { cap: usize },
    #[error("all strategies failed for this source-destination pair")]
    AllStrategiesFailed,
}

/// One row of a vehicle's neighbor table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEntry {
    pub id: VehicleId,
    pub class: VehicleClass,
    pub budget: LinkBudget,
}

/// Neighbor relation of a whole snapshot at fixed channel parameters,
/// deterministic (shadowing is not sampled) and symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    neighbors: BTreeMap<VehicleId, Vec<NeighborEntry>>,
    positions: BTreeMap<VehicleId, Vec2>,
}

impl NeighborTable {
    /// Neighbor rows of `id`, ascending by neighbor id.
    pub fn neighbors_of(&self, id: VehicleId) -> &[NeighborEntry] {
        self.neighbors.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn entry(&self, from: VehicleId, to: VehicleId) -> Option<&NeighborEntry> {
        let rows = self.neighbors_of(from);
        rows.binary_search_by(|e| e.id.cmp(&to)).ok().map(|i| &rows[i])
    }

    pub fn is_neighbor(&self, from: VehicleId, to: VehicleId) -> bool {
        self.entry(from, to).is_some()
    }

    pub fn position(&self, id: VehicleId) -> Vec2 {
        *self.positions.get(&id).expect("vehicle in table")
    }

    /// 2-D distance between two vehicles in the snapshot.
    pub fn distance(&self, a: VehicleId, b: VehicleId) -> f64 {
        (self.position(a) - self.position(b)).norm()
    }

    pub fn ids(&self) -> impl Iterator<Item = VehicleId> + '_ {
        self.positions.keys().copied()
    }
}

/// Evaluates every vehicle pair through the channel model (deterministic,
/// sigma not sampled) and records mutual neighbors with received power at
/// or above the sensitivity threshold.
pub fn build_neighbor_table(scenario: &Scenario, params: &ChannelParams) -> NeighborTable {
    let vehicles = scenario.vehicles();
    let mut neighbors: BTreeMap<VehicleId, Vec<NeighborEntry>> = BTreeMap::new();
    let mut positions = BTreeMap::new();
    for v in vehicles {
        neighbors.insert(v.id, Vec::new());
        positions.insert(v.id, v.center());
    }

    // Free-space range bounds the neighbor relation exactly: obstruction
    // only removes power. Each unordered pair is evaluated once; the
    // deterministic budget is identical in both directions.
    let max_range = params.max_los_range();
    for (i, tx) in vehicles.iter().enumerate() {
        for j in scenario.indices_in_x_window(tx.x, tx.x + max_range) {
            if j == i {
                continue;
            }
            let rx = &vehicles[j];
            if rx.x < tx.x || (rx.x == tx.x && j < i) {
                continue;
            }
            let profile = geometry::link_profile(tx, rx, scenario, params.wavelength());
            if profile.distance > max_range {
                continue;
            }
            let budget = channel::budget_from_profile(&profile, params, None);
            if budget.received_power >= params.sensitivity {
                neighbors.get_mut(&tx.id).unwrap().push(NeighborEntry {
                    id: rx.id,
                    class: rx.class,
                    budget,
                });
                neighbors.get_mut(&rx.id).unwrap().push(NeighborEntry {
                    id: tx.id,
                    class: tx.class,
                    budget,
                });
            }
        }
    }
    for rows in neighbors.values_mut() {
        rows.sort_by(|a, b| a.id.cmp(&b.id));
    }
    NeighborTable { neighbors, positions }
}

/// Neighbors of `tx` strictly closer to the destination than `tx` itself.
pub fn forward_set<'t>(
    table: &'t NeighborTable,
    tx: VehicleId,
    destination: VehicleId,
) -> Vec<&'t NeighborEntry> {
    let dest = table.position(destination);
    let own = (table.position(tx) - dest).norm();
    table
        .neighbors_of(tx)
        .iter()
        .filter(|e| (table.position(e.id) - dest).norm() < own)
        .collect()
}

/// Greatest-forward-progress selector: the forward neighbor closest to the
/// destination. Ties break toward the lower vehicle id.
pub fn select_farthest(table: &NeighborTable, tx: VehicleId, destination: VehicleId) -> Option<VehicleId> {
    let dest = table.position(destination);
    forward_set(table, tx, destination)
        .into_iter()
        .map(|e| ((table.position(e.id) - dest).norm(), e.id))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}

/// Selector maximizing the number of forward neighbors not already visible
/// from `tx`. Ties break toward the candidate closest to the destination,
/// then the lower id.
pub fn select_most_new(table: &NeighborTable, tx: VehicleId, destination: VehicleId) -> Option<VehicleId> {
    let dest = table.position(destination);
    let own_forward = forward_set(table, tx, destination);
    if own_forward.is_empty() {
        return None;
    }
    let own_ids: Vec<VehicleId> = own_forward.iter().map(|e| e.id).collect();

    let mut best: Option<(usize, f64, VehicleId)> = None;
    for cand in &own_forward {
        let cand_forward = forward_set(table, cand.id, destination);
        // Both id lists ascend, so the set difference is a merge walk.
        let mut new_count = 0usize;
        let mut k = 0usize;
        for e in &cand_forward {
            while k < own_ids.len() && own_ids[k] < e.id {
                k += 1;
            }
            if k >= own_ids.len() || own_ids[k] != e.id {
                if e.id != tx {
                    new_count += 1;
                }
            }
        }
        let dist = (table.position(cand.id) - dest).norm();
        let better = match &best {
            None => true,
            Some((n, d, id)) => {
                new_count > *n
                    || (new_count == *n && (dist < *d || (dist == *d && cand.id < *id)))
            }
        };
        if better {
            best = Some((new_count, dist, cand.id));
        }
    }
    best.map(|(_, _, id)| id)
}

/// Tall-vehicle relaying: compute the farthest tall and farthest short
/// forward neighbors and keep the tall one unless the short one is more
/// than `x_max` meters farther from the transmitter.
pub fn select_tvr(
    table: &NeighborTable,
    tx: VehicleId,
    destination: VehicleId,
    x_max: f64,
) -> Option<VehicleId> {
    assert!(x_max >= 0.0, "x_max must be non-negative");
    let dest = table.position(destination);
    let mut far_tall: Option<(f64, VehicleId)> = None;
    let mut far_short: Option<(f64, VehicleId)> = None;
    for e in forward_set(table, tx, destination) {
        let dist_to_dest = (table.position(e.id) - dest).norm();
        let slot = match e.class {
            VehicleClass::Tall => &mut far_tall,
            VehicleClass::Short => &mut far_short,
        };
        let better = match slot {
            None => true,
            Some((d, id)) => dist_to_dest < *d || (dist_to_dest == *d && e.id < *id),
        };
        if better {
            *slot = Some((dist_to_dest, e.id));
        }
    }
    match (far_tall, far_short) {
        (None, None) => None,
        (Some((_, tall)), None) => Some(tall),
        (None, Some((_, short))) => Some(short),
        (Some((_, tall)), Some((_, short))) => {
            let from_tx = |id| table.distance(tx, id);
            if from_tx(short) - from_tx(tall) <= x_max {
                Some(tall)
            } else {
                Some(short)
            }
        }
    }
}

/// Multi-hop route between two vehicles.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub source: VehicleId,
    pub destination: VehicleId,
    /// Full node sequence, source first, destination last.
    pub nodes: Vec<VehicleId>,
    /// Budget of each traversed link; `nodes.len() == links.len() + 1`.
    pub links: Vec<LinkBudget>,
    pub strategy: StrategyKind,
}

impl Route {
    pub fn hop_count(&self) -> usize {
        self.links.len()
    }

    /// Relay vehicles: every node except source and destination.
    pub fn relays(&self) -> &[VehicleId] {
        &self.nodes[1..self.nodes.len() - 1]
    }
}

/// Greedily builds a route with the given strategy.
///
/// When the destination itself is a neighbor of the current node the route
/// completes with a direct final hop; otherwise the selector picks the next
/// relay. Fails with `LocalMaximum` when the selector has no forward
/// neighbor and with `HopCapExceeded` past `hop_cap`.
pub fn build_route(
    source: VehicleId,
    destination: VehicleId,
    table: &NeighborTable,
    strategy: StrategyKind,
    hop_cap: usize,
) -> Result<Route, RouteError> {
    assert!(source != destination, "source and destination must differ");
    complete_route(vec![source], Vec::new(), destination, table, strategy, hop_cap)
}

/// Builds a route whose first hop is forced to `via` (a neighbor of
/// `source`), completed greedily with `strategy` from there on.
pub fn build_route_via(
    source: VehicleId,
    via: VehicleId,
    destination: VehicleId,
    table: &NeighborTable,
    strategy: StrategyKind,
    hop_cap: usize,
) -> Result<Route, RouteError> {
    assert!(source != destination, "source and destination must differ");
    let entry = table.entry(source, via).expect("forced first hop must be a neighbor");
    complete_route(
        vec![source, via],
        vec![entry.budget],
        destination,
        table,
        strategy,
        hop_cap,
    )
}

fn complete_route(
    mut nodes: Vec<VehicleId>,
    mut links: Vec<LinkBudget>,
    destination: VehicleId,
    table: &NeighborTable,
    strategy: StrategyKind,
    hop_cap: usize,
) -> Result<Route, RouteError> {
    loop {
        let current = *nodes.last().unwrap();
        if current == destination {
            break;
        }
        if let Some(entry) = table.entry(current, destination) {
            if links.len() >= hop_cap {
                return Err(RouteError::HopCapExceeded { cap: hop_cap });
            }
            nodes.push(destination);
            links.push(entry.budget);
            break;
        }
        if links.len() >= hop_cap {
            return Err(RouteError::HopCapExceeded { cap: hop_cap });
        }
        let next = strategy.select(table, current, destination).ok_or(RouteError::LocalMaximum {
            at: current,
            hops_so_far: links.len(),
        })?;
        let entry = table.entry(current, next).expect("selector returns a neighbor");
        nodes.push(next);
        links.push(entry.budget);
    }
    Ok(Route {
        source: nodes[0],
        destination,
        nodes,
        links,
        strategy,
    })
}

/// Outcome of one strategy on one source-destination pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    pub strategy: StrategyKind,
    pub outcome: Result<Route, RouteError>,
}

impl StrategyOutcome {
    pub fn hops(&self) -> Option<usize> {
        self.outcome.as_ref().ok().map(Route::hop_count)
    }
}

/// All strategies run on the identical snapshot and pair, with the best
/// (minimum-hop) outcomes flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct BestRouteComparison {
    pub outcomes: Vec<StrategyOutcome>,
    /// Least hop count achieved by any successful strategy.
    pub min_hops: usize,
}

impl BestRouteComparison {
    /// Whether outcome `i` attains the minimum hop count.
    pub fn is_best(&self, i: usize) -> bool {
        self.outcomes[i].hops() == Some(self.min_hops)
    }
}

/// Runs every strategy on the same pair and reports per-strategy hop counts
/// with the minimum flagged; failures are excluded from the minimum.
pub fn best_route_hops(
    source: VehicleId,
    destination: VehicleId,
    table: &NeighborTable,
    strategies: &[StrategyKind],
    hop_cap: usize,
) -> Result<BestRouteComparison, RouteError> {
    let outcomes: Vec<StrategyOutcome> = strategies
        .iter()
        .map(|&strategy| StrategyOutcome {
            strategy,
            outcome: build_route(source, destination, table, strategy, hop_cap),
        })
        .collect();
    let min_hops = outcomes
        .iter()
        .filter_map(StrategyOutcome::hops)
        .min()
        .ok_or(RouteError::AllStrategiesFailed)?;
    Ok(BestRouteComparison { outcomes, min_hops })
}
