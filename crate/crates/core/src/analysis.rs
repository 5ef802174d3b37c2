//! System-level metrics: tall-relay availability (analytic and empirical),
//! PDR-vs-distance curves, effective communication range, best-route
//! comparison across strategies, obstruction histograms and relay-usage
//! percentages.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::channel::{self, ChannelParams};
use crate::geometry::{self, VehicleClass};
use crate::routing::{self, Route, StrategyKind};
use crate::scenario::Scenario;
use crate::stats::derive_seed;

/// Bins with fewer samples than this are flagged in reports.
pub const REPORTING_FLOOR: usize = 40;

/// Probability of at least one tall vehicle in a forward window of length
/// `x_max`, for tall fraction `gamma` and road-wide linear density
/// `lambda_s` per meter: `1 - exp(-gamma * lambda_s * x_max)`.
pub fn tall_relay_prob_analytic(gamma: f64, lambda_s: f64, x_max: f64) -> f64 {
    debug_assert!(gamma >= 0.0 && lambda_s >= 0.0 && x_max >= 0.0);
    1.0 - (-gamma * lambda_s * x_max).exp()
}

/// Measured fraction of vehicles with at least one tall vehicle at
/// longitudinal forward distance in `[r - x_max, r]`, pooled over all
/// snapshots. Vehicles whose window extends past the road end are skipped
/// so every observation uses a full window.
pub fn tall_relay_prob_empirical(scenarios: &[Scenario], r: f64, x_max: f64) -> f64 {
    assert!(x_max >= 0.0 && x_max <= r, "need 0 <= x_max <= r");
    let mut observers = 0u64;
    let mut hits = 0u64;
    for scenario in scenarios {
        let road_len = scenario.road().length;
        for v in scenario.vehicles() {
            if v.x + r > road_len {
                continue;
            }
            observers += 1;
            let lo = v.x + (r - x_max);
            let hi = v.x + r;
            let found = scenario
                .vehicles_in_x_window(lo, hi)
                .any(|o| o.class == VehicleClass::Tall && o.id != v.id);
            if found {
                hits += 1;
            }
        }
    }
    if observers == 0 {
        0.0
    } else {
        hits as f64 / observers as f64
    }
}

/// Endpoint-class filter for PDR curves: both endpoints short, or at least
/// one endpoint tall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    CarCar,
    VanX,
}

impl Pairing {
    pub fn label(self) -> &'static str {
        match self {
            Pairing::CarCar => "car_car",
            Pairing::VanX => "van_x",
        }
    }

    fn matches(self, a: VehicleClass, b: VehicleClass) -> bool {
        match self {
            Pairing::CarCar => a == VehicleClass::Short && b == VehicleClass::Short,
            Pairing::VanX => a == VehicleClass::Tall || b == VehicleClass::Tall,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdrBin {
    /// Bin center (m).
    pub center: f64,
    /// Mean link delivery probability of the pairs in the bin.
    pub pdr: f64,
    pub n_samples: usize,
}

/// PDR binned by link distance. Only populated bins are listed.
#[derive(Debug, Clone, PartialEq)]
pub struct PdrCurve {
    pub bin_width: f64,
    pub reporting_floor: usize,
    pub bins: Vec<PdrBin>,
}

impl PdrCurve {
    /// Whether bin `i` sits below the reporting floor.
    pub fn flagged(&self, i: usize) -> bool {
        self.bins[i].n_samples < self.reporting_floor
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_center_m,pdr,n_samples,flagged\n");
        for (i, b) in self.bins.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                b.center,
                b.pdr,
                b.n_samples,
                self.flagged(i)
            ));
        }
        out
    }
}

/// Bins the link delivery probability of every pair of the requested class
/// combination by distance, over all snapshots.
///
/// With `nlos_only` the curve uses only links whose Fresnel ellipsoid is
/// penetrated. Budgets are deterministic; shadowing enters analytically
/// through the PDR mapping, so `shadowing_sigma > 0` yields smooth curves.
pub fn pdr_vs_distance(
    scenarios: &[Scenario],
    params: &ChannelParams,
    pairing: Pairing,
    bin_width: f64,
    max_distance: f64,
    nlos_only: bool,
) -> PdrCurve {
    assert!(bin_width > 0.0 && max_distance > 0.0);
    let n_bins = (max_distance / bin_width).ceil() as usize;
    let mut sums = vec![0.0_f64; n_bins];
    let mut counts = vec![0usize; n_bins];
    for scenario in scenarios {
        let vehicles = scenario.vehicles();
        for (i, tx) in vehicles.iter().enumerate() {
            for j in scenario.indices_in_x_window(tx.x, tx.x + max_distance) {
                if j == i {
                    continue;
                }
                let rx = &vehicles[j];
                if rx.x < tx.x || (rx.x == tx.x && j < i) {
                    continue;
                }
                if !pairing.matches(tx.class, rx.class) {
                    continue;
                }
                let profile = geometry::link_profile(tx, rx, scenario, params.wavelength());
                if profile.distance >= max_distance {
                    continue;
                }
                if nlos_only && profile.obstacles.is_empty() {
                    continue;
                }
                let budget = channel::budget_from_profile(&profile, params, None);
                let pdr = channel::link_pdr(&budget, params);
                let bin = (profile.distance / bin_width) as usize;
                sums[bin] += pdr;
                counts[bin] += 1;
            }
        }
    }
    let bins = (0..n_bins)
        .filter(|&b| counts[b] > 0)
        .map(|b| PdrBin {
            center: (b as f64 + 0.5) * bin_width,
            pdr: sums[b] / counts[b] as f64,
            n_samples: counts[b],
        })
        .collect();
    PdrCurve {
        bin_width,
        reporting_floor: REPORTING_FLOOR,
        bins,
    }
}

/// Largest distance at which the linearly interpolated curve still meets
/// `target_pdr`. `None` when the curve never reaches the target; when the
/// curve is still at or above the target at its last bin, that bin's center
/// is returned.
pub fn effective_range(curve: &PdrCurve, target_pdr: f64) -> Option<f64> {
    assert!(target_pdr > 0.0 && target_pdr <= 1.0);
    let bins = &curve.bins;
    let last_at_or_above = bins.iter().rposition(|b| b.pdr >= target_pdr)?;
    if last_at_or_above == bins.len() - 1 {
        return Some(bins[last_at_or_above].center);
    }
    let a = bins[last_at_or_above];
    let b = bins[last_at_or_above + 1];
    Some(a.center + (a.pdr - target_pdr) / (a.pdr - b.pdr) * (b.center - a.center))
}

/// Per-(power, strategy) routing statistics over identical pair sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub power_dbm: f64,
    pub strategy: StrategyKind,
    /// Pairs analyzed at this power (identical for every strategy).
    pub n_pairs: usize,
    /// Percentage of pairs (with at least one successful strategy) where
    /// this strategy attained the minimum hop count.
    pub best_pct: f64,
    /// Mean hops over this strategy's successful pairs.
    pub mean_hops: Option<f64>,
    /// Percentage of analyzed pairs where this strategy failed.
    pub failure_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategySummary {
    pub strategy: StrategyKind,
    /// Mean of per-power best percentages.
    pub mean_best_pct: f64,
    /// Sample standard deviation across powers (0 for a single power).
    pub std_best_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub summaries: Vec<StrategySummary>,
    /// Pairs where no strategy found a route, pooled over all powers.
    pub all_failed_pairs: usize,
    pub total_pairs: usize,
}

impl ComparisonReport {
    pub fn row(&self, power: f64, strategy: StrategyKind) -> Option<&ComparisonRow> {
        self.rows
            .iter()
            .find(|r| r.power_dbm == power && r.strategy.label() == strategy.label())
    }

    pub fn summary(&self, strategy: StrategyKind) -> Option<&StrategySummary> {
        self.summaries
            .iter()
            .find(|s| s.strategy.label() == strategy.label())
    }
}

/// Runs every strategy over the same sampled source-destination pairs, per
/// transmit power, and reports the share of pairs on which each strategy
/// attained the minimum hop count.
///
/// Pairs are uniform over ordered pairs that are not direct neighbors at
/// the given power, `n_pairs` per snapshot, deterministic per seed.
pub fn compare_strategies(
    scenarios: &[Scenario],
    base: &ChannelParams,
    powers: &[f64],
    strategies: &[StrategyKind],
    n_pairs: usize,
    seed: u64,
) -> ComparisonReport {
    assert!(!strategies.is_empty(), "need at least one strategy");
    let mut rows = Vec::new();
    let mut per_strategy_best: Vec<Vec<f64>> = vec![Vec::new(); strategies.len()];
    let mut all_failed_total = 0usize;
    let mut total_pairs = 0usize;

    for (pi, &power) in powers.iter().enumerate() {
        let params = ChannelParams {
            tx_power: power,
            ..base.clone()
        };
        let mut analyzed = 0usize; // pairs with >= 1 successful strategy
        let mut sampled = 0usize;
        let mut best_counts = vec![0usize; strategies.len()];
        let mut success_counts = vec![0usize; strategies.len()];
        let mut hop_sums = vec![0usize; strategies.len()];

        for (si, scenario) in scenarios.iter().enumerate() {
            if scenario.len() < 2 {
                continue;
            }
            let table = routing::build_neighbor_table(scenario, &params);
            let ids: Vec<_> = table.ids().collect();
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, pi as u64));
            rng.set_stream(si as u64);

            let mut drawn = 0usize;
            let mut attempts = 0usize;
            let max_attempts = n_pairs.saturating_mul(50).max(1000);
            while drawn < n_pairs && attempts < max_attempts {
                attempts += 1;
                let src = ids[rng.random_range(0..ids.len())];
                let dst = ids[rng.random_range(0..ids.len())];
                if src == dst || table.is_neighbor(src, dst) {
                    continue;
                }
                drawn += 1;
                sampled += 1;
                match routing::best_route_hops(src, dst, &table, strategies, routing::DEFAULT_HOP_CAP) {
                    Ok(cmp) => {
                        analyzed += 1;
                        for (k, outcome) in cmp.outcomes.iter().enumerate() {
                            if let Some(h) = outcome.hops() {
                                success_counts[k] += 1;
                                hop_sums[k] += h;
                                if h == cmp.min_hops {
                                    best_counts[k] += 1;
                                }
                            }
                        }
                    }
                    Err(_) => all_failed_total += 1,
                }
            }
        }

        total_pairs += sampled;
        for (k, &strategy) in strategies.iter().enumerate() {
            let best_pct = if analyzed > 0 {
                100.0 * best_counts[k] as f64 / analyzed as f64
            } else {
                0.0
            };
            per_strategy_best[k].push(best_pct);
            rows.push(ComparisonRow {
                power_dbm: power,
                strategy,
                n_pairs: sampled,
                best_pct,
                mean_hops: if success_counts[k] > 0 {
                    Some(hop_sums[k] as f64 / success_counts[k] as f64)
                } else {
                    None
                },
                failure_pct: if sampled > 0 {
                    100.0 * (sampled - success_counts[k]) as f64 / sampled as f64
                } else {
                    0.0
                },
            });
        }
    }

    let summaries = strategies
        .iter()
        .enumerate()
        .map(|(k, &strategy)| {
            let xs = &per_strategy_best[k];
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let std = if xs.len() > 1 {
                (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            StrategySummary {
                strategy,
                mean_best_pct: mean,
                std_best_pct: std,
            }
        })
        .collect();

    ComparisonReport {
        rows,
        summaries,
        all_failed_pairs: all_failed_total,
        total_pairs,
    }
}

/// Histogram of obstructing-vehicle counts: index = number of obstacles,
/// value = number of links.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObstructionHistogram {
    /// Links traversed by the given routes (one count per hop occurrence).
    pub selected: Vec<u64>,
    /// Every above-threshold link in the snapshot.
    pub all_links: Vec<u64>,
}

impl ObstructionHistogram {
    fn bump(hist: &mut Vec<u64>, count: usize) {
        if hist.len() <= count {
            hist.resize(count + 1, 0);
        }
        hist[count] += 1;
    }

    pub fn total_selected(&self) -> u64 {
        self.selected.iter().sum()
    }

    pub fn total_all(&self) -> u64 {
        self.all_links.iter().sum()
    }

    /// Share of zero-obstruction (LOS) links among selected hops.
    pub fn zero_share_selected(&self) -> f64 {
        let total = self.total_selected();
        if total == 0 {
            return 0.0;
        }
        self.selected.first().copied().unwrap_or(0) as f64 / total as f64
    }

    /// Share of zero-obstruction links among all above-threshold links.
    pub fn zero_share_all(&self) -> f64 {
        let total = self.total_all();
        if total == 0 {
            return 0.0;
        }
        self.all_links.first().copied().unwrap_or(0) as f64 / total as f64
    }
}

/// Counts obstructing vehicles on every hop the routes traversed, next to
/// the baseline histogram over every above-threshold link of the snapshot.
pub fn chosen_link_obstructions(
    routes: &[Route],
    scenario: &Scenario,
    params: &ChannelParams,
) -> ObstructionHistogram {
    let mut hist = ObstructionHistogram::default();
    let wavelength = params.wavelength();
    for route in routes {
        for w in route.nodes.windows(2) {
            let a = scenario.vehicle(w[0]).expect("route built on this scenario");
            let b = scenario.vehicle(w[1]).expect("route built on this scenario");
            let profile = geometry::link_profile(a, b, scenario, wavelength);
            ObstructionHistogram::bump(&mut hist.selected, profile.obstacles.len());
        }
    }

    let vehicles = scenario.vehicles();
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
            let profile = geometry::link_profile(tx, rx, scenario, wavelength);
            if profile.distance > max_range {
                continue;
            }
            let budget = channel::budget_from_profile(&profile, params, None);
            if budget.received_power >= params.sensitivity {
                ObstructionHistogram::bump(&mut hist.all_links, profile.obstacles.len());
            }
        }
    }
    hist
}

/// Percentage of the snapshot's vehicles that appear as a relay (interior
/// hop) in any of the routes. Exact value; reports round to the nearest
/// integer.
pub fn relay_usage(routes: &[Route], scenario: &Scenario) -> f64 {
    assert!(!routes.is_empty(), "relay usage needs at least one route");
    let mut relays = std::collections::BTreeSet::new();
    for route in routes {
        relays.extend(route.relays().iter().copied());
    }
    100.0 * relays.len() as f64 / scenario.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Vehicle, VehicleId};
    use crate::scenario::{generate, RoadConfig, DENSITY_MEDIUM};

    fn scenario_of(vehicles: Vec<Vehicle>) -> Scenario {
        Scenario::from_parts(vehicles, RoadConfig::default(), 0)
    }

    fn short(id: u64, x: f64, y: f64) -> Vehicle {
        Vehicle::new(id, x, y, 1.5, VehicleClass::Short)
    }

    #[test]
    fn analytic_prob_anchor_points() {
        assert_eq!(tall_relay_prob_analytic(0.5, 0.03, 0.0), 0.0);
        // Measured reference-highway density: gamma 0.1436, lambda_s 0.0323 /m.
        let p = tall_relay_prob_analytic(0.1436, 0.0323, 50.0);
        assert!((p - 0.207).abs() < 0.001, "got {p}");
        assert!((tall_relay_prob_analytic(1.0, 10.0, 1e6) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_prob_zero_without_tall_vehicles() {
        let config = RoadConfig {
            tall_fraction: 0.0,
            ..RoadConfig::default()
        };
        let scenarios = vec![generate(&config, 1).unwrap()];
        assert_eq!(tall_relay_prob_empirical(&scenarios, 200.0, 50.0), 0.0);
    }

    #[test]
    fn empirical_prob_degenerate_window_counts_any_tall() {
        // x_max = R: the window is the whole forward range [0, R].
        let sc = scenario_of(vec![
            short(0, 0.0, 1.75),
            Vehicle::new(1, 100.0, 1.75, 3.35, VehicleClass::Tall),
            short(2, 400.0, 1.75),
        ]);
        let p = tall_relay_prob_empirical(&[sc], 200.0, 200.0);
        // Observer 0 sees the tall at +100; observers 1 and 2 have
        // truncated windows (road length is small) or no talls.
        assert!(p > 0.0);
    }

    #[test]
    fn empirical_matches_analytic_on_generated_traffic() {
        let config = RoadConfig::with_density(DENSITY_MEDIUM);
        let scenarios: Vec<Scenario> = (0..12).map(|s| generate(&config, s).unwrap()).collect();
        let n: usize = scenarios.iter().map(Scenario::len).sum();
        let road_len: f64 = scenarios.iter().map(|s| s.road().length).sum();
        let realized_lambda = n as f64 / road_len;
        let analytic = tall_relay_prob_analytic(config.tall_fraction, realized_lambda, 50.0);
        let empirical = tall_relay_prob_empirical(&scenarios, 200.0, 50.0);
        assert!(
            (analytic - empirical).abs() < 0.02,
            "analytic {analytic} vs empirical {empirical}"
        );
    }

    #[test]
    fn pdr_curve_single_pair_single_bin() {
        let sc = scenario_of(vec![short(0, 0.0, 1.75), short(1, 100.0, 1.75)]);
        let curve = pdr_vs_distance(
            &[sc],
            &ChannelParams::default(),
            Pairing::CarCar,
            20.0,
            800.0,
            false,
        );
        assert_eq!(curve.bins.len(), 1);
        assert_eq!(curve.bins[0].pdr, 1.0);
        assert_eq!(curve.bins[0].n_samples, 1);
        assert!((curve.bins[0].center - 110.0).abs() < 1e-9);
        assert!(curve.flagged(0), "single sample sits below the floor");
    }

    #[test]
    fn pdr_curve_pairing_filters_classes() {
        let sc = scenario_of(vec![
            short(0, 0.0, 1.75),
            Vehicle::new(1, 100.0, 5.25, 3.35, VehicleClass::Tall),
            short(2, 200.0, 8.75),
        ]);
        let carcar = pdr_vs_distance(
            &[sc.clone()],
            &ChannelParams::default(),
            Pairing::CarCar,
            20.0,
            800.0,
            false,
        );
        let vanx = pdr_vs_distance(
            &[sc],
            &ChannelParams::default(),
            Pairing::VanX,
            20.0,
            800.0,
            false,
        );
        // car-car: only 0-2; van-x: 0-1 and 1-2.
        assert_eq!(carcar.bins.iter().map(|b| b.n_samples).sum::<usize>(), 1);
        assert_eq!(vanx.bins.iter().map(|b| b.n_samples).sum::<usize>(), 2);
    }

    #[test]
    fn effective_range_flat_and_unreachable() {
        let flat = PdrCurve {
            bin_width: 20.0,
            reporting_floor: REPORTING_FLOOR,
            bins: (0..20)
                .map(|i| PdrBin {
                    center: (i as f64 + 0.5) * 20.0,
                    pdr: 1.0,
                    n_samples: 100,
                })
                .collect(),
        };
        assert_eq!(effective_range(&flat, 0.5), Some(390.0));
        assert_eq!(effective_range(&flat, 1.0), Some(390.0));

        let low = PdrCurve {
            bin_width: 20.0,
            reporting_floor: REPORTING_FLOOR,
            bins: vec![PdrBin {
                center: 10.0,
                pdr: 0.4,
                n_samples: 100,
            }],
        };
        assert_eq!(effective_range(&low, 0.9), None);
    }

    #[test]
    fn effective_range_interpolates_and_is_monotone() {
        let curve = PdrCurve {
            bin_width: 100.0,
            reporting_floor: REPORTING_FLOOR,
            bins: vec![
                PdrBin { center: 50.0, pdr: 1.0, n_samples: 100 },
                PdrBin { center: 150.0, pdr: 0.8, n_samples: 100 },
                PdrBin { center: 250.0, pdr: 0.2, n_samples: 100 },
            ],
        };
        // 0.5 crossing between 150 and 250: halfway.
        assert!((effective_range(&curve, 0.5).unwrap() - 200.0).abs() < 1e-9);
        let mut last = f64::INFINITY;
        for target in [0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let r = effective_range(&curve, target).unwrap();
            assert!(r <= last);
            last = r;
        }
    }

    #[test]
    fn compare_single_strategy_best_is_total() {
        let scenarios = vec![generate(&RoadConfig::default(), 3).unwrap()];
        let report = compare_strategies(
            &scenarios,
            &ChannelParams::default(),
            &[10.0],
            &[StrategyKind::FarthestNeighbor],
            60,
            7,
        );
        let row = &report.rows[0];
        // Every successful pair is trivially "best" for a lone strategy.
        assert!(row.best_pct + row.failure_pct >= 99.0);
        assert_eq!(report.summaries.len(), 1);
        assert_eq!(report.summaries[0].std_best_pct, 0.0);
    }

    #[test]
    fn compare_excludes_failures_from_minimum() {
        // TVR with a huge x_max insists on tall relays; here the only route
        // needs short hops, so TVR fails while farthest succeeds. The pair
        // still counts, carried by the successful strategy.
        let vehicles = vec![
            short(0, 0.0, 1.75),
            short(1, 1500.0, 5.25),
            short(2, 3000.0, 1.75),
        ];
        let scenarios = vec![scenario_of(vehicles)];
        let report = compare_strategies(
            &scenarios,
            &ChannelParams::default(),
            &[10.0],
            &[StrategyKind::FarthestNeighbor, StrategyKind::tvr_default()],
            10,
            1,
        );
        let far = report.row(10.0, StrategyKind::FarthestNeighbor).unwrap();
        assert!(far.n_pairs > 0);
        assert_eq!(far.failure_pct, 0.0);
    }

    #[test]
    fn obstruction_histograms_all_los() {
        // The relay sits far off the direct 0-2 path, so all three links
        // are LOS.
        let sc = scenario_of(vec![short(0, 0.0, 1.75), short(1, 200.0, 12.25), short(2, 400.0, 1.75)]);
        let params = ChannelParams::default();
        let table = routing::build_neighbor_table(&sc, &params);
        let route = routing::build_route(
            VehicleId(0),
            VehicleId(2),
            &table,
            StrategyKind::FarthestNeighbor,
            routing::DEFAULT_HOP_CAP,
        )
        .unwrap();
        let hist = chosen_link_obstructions(&[route], &sc, &params);
        assert_eq!(hist.zero_share_selected(), 1.0);
        assert_eq!(hist.zero_share_all(), 1.0);
        assert_eq!(hist.total_all(), 3);
    }

    #[test]
    fn obstruction_histogram_counts_blocked_long_link() {
        // Three-vehicle same-lane chain: the long Tx-Rx link passes the
        // middle vehicle, contributing one count-1 entry to all-links.
        let sc = scenario_of(vec![short(0, 0.0, 1.75), short(1, 150.0, 1.75), short(2, 300.0, 1.75)]);
        let params = ChannelParams::default();
        let hist = chosen_link_obstructions(&[], &sc, &params);
        assert_eq!(hist.total_all(), 3);
        assert_eq!(hist.all_links[0], 2, "two short LOS links");
        assert_eq!(hist.all_links[1], 1, "one blocked long link");
        // Histogram sums match the link counts.
        assert_eq!(hist.all_links.iter().sum::<u64>(), 3);
    }

    #[test]
    fn relay_usage_counts_interior_nodes_only() {
        let sc = scenario_of(vec![short(0, 0.0, 1.75), short(1, 300.0, 1.75)]);
        let params = ChannelParams::default();
        let table = routing::build_neighbor_table(&sc, &params);
        let route = routing::build_route(
            VehicleId(0),
            VehicleId(1),
            &table,
            StrategyKind::FarthestNeighbor,
            routing::DEFAULT_HOP_CAP,
        )
        .unwrap();
        assert_eq!(relay_usage(&[route], &sc), 0.0);
    }

    #[test]
    fn relay_usage_fraction_of_all_vehicles() {
        let mut vehicles: Vec<Vehicle> = (0..100).map(|i| short(i, 10.0 * i as f64, 1.75)).collect();
        vehicles[5] = short(5, 50.0, 1.75);
        let sc = scenario_of(vehicles);
        let route = Route {
            source: VehicleId(0),
            destination: VehicleId(20),
            nodes: vec![VehicleId(0), VehicleId(5), VehicleId(9), VehicleId(20)],
            links: vec![
                crate::channel::LinkBudget {
                    distance: 50.0,
                    free_space_loss: 0.0,
                    obstruction_loss: 0.0,
                    received_power: -50.0,
                    los: true,
                };
                3
            ],
            strategy: StrategyKind::FarthestNeighbor,
        };
        assert_eq!(relay_usage(&[route], &sc), 2.0);
    }
}
