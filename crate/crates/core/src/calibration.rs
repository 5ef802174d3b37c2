//! Calibration of the tall-vehicle rule: empirical distance-difference
//! distributions, normal fits, and the threshold solve.
//!
//! For sampled source-destination pairs whose source sees both a farthest
//! tall and a farthest short forward neighbor, two routes are built, one
//! forced through each candidate and completed with farthest-neighbor
//! forwarding. The pair labels the difference
//! `dist(tx, far_short) - dist(tx, far_tall)` by whichever route ends in
//! strictly fewer hops. The deployed threshold is the average of the
//! tall-best conditional means across transmit powers; the Gaussian
//! tail-balance equation is exposed separately.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::channel::ChannelParams;
use crate::routing::{self, StrategyKind, DEFAULT_HOP_CAP};
use crate::scenario::Scenario;
use crate::stats::{bisect, normal_cdf, q_function};

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("samples are constant; a normal fit needs positive spread")]
    ZeroVariance,
    #[error("no sign change of the tail-balance equation on [{lo}, {hi}] (g(lo)={g_lo}, g(hi)={g_hi})")]
    NoRoot { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("no tall-best samples at any requested power")]
    NoTallSamples,
}

/// Which forced first hop produced the strictly shorter route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    TallBest,
    ShortBest,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::TallBest => "tall_best",
            Label::ShortBest => "short_best",
        }
    }
}

/// One labeled observation of `dist(tx, far_short) - dist(tx, far_tall)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledDifferenceSample {
    /// Distance difference (m).
    pub value: f64,
    pub label: Label,
    /// Transmit power the sample was collected at (dBm).
    pub power_dbm: f64,
}

/// Mean / standard deviation of a fitted normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub n_samples: usize,
}

/// Collects labeled distance-difference samples over `n_pairs`
/// source-destination pairs per scenario.
///
/// Pairs are drawn uniformly over ordered non-neighbor pairs; pairs whose
/// source lacks a tall or a short forward neighbor are skipped, as are ties
/// and pairs where both forced routes fail. Deterministic per seed.
pub fn collect_samples(
    scenarios: &[Scenario],
    params: &ChannelParams,
    n_pairs: usize,
    seed: u64,
) -> Vec<LabeledDifferenceSample> {
    let mut samples = Vec::new();
    for (si, scenario) in scenarios.iter().enumerate() {
        if scenario.len() < 2 {
            continue;
        }
        let table = routing::build_neighbor_table(scenario, params);
        let ids: Vec<_> = table.ids().collect();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
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

            let dest_pos = table.position(dst);
            let mut far_tall: Option<(f64, crate::geometry::VehicleId)> = None;
            let mut far_short: Option<(f64, crate::geometry::VehicleId)> = None;
            for e in routing::forward_set(&table, src, dst) {
                let d = (table.position(e.id) - dest_pos).norm();
                let slot = match e.class {
                    crate::geometry::VehicleClass::Tall => &mut far_tall,
                    crate::geometry::VehicleClass::Short => &mut far_short,
                };
                let better = match slot {
                    None => true,
                    Some((best, id)) => d < *best || (d == *best && e.id < *id),
                };
                if better {
                    *slot = Some((d, e.id));
                }
            }
            let (Some((_, tall_id)), Some((_, short_id))) = (far_tall, far_short) else {
                continue;
            };

            let via = |first| {
                routing::build_route_via(src, first, dst, &table, StrategyKind::FarthestNeighbor, DEFAULT_HOP_CAP)
            };
            let tall_hops = via(tall_id).ok().map(|r| r.hop_count());
            let short_hops = via(short_id).ok().map(|r| r.hop_count());
            let label = match (tall_hops, short_hops) {
                (Some(t), Some(s)) if t < s => Label::TallBest,
                (Some(t), Some(s)) if s < t => Label::ShortBest,
                (Some(_), None) => Label::TallBest,
                (None, Some(_)) => Label::ShortBest,
                _ => continue, // tie or double failure
            };
            let value = table.distance(src, short_id) - table.distance(src, tall_id);
            samples.push(LabeledDifferenceSample {
                value,
                label,
                power_dbm: params.tx_power,
            });
        }
    }
    samples
}

/// Sample mean and unbiased standard deviation.
pub fn fit_normal(values: &[f64]) -> Result<NormalFit, CalibrationError> {
    if values.len() < 2 {
        return Err(CalibrationError::InsufficientSamples {
            needed: 2,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0);
    let sigma = var.sqrt();
    if !(sigma > 0.0) {
        return Err(CalibrationError::ZeroVariance);
    }
    Ok(NormalFit {
        mu,
        sigma,
        n_samples: values.len(),
    })
}

/// Tail-balance residual `g(x) = Phi((x - mu_s)/sigma_s) - Q((x - mu_t)/sigma_t)`;
/// the threshold solve finds its root, where the tall-best CDF equals the
/// short-best complementary CDF.
pub fn tail_balance(fit_t: &NormalFit, fit_s: &NormalFit, x: f64) -> f64 {
    normal_cdf((x - fit_s.mu) / fit_s.sigma) - q_function((x - fit_t.mu) / fit_t.sigma)
}

/// Solves the tail-balance equation
/// `1 - Q((x - mu_s)/sigma_s) = Q((x - mu_t)/sigma_t)` by bisection.
///
/// The bracket spans both means plus ten standard deviations; the returned
/// root satisfies the equation within 1e-9.
pub fn solve_xmax(fit_t: &NormalFit, fit_s: &NormalFit) -> Result<f64, CalibrationError> {
    let sigma_max = fit_t.sigma.max(fit_s.sigma);
    let lo = fit_t.mu.min(fit_s.mu) - 10.0 * sigma_max;
    let hi = fit_t.mu.max(fit_s.mu) + 10.0 * sigma_max;
    let g = |x: f64| tail_balance(fit_t, fit_s, x);
    let root = bisect(lo, hi, g, 1e-12, 500).ok_or(CalibrationError::NoRoot {
        lo,
        hi,
        g_lo: g(lo),
        g_hi: g(hi),
    })?;
    debug_assert!(g(root).abs() < 1e-9);
    Ok(root)
}

/// Per-power calibration outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCalibration {
    pub power_dbm: f64,
    pub n_tall: usize,
    pub n_short: usize,
    /// Conditional mean of tall-best differences, absent if no sample.
    pub tall_mean: Option<f64>,
    pub short_mean: Option<f64>,
    /// Normal fits, when at least two samples exist per label.
    pub tall_fit: Option<NormalFit>,
    pub short_fit: Option<NormalFit>,
}

impl PowerCalibration {
    /// Aggregates one power's labeled samples.
    pub fn from_samples(power_dbm: f64, samples: &[LabeledDifferenceSample]) -> Self {
        let tall: Vec<f64> = samples
            .iter()
            .filter(|s| s.label == Label::TallBest)
            .map(|s| s.value)
            .collect();
        let short: Vec<f64> = samples
            .iter()
            .filter(|s| s.label == Label::ShortBest)
            .map(|s| s.value)
            .collect();
        let mean = |v: &[f64]| {
            if v.is_empty() {
                None
            } else {
                Some(v.iter().sum::<f64>() / v.len() as f64)
            }
        };
        PowerCalibration {
            power_dbm,
            n_tall: tall.len(),
            n_short: short.len(),
            tall_mean: mean(&tall),
            short_mean: mean(&short),
            tall_fit: fit_normal(&tall).ok(),
            short_fit: fit_normal(&short).ok(),
        }
    }

    /// Root of the tail-balance equation for this power's fits, when both
    /// conditional distributions could be fitted.
    pub fn balance_root(&self) -> Option<f64> {
        match (&self.tall_fit, &self.short_fit) {
            (Some(t), Some(s)) => solve_xmax(t, s).ok(),
            _ => None,
        }
    }
}

/// Full calibration report over a power sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub per_power: Vec<PowerCalibration>,
    /// Powers that produced no tall-best sample and were skipped.
    pub skipped_powers: Vec<f64>,
    /// Deployed threshold: unweighted average of the tall-best conditional
    /// means over the non-skipped powers (m).
    pub x_max: f64,
}

impl CalibrationReport {
    /// Assembles the report from per-power aggregates: the threshold is the
    /// unweighted average of tall-best means; powers without tall-best
    /// samples are skipped and reported.
    pub fn from_power_calibrations(
        per_power: Vec<PowerCalibration>,
    ) -> Result<Self, CalibrationError> {
        let mut skipped = Vec::new();
        let mut sum = 0.0;
        let mut kept = 0usize;
        for p in &per_power {
            match p.tall_mean {
                Some(m) => {
                    sum += m;
                    kept += 1;
                }
                None => skipped.push(p.power_dbm),
            }
        }
        if kept == 0 {
            return Err(CalibrationError::NoTallSamples);
        }
        Ok(CalibrationReport {
            per_power,
            skipped_powers: skipped,
            x_max: sum / kept as f64,
        })
    }
}

/// Deterministic per-power seed for the calibration sweep.
pub fn power_seed(seed: u64, power_index: usize) -> u64 {
    crate::stats::derive_seed(seed, power_index as u64)
}

/// Averages the tall-best conditional mean across transmit powers.
///
/// Every power draws a fresh pair sample (deterministically derived from
/// `seed`); powers with zero tall-best samples are skipped and reported.
pub fn average_xmax(
    scenarios: &[Scenario],
    powers: &[f64],
    base: &ChannelParams,
    n_pairs: usize,
    seed: u64,
) -> Result<CalibrationReport, CalibrationError> {
    assert!(!powers.is_empty(), "power sweep must be non-empty");
    let per_power = powers
        .iter()
        .enumerate()
        .map(|(pi, &power)| {
            let params = ChannelParams {
                tx_power: power,
                ..base.clone()
            };
            let samples = collect_samples(scenarios, &params, n_pairs, power_seed(seed, pi));
            PowerCalibration::from_samples(power, &samples)
        })
        .collect();
    CalibrationReport::from_power_calibrations(per_power)
}

/// Serializes samples as CSV (`power_dbm,value_m,label`).
pub fn samples_to_csv(samples: &[LabeledDifferenceSample]) -> String {
    let mut out = String::from("power_dbm,value_m,label\n");
    for s in samples {
        out.push_str(&format!("{},{},{}\n", s.power_dbm, s.value, s.label.as_str()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate, RoadConfig};

    #[test]
    fn fit_normal_two_points() {
        let fit = fit_normal(&[-1.0, 1.0]).unwrap();
        assert_eq!(fit.mu, 0.0);
        assert!((fit.sigma - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(fit.n_samples, 2);
    }

    #[test]
    fn fit_normal_rejects_degenerate_input() {
        assert_eq!(
            fit_normal(&[3.0]),
            Err(CalibrationError::InsufficientSamples { needed: 2, got: 1 })
        );
        assert_eq!(fit_normal(&[2.0, 2.0, 2.0]), Err(CalibrationError::ZeroVariance));
    }

    #[test]
    fn fit_normal_recovers_distribution_parameters() {
        use rand::SeedableRng;
        use rand_distr::Distribution;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let dist = rand_distr::Normal::new(50.0, 20.0).unwrap();
        let values: Vec<f64> = (0..100_000).map(|_| dist.sample(&mut rng)).collect();
        let fit = fit_normal(&values).unwrap();
        assert!((fit.mu - 50.0).abs() < 0.5, "mu {}", fit.mu);
        assert!((fit.sigma - 20.0).abs() < 0.5, "sigma {}", fit.sigma);
    }

    #[test]
    fn solve_xmax_symmetric_fits_root_at_common_mean() {
        let fit = NormalFit { mu: 37.0, sigma: 12.0, n_samples: 100 };
        let root = solve_xmax(&fit, &fit).unwrap();
        assert!((root - 37.0).abs() < 1e-9, "root {root}");
    }

    fn grid_argmin(fit_t: &NormalFit, fit_s: &NormalFit) -> (f64, f64) {
        // Brute-force root isolation: densely scan |g| over the bracket.
        let sigma_max = fit_t.sigma.max(fit_s.sigma);
        let lo = fit_t.mu.min(fit_s.mu) - 10.0 * sigma_max;
        let hi = fit_t.mu.max(fit_s.mu) + 10.0 * sigma_max;
        let n = 10_000;
        let step = (hi - lo) / n as f64;
        let mut best = (f64::INFINITY, lo);
        for i in 0..=n {
            let x = lo + step * i as f64;
            let g = tail_balance(fit_t, fit_s, x).abs();
            if g < best.0 {
                best = (g, x);
            }
        }
        (best.1, step)
    }

    #[test]
    fn solve_xmax_agrees_with_grid_scan() {
        let cases = [
            // Distance-difference fits of either sign convention.
            (NormalFit { mu: -50.0, sigma: 30.0, n_samples: 10 }, NormalFit { mu: -210.0, sigma: 80.0, n_samples: 10 }),
            (NormalFit { mu: 50.0, sigma: 30.0, n_samples: 10 }, NormalFit { mu: 210.0, sigma: 80.0, n_samples: 10 }),
            // Near-degenerate spread on the tall side.
            (NormalFit { mu: -40.0, sigma: 1e-3, n_samples: 10 }, NormalFit { mu: 60.0, sigma: 25.0, n_samples: 10 }),
        ];
        for (fit_t, fit_s) in cases {
            let root = solve_xmax(&fit_t, &fit_s).unwrap();
            let (grid_root, step) = grid_argmin(&fit_t, &fit_s);
            assert!(
                (root - grid_root).abs() <= step,
                "bisection {root} vs grid {grid_root} (step {step})"
            );
            assert!(tail_balance(&fit_t, &fit_s, root).abs() < 1e-9);
            // Eq form: 1 - Q((x-mu_s)/sigma_s) = Q((x-mu_t)/sigma_t).
            let lhs = 1.0 - q_function((root - fit_s.mu) / fit_s.sigma);
            let rhs = q_function((root - fit_t.mu) / fit_t.sigma);
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn solve_xmax_sign_symmetry() {
        // Swapping roles and negating the fits negates the root.
        let fit_t = NormalFit { mu: 42.0, sigma: 18.0, n_samples: 10 };
        let fit_s = NormalFit { mu: 180.0, sigma: 55.0, n_samples: 10 };
        let root = solve_xmax(&fit_t, &fit_s).unwrap();
        let neg_t = NormalFit { mu: -fit_s.mu, sigma: fit_s.sigma, n_samples: 10 };
        let neg_s = NormalFit { mu: -fit_t.mu, sigma: fit_t.sigma, n_samples: 10 };
        let mirrored = solve_xmax(&neg_t, &neg_s).unwrap();
        assert!((root + mirrored).abs() < 1e-6, "{root} vs {mirrored}");
    }

    #[test]
    fn collect_samples_empty_without_tall_vehicles() {
        let config = RoadConfig {
            tall_fraction: 0.0,
            ..RoadConfig::default()
        };
        let scenarios = vec![generate(&config, 1).unwrap()];
        let samples = collect_samples(&scenarios, &ChannelParams::default(), 50, 3);
        assert!(samples.is_empty());
    }

    #[test]
    fn collect_samples_is_deterministic() {
        let scenarios = vec![generate(&RoadConfig::default(), 2).unwrap()];
        let a = collect_samples(&scenarios, &ChannelParams::default(), 40, 9);
        let b = collect_samples(&scenarios, &ChannelParams::default(), 40, 9);
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn fewer_hops_through_the_tall_candidate_labels_tall_best() {
        use crate::geometry::{Vehicle, VehicleClass};
        use crate::scenario::Scenario;
        // src reaches S (short) and T (tall); the link S -> D is blocked by
        // B, so the short-first route detours (3 hops) while the tall-first
        // route goes T -> D directly (2 hops).
        let src = Vehicle::new(0, 0.0, 1.75, 1.5, VehicleClass::Short);
        let s = Vehicle::new(1, 300.0, 5.25, 1.5, VehicleClass::Short);
        let t = Vehicle::new(2, 320.0, 12.25, 3.35, VehicleClass::Tall);
        let b = Vehicle::new(3, 1100.0, 5.25, 1.5, VehicleClass::Short);
        let d = Vehicle::new(4, 1900.0, 8.75, 1.5, VehicleClass::Short);
        let scenario = Scenario::from_parts(vec![src, s, t, b, d], RoadConfig::default(), 0);
        let params = ChannelParams::default();

        let table = crate::routing::build_neighbor_table(&scenario, &params);
        use crate::geometry::VehicleId;
        let tall_first = crate::routing::build_route_via(
            VehicleId(0), VehicleId(2), VehicleId(4), &table,
            crate::routing::StrategyKind::FarthestNeighbor, crate::routing::DEFAULT_HOP_CAP,
        )
        .unwrap();
        let short_first = crate::routing::build_route_via(
            VehicleId(0), VehicleId(1), VehicleId(4), &table,
            crate::routing::StrategyKind::FarthestNeighbor, crate::routing::DEFAULT_HOP_CAP,
        )
        .unwrap();
        assert_eq!(tall_first.hop_count(), 2);
        assert_eq!(short_first.hop_count(), 3);

        let samples = collect_samples(&[scenario], &params, 200, 1);
        let expected_value = 300.0204f64 - 320.1722;
        let sample = samples
            .iter()
            .find(|smp| (smp.value - expected_value).abs() < 0.01)
            .expect("the src -> d pair must be sampled");
        assert_eq!(sample.label, Label::TallBest);
    }

    #[test]
    fn average_xmax_handles_trivial_sweeps() {
        // gamma = 0 leaves every power without tall-best samples.
        let config = RoadConfig {
            tall_fraction: 0.0,
            ..RoadConfig::default()
        };
        let scenarios = vec![generate(&config, 1).unwrap()];
        let err = average_xmax(&scenarios, &[10.0], &ChannelParams::default(), 30, 1).unwrap_err();
        assert_eq!(err, CalibrationError::NoTallSamples);
    }

    #[test]
    fn average_xmax_averages_per_power_means() {
        let scenarios = vec![
            generate(&RoadConfig::default(), 21).unwrap(),
            generate(&RoadConfig::default(), 22).unwrap(),
        ];
        let report = average_xmax(&scenarios, &[8.0, 12.0], &ChannelParams::default(), 150, 4).unwrap();
        let means: Vec<f64> = report.per_power.iter().filter_map(|p| p.tall_mean).collect();
        assert_eq!(means.len(), 2);
        let expected = means.iter().sum::<f64>() / means.len() as f64;
        assert!((report.x_max - expected).abs() < 1e-12);
        assert!(report.skipped_powers.is_empty());
    }
}
