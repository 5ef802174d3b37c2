//! Subcommand implementations: each resolves its configuration, writes the
//! resolved dump plus its report CSVs into the output directory, and prints
//! a short summary.

use std::path::Path;

use anyhow::Context;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use tvr_core::analysis::{self, Pairing};
use tvr_core::calibration::{self, CalibrationReport, PowerCalibration};
use tvr_core::channel::ChannelParams;
use tvr_core::geometry::{self, VehicleId};
use tvr_core::routing::{self, DEFAULT_HOP_CAP};
use tvr_core::scenario::{self, Scenario};
use tvr_core::stats::derive_seed;

use crate::config::ExperimentConfig;
use crate::CliError;

fn prepare_out_dir(config: &ExperimentConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&config.out)
        .with_context(|| format!("cannot create output directory {}", config.out.display()))?;
    write_out(&config.out, "config_used.ini", &config.dump())?;
    Ok(())
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn channel_params(config: &ExperimentConfig) -> ChannelParams {
    ChannelParams {
        shadowing_sigma: config.sigma,
        ..ChannelParams::default()
    }
}

fn make_snapshots(config: &ExperimentConfig) -> Result<Vec<Scenario>, CliError> {
    let road = config.road_config();
    (0..config.snapshots as u64)
        .map(|i| {
            scenario::generate(&road, config.seed.wrapping_add(i))
                .map_err(|e| CliError::usage(format!("invalid road configuration: {e}")))
        })
        .collect()
}

/// Uniform ordered non-neighbor pairs, deterministic per seed.
fn sample_pairs(
    table: &routing::NeighborTable,
    n_pairs: usize,
    seed: u64,
) -> Vec<(VehicleId, VehicleId)> {
    let ids: Vec<VehicleId> = table.ids().collect();
    let mut pairs = Vec::with_capacity(n_pairs);
    if ids.len() < 2 {
        return pairs;
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut attempts = 0usize;
    while pairs.len() < n_pairs && attempts < n_pairs.saturating_mul(50).max(1000) {
        attempts += 1;
        let a = ids[rng.random_range(0..ids.len())];
        let b = ids[rng.random_range(0..ids.len())];
        if a != b && !table.is_neighbor(a, b) {
            pairs.push((a, b));
        }
    }
    pairs
}

pub fn cmd_generate(config: &ExperimentConfig) -> Result<(), CliError> {
    prepare_out_dir(config)?;
    let road = config.road_config();
    let sc = scenario::generate(&road, config.seed)
        .map_err(|e| CliError::usage(format!("invalid road configuration: {e}")))?;
    write_out(&config.out, "scenario.csv", &sc.to_csv_string())?;
    println!(
        "generated {} vehicles ({} tall) on {} m x {} lanes -> {}",
        sc.len(),
        sc.vehicles()
            .iter()
            .filter(|v| v.class == geometry::VehicleClass::Tall)
            .count(),
        road.length,
        road.lanes,
        config.out.join("scenario.csv").display()
    );
    Ok(())
}

pub fn cmd_calibrate(config: &ExperimentConfig) -> Result<(), CliError> {
    prepare_out_dir(config)?;
    let scenarios = make_snapshots(config)?;
    let base = channel_params(config);

    let mut all_samples = Vec::new();
    let mut per_power = Vec::with_capacity(config.powers.len());
    for (pi, &power) in config.powers.iter().enumerate() {
        let params = ChannelParams {
            tx_power: power,
            ..base.clone()
        };
        let samples = calibration::collect_samples(
            &scenarios,
            &params,
            config.pairs,
            calibration::power_seed(config.seed, pi),
        );
        per_power.push(PowerCalibration::from_samples(power, &samples));
        all_samples.extend(samples);
    }
    write_out(&config.out, "samples.csv", &calibration::samples_to_csv(&all_samples))?;

    let mut csv = String::from(
        "power_dbm,n_tall,n_short,tall_mean_m,tall_std_m,short_mean_m,short_std_m,balance_root_m\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in &per_power {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.power_dbm,
            p.n_tall,
            p.n_short,
            opt(p.tall_mean),
            opt(p.tall_fit.map(|f| f.sigma)),
            opt(p.short_mean),
            opt(p.short_fit.map(|f| f.sigma)),
            opt(p.balance_root())
        ));
        println!(
            "power {:>5} dBm: E[t|tall best] = {} m over {} samples",
            p.power_dbm,
            p.tall_mean.map(|m| format!("{m:.2}")).unwrap_or_else(|| "n/a".into()),
            p.n_tall
        );
    }
    write_out(&config.out, "calibration.csv", &csv)?;

    let report = CalibrationReport::from_power_calibrations(per_power)
        .map_err(|e| CliError::runtime(anyhow::anyhow!("calibration failed: {e}")))?;
    write_out(&config.out, "xmax.csv", &format!("x_max_m\n{}\n", report.x_max))?;
    if !report.skipped_powers.is_empty() {
        println!("skipped powers without tall-best samples: {:?}", report.skipped_powers);
    }
    println!("calibrated x_max = {:.2} m", report.x_max);
    Ok(())
}

pub fn cmd_evaluate(config: &ExperimentConfig) -> Result<(), CliError> {
    prepare_out_dir(config)?;
    let scenarios = make_snapshots(config)?;
    let base = channel_params(config);

    let report = analysis::compare_strategies(
        &scenarios,
        &base,
        &config.powers,
        &config.strategies,
        config.pairs,
        config.seed,
    );

    let mut csv = String::from("density,power_dbm,strategy,n_pairs,best_pct,mean_hops,failure_pct\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            config.density,
            row.power_dbm,
            row.strategy.label(),
            row.n_pairs,
            row.best_pct,
            row.mean_hops.map(|h| h.to_string()).unwrap_or_default(),
            row.failure_pct
        ));
    }
    write_out(&config.out, "comparison.csv", &csv)?;

    let mut csv = String::from("density,strategy,mean_best_pct,std_best_pct\n");
    for s in &report.summaries {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            config.density,
            s.strategy.label(),
            s.mean_best_pct,
            s.std_best_pct
        ));
        println!(
            "{:>9}: best-route {:.2}% (std {:.2} over {} powers)",
            s.strategy.label(),
            s.mean_best_pct,
            s.std_best_pct,
            config.powers.len()
        );
    }
    write_out(&config.out, "comparison_summary.csv", &csv)?;
    if report.all_failed_pairs > 0 {
        println!(
            "pairs with no successful strategy: {} of {}",
            report.all_failed_pairs, report.total_pairs
        );
    }

    // Obstruction histograms and relay usage at the sweep power nearest
    // 10 dBm, on routes rebuilt over the identical pair sets.
    let hist_power = config
        .powers
        .iter()
        .copied()
        .min_by(|a, b| (a - 10.0).abs().partial_cmp(&(b - 10.0).abs()).unwrap())
        .expect("non-empty sweep");
    let params = ChannelParams {
        tx_power: hist_power,
        ..base
    };
    let mut obstruction_csv = String::from("density,power_dbm,link_set,n_obstacles,count\n");
    let mut usage_csv = String::from("density,power_dbm,strategy,usage_pct,usage_pct_rounded\n");
    let mut pooled_selected: Vec<Vec<u64>> = vec![Vec::new(); config.strategies.len()];
    let mut pooled_all: Vec<u64> = Vec::new();
    let mut usage = vec![0.0f64; config.strategies.len()];
    let add = |into: &mut Vec<u64>, from: &[u64]| {
        if into.len() < from.len() {
            into.resize(from.len(), 0);
        }
        for (i, &c) in from.iter().enumerate() {
            into[i] += c;
        }
    };
    for (si, sc) in scenarios.iter().enumerate() {
        let table = routing::build_neighbor_table(sc, &params);
        let pairs = sample_pairs(&table, config.pairs, derive_seed(config.seed, 0x0b5 + si as u64));
        for (k, &strategy) in config.strategies.iter().enumerate() {
            let routes: Vec<_> = pairs
                .iter()
                .filter_map(|&(a, b)| routing::build_route(a, b, &table, strategy, DEFAULT_HOP_CAP).ok())
                .collect();
            let hist = analysis::chosen_link_obstructions(&routes, sc, &params);
            add(&mut pooled_selected[k], &hist.selected);
            if k == 0 {
                add(&mut pooled_all, &hist.all_links);
            }
            if !routes.is_empty() {
                usage[k] += analysis::relay_usage(&routes, sc) / scenarios.len() as f64;
            }
        }
    }
    for (n, count) in pooled_all.iter().enumerate() {
        obstruction_csv.push_str(&format!("{},{},all,{},{}\n", config.density, hist_power, n, count));
    }
    for (k, strategy) in config.strategies.iter().enumerate() {
        for (n, count) in pooled_selected[k].iter().enumerate() {
            obstruction_csv.push_str(&format!(
                "{},{},selected_{},{},{}\n",
                config.density,
                hist_power,
                strategy.label(),
                n,
                count
            ));
        }
        usage_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            config.density,
            hist_power,
            strategy.label(),
            usage[k],
            usage[k].round() as i64
        ));
    }
    write_out(&config.out, "obstructions.csv", &obstruction_csv)?;
    write_out(&config.out, "relay_usage.csv", &usage_csv)?;
    println!(
        "wrote comparison, obstruction and relay-usage reports to {}",
        config.out.display()
    );
    Ok(())
}

pub fn cmd_analyze(config: &ExperimentConfig) -> Result<(), CliError> {
    prepare_out_dir(config)?;
    let scenarios = make_snapshots(config)?;
    let base = channel_params(config);

    // Per-vehicle LOS ratios within 750 m.
    let mut csv = String::from("snapshot_seed,vehicle_id,class,los_ratio\n");
    for sc in &scenarios {
        for (id, ratio) in geometry::per_vehicle_los_ratio(sc, 750.0, base.wavelength()) {
            let class = sc.vehicle(id).expect("ratio keys are scenario vehicles").class;
            csv.push_str(&format!("{},{},{},{}\n", sc.seed(), id, class.label(), ratio));
        }
    }
    write_out(&config.out, "los_ratio.csv", &csv)?;

    // Tall-relay availability over an x_max grid: analytic at the nominal
    // and at the measured linear density, next to the Monte-Carlo value.
    let road = config.road_config();
    let n: usize = scenarios.iter().map(Scenario::len).sum();
    let measured_lambda = n as f64 / (road.length * scenarios.len() as f64);
    let r = 250.0;
    let mut csv = String::from("x_max_m,analytic_nominal,analytic_measured,empirical\n");
    let mut grid_x = 0.0;
    while grid_x <= r {
        let nominal = analysis::tall_relay_prob_analytic(road.tall_fraction, road.lambda_s(), grid_x);
        let measured = analysis::tall_relay_prob_analytic(road.tall_fraction, measured_lambda, grid_x);
        let empirical = analysis::tall_relay_prob_empirical(&scenarios, r, grid_x);
        csv.push_str(&format!("{grid_x},{nominal},{measured},{empirical}\n"));
        grid_x += 10.0;
    }
    write_out(&config.out, "pt_curve.csv", &csv)?;

    // PDR-vs-distance curves and effective ranges per pairing and scope.
    let mut pdr_csv = String::from("pairing,scope,bin_center_m,pdr,n_samples,flagged\n");
    let mut range_csv = String::from("pairing,scope,target_pdr,range_m\n");
    for pairing in [Pairing::CarCar, Pairing::VanX] {
        for (scope, nlos_only) in [("overall", false), ("nlos", true)] {
            let curve = analysis::pdr_vs_distance(&scenarios, &base, pairing, 20.0, 800.0, nlos_only);
            for (i, bin) in curve.bins.iter().enumerate() {
                pdr_csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    pairing.label(),
                    scope,
                    bin.center,
                    bin.pdr,
                    bin.n_samples,
                    curve.flagged(i)
                ));
            }
            for target10 in (50..=95).step_by(5) {
                let target = f64::from(target10) / 100.0;
                let range = analysis::effective_range(&curve, target);
                range_csv.push_str(&format!(
                    "{},{},{},{}\n",
                    pairing.label(),
                    scope,
                    target,
                    range.map(|r| r.to_string()).unwrap_or_default()
                ));
            }
        }
    }
    write_out(&config.out, "pdr_curve.csv", &pdr_csv)?;
    write_out(&config.out, "effective_range.csv", &range_csv)?;
    println!(
        "wrote LOS-ratio, availability, PDR and effective-range reports to {}",
        config.out.display()
    );
    Ok(())
}
