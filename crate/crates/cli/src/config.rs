//! Experiment configuration: flat key-value config files, flag overrides
//! and the resolved-config dump that makes every run reproducible.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use tvr_core::routing::{StrategyKind, DEFAULT_X_MAX};
use tvr_core::scenario::{RoadConfig, DENSITY_HIGH, DENSITY_LOW, DENSITY_MEDIUM};

use crate::CliError;

/// Density preset names from the evaluation setup.
pub fn parse_density(raw: &str) -> Result<f64, CliError> {
    match raw {
        "low" => Ok(DENSITY_LOW),
        "medium" => Ok(DENSITY_MEDIUM),
        "high" => Ok(DENSITY_HIGH),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|d| *d > 0.0)
            .ok_or_else(|| CliError::usage(format!("invalid density `{other}` (want low|medium|high or a positive number)"))),
    }
}

pub fn parse_strategies(raw: &str, x_max: f64) -> Result<Vec<StrategyKind>, CliError> {
    let mut out = Vec::new();
    for part in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let strategy = match part {
            "farthest" => StrategyKind::FarthestNeighbor,
            "most_new" => StrategyKind::MostNewNeighbors,
            "tvr" => StrategyKind::Tvr { x_max },
            other => {
                return Err(CliError::usage(format!(
                    "unknown strategy `{other}` (want farthest|most_new|tvr)"
                )))
            }
        };
        if !out.iter().any(|s: &StrategyKind| s.label() == strategy.label()) {
            out.push(strategy);
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("strategy list is empty"));
    }
    Ok(out)
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub density: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub powers: Vec<f64>,
    pub pairs: usize,
    pub x_max: f64,
    pub sigma: f64,
    pub snapshots: usize,
    pub strategies: Vec<StrategyKind>,
    pub tall_fraction: f64,
    pub road_length: f64,
    pub lanes: u32,
}

impl ExperimentConfig {
    pub fn road_config(&self) -> RoadConfig {
        RoadConfig {
            density: self.density,
            tall_fraction: self.tall_fraction,
            length: self.road_length,
            lanes: self.lanes,
            ..RoadConfig::default()
        }
    }

    /// Serializes the resolved configuration; reloading the dump with no
    /// extra flags reproduces the identical run.
    pub fn dump(&self) -> String {
        let powers = self
            .powers
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let strategies = self
            .strategies
            .iter()
            .map(|s| s.label())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "# resolved experiment configuration\n\
             density = {}\n\
             seed = {}\n\
             out = {}\n\
             powers = {}\n\
             pairs = {}\n\
             xmax = {}\n\
             sigma = {}\n\
             snapshots = {}\n\
             strategies = {}\n\
             tall_fraction = {}\n\
             road_length = {}\n\
             lanes = {}\n",
            self.density,
            self.seed,
            self.out.display(),
            powers,
            self.pairs,
            self.x_max,
            self.sigma,
            self.snapshots,
            strategies,
            self.tall_fraction,
            self.road_length,
            self.lanes
        )
    }
}

/// Parses a flat `key = value` config file; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "{}:{}: expected `key = value`, got `{raw}`",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    const KNOWN: [&str; 12] = [
        "density", "seed", "out", "powers", "pairs", "xmax", "sigma", "snapshots",
        "strategies", "tall_fraction", "road_length", "lanes",
    ];
    for key in map.keys() {
        if !KNOWN.contains(&key.as_str()) {
            return Err(CliError::usage(format!(
                "{}: unknown config key `{key}`",
                path.display()
            )));
        }
    }
    Ok(map)
}

/// Per-command defaults for the values not pinned by flags or config file.
pub struct CommandDefaults {
    pub powers: Vec<f64>,
    pub pairs: usize,
    pub snapshots: usize,
    pub sigma: f64,
}

pub fn resolve(
    args: &crate::CommonArgs,
    defaults: CommandDefaults,
) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let file_get = |key: &str| file.get(key).map(String::as_str);

    let parse_item = |key: &str, raw: &str| -> Result<f64, CliError> {
        raw.parse::<f64>()
            .map_err(|e| CliError::usage(format!("config {key} = `{raw}`: {e}")))
    };

    let seed = match (args.seed, file_get("seed")) {
        (Some(s), _) => s,
        (None, Some(raw)) => raw
            .parse::<u64>()
            .map_err(|e| CliError::usage(format!("config seed = `{raw}`: {e}")))?,
        (None, None) => return Err(CliError::usage("missing required --seed (or `seed` in the config file)")),
    };

    let density = match (&args.density, file_get("density")) {
        (Some(raw), _) => parse_density(raw)?,
        (None, Some(raw)) => parse_density(raw)?,
        (None, None) => DENSITY_MEDIUM,
    };

    let powers = match (&args.power, file_get("powers")) {
        (flags, _) if !flags.is_empty() => flags.clone(),
        (_, Some(raw)) => raw
            .split(',')
            .map(|p| parse_item("powers", p.trim()))
            .collect::<Result<Vec<_>, _>>()?,
        _ => defaults.powers,
    };
    if powers.is_empty() {
        return Err(CliError::usage("power sweep is empty"));
    }

    let pairs = match (args.pairs, file_get("pairs")) {
        (Some(p), _) => p,
        (None, Some(raw)) => raw
            .parse::<usize>()
            .map_err(|e| CliError::usage(format!("config pairs = `{raw}`: {e}")))?,
        (None, None) => defaults.pairs,
    };

    let x_max = match (args.xmax, file_get("xmax")) {
        (Some(x), _) => x,
        (None, Some(raw)) => parse_item("xmax", raw)?,
        (None, None) => DEFAULT_X_MAX,
    };
    if x_max < 0.0 {
        return Err(CliError::usage(format!("xmax must be non-negative, got {x_max}")));
    }

    let sigma = match (args.sigma, file_get("sigma")) {
        (Some(s), _) => s,
        (None, Some(raw)) => parse_item("sigma", raw)?,
        (None, None) => defaults.sigma,
    };
    if sigma < 0.0 {
        return Err(CliError::usage(format!("sigma must be non-negative, got {sigma}")));
    }

    let snapshots = match (args.snapshots, file_get("snapshots")) {
        (Some(n), _) => n,
        (None, Some(raw)) => raw
            .parse::<usize>()
            .map_err(|e| CliError::usage(format!("config snapshots = `{raw}`: {e}")))?,
        (None, None) => defaults.snapshots,
    };
    if snapshots == 0 {
        return Err(CliError::usage("need at least one snapshot"));
    }

    let strategies = match (&args.strategies, file_get("strategies")) {
        (Some(raw), _) => parse_strategies(raw, x_max)?,
        (None, Some(raw)) => parse_strategies(raw, x_max)?,
        (None, None) => parse_strategies("farthest,most_new,tvr", x_max)?,
    };

    let tall_fraction = match file_get("tall_fraction") {
        Some(raw) => {
            let g = parse_item("tall_fraction", raw)?;
            if !(0.0..=1.0).contains(&g) {
                return Err(CliError::usage(format!("tall_fraction must be in [0, 1], got {g}")));
            }
            g
        }
        None => RoadConfig::default().tall_fraction,
    };
    let road_length = match file_get("road_length") {
        Some(raw) => parse_item("road_length", raw)?,
        None => RoadConfig::default().length,
    };
    let lanes = match file_get("lanes") {
        Some(raw) => raw
            .parse::<u32>()
            .map_err(|e| CliError::usage(format!("config lanes = `{raw}`: {e}")))?,
        None => RoadConfig::default().lanes,
    };

    let out = match (&args.out, file_get("out")) {
        (Some(path), _) => path.clone(),
        (None, Some(raw)) => PathBuf::from(raw),
        (None, None) => PathBuf::from("out"),
    };

    Ok(ExperimentConfig {
        density,
        seed,
        out,
        powers,
        pairs,
        x_max,
        sigma,
        snapshots,
        strategies,
        tall_fraction,
        road_length,
        lanes,
    })
}
