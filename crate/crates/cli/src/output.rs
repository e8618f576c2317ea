//! Result files written by `run`.

use std::fs;
use std::path::{Path, PathBuf};

use amerput_core::{greeks_at_asset, price_at_asset, GridSpec, SolveResult};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub const PRICES_FILE: &str = "prices.csv";
pub const GREEKS_FILE: &str = "greeks.csv";
pub const BOUNDARY_FILE: &str = "boundary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Serialize)]
struct PriceRow {
    #[serde(rename = "S")]
    s: f64,
    regime: usize,
    price: f64,
}

#[derive(Debug, Serialize)]
struct GreeksRow {
    #[serde(rename = "S")]
    s: f64,
    regime: usize,
    delta: f64,
    gamma: f64,
    speed: f64,
    theta: f64,
    delta_decay: f64,
    color: f64,
}

#[derive(Debug, Serialize)]
struct IterationStats {
    steps: usize,
    mean: f64,
    max: usize,
    total: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a RunConfig,
    grid: GridSpec,
    regimes: usize,
    iterations: IterationStats,
    wall_time_seconds: f64,
    final_boundary: Vec<f64>,
    files: Vec<&'static str>,
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(&path, bytes).map_err(|source| CliError::Write { path, source })
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| CliError::Write { path: PathBuf::from("<csv buffer>"), source: e.into_error() })
}

/// Prices for every configured asset price and regime, regimes one-based.
pub fn prices_csv(result: &SolveResult, asset_prices: &[f64]) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    for &s in asset_prices {
        for r in 0..result.num_regimes() {
            rows.push(PriceRow { s, regime: r + 1, price: price_at_asset(result, s, r)? });
        }
    }
    csv_bytes(&rows)
}

/// Greeks with time sensitivities in calendar time.
pub fn greeks_csv(result: &SolveResult, asset_prices: &[f64]) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    for &s in asset_prices {
        for r in 0..result.num_regimes() {
            let g = greeks_at_asset(result, s, r)?.calendar();
            rows.push(GreeksRow {
                s,
                regime: r + 1,
                delta: g.delta,
                gamma: g.gamma,
                speed: g.speed,
                theta: g.theta,
                delta_decay: g.delta_decay,
                color: g.color,
            });
        }
    }
    csv_bytes(&rows)
}

/// Free boundary of each regime at every time level.
pub fn boundary_csv(result: &SolveResult) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["tau".to_string()];
    header.extend((1..=result.num_regimes()).map(|r| format!("sf_{r}")));
    w.write_record(&header)?;
    for n in 0..result.boundary.levels() {
        let mut rec = vec![result.grid.tau(n).to_string()];
        rec.extend(result.boundary.values.iter().map(|v| v[n].to_string()));
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| CliError::Write { path: PathBuf::from("<csv buffer>"), source: e.into_error() })
}

/// Writes the requested formats plus the config echo; returns the file names.
pub fn write_outputs(dir: &Path, config: &RunConfig, result: &SolveResult) -> Result<Vec<&'static str>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    let out = &config.output;
    let mut files = Vec::new();
    if out.formats.contains(&Format::Csv) {
        write_file(dir.join(PRICES_FILE), &prices_csv(result, &out.asset_prices)?)?;
        write_file(dir.join(GREEKS_FILE), &greeks_csv(result, &out.asset_prices)?)?;
        write_file(dir.join(BOUNDARY_FILE), &boundary_csv(result)?)?;
        files.extend([PRICES_FILE, GREEKS_FILE, BOUNDARY_FILE]);
    }
    write_file(dir.join(CONFIG_FILE), config.to_toml().as_bytes())?;
    files.push(CONFIG_FILE);
    if out.formats.contains(&Format::Json) {
        files.push(MANIFEST_FILE);
        let manifest = Manifest {
            config,
            grid: result.grid,
            regimes: result.num_regimes(),
            iterations: IterationStats {
                steps: result.iterations.len(),
                mean: result.mean_iterations(),
                max: result.max_iterations(),
                total: result.iterations.iter().sum(),
            },
            wall_time_seconds: result.wall_time,
            final_boundary: result.states.iter().map(|s| s.s_f).collect(),
            files: files.clone(),
        };
        write_file(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    }
    Ok(files)
}
