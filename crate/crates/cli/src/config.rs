//! TOML run configuration.
//!
//! ```toml
//! [model]
//! fixture = "two-regime"      # or give strike, expiry, rates, vols, generator
//!
//! [grid]
//! x_max = 3.0
//! h = 0.01
//! # k = 1e-4                      # omitted: k = h^2
//!
//! [solver]
//! method = "gs"                   # "gs" or "newton"
//! interpolation = "quintic"       # "cubic" or "quintic"
//! epsilon = 1e-8
//! max_iterations = 100
//! parallel = false
//!
//! [output]
//! asset_prices = [6.0, 9.0, 12.0]
//! directory = "out"
//! formats = ["csv", "json"]
//! ```

use std::path::PathBuf;

use amerput_core::{fixture, validate_generator, GridSpec, InterpOrder, Method, RegimeModel, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub output: OutputSection,
}

/// Either a built-in fixture or an explicit market.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strike: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expiry: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vols: Option<Vec<f64>>,
    /// Generator rows, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    /// Time step; `None` selects `k = h^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { x_max: default_x_max(), h: default_h(), k: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_interpolation")]
    pub interpolation: InterpOrder,
    /// Convergence tolerance; `None` takes the fixture's, else the library default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub parallel: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            interpolation: default_interpolation(),
            epsilon: None,
            max_iterations: default_max_iterations(),
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub asset_prices: Vec<f64>,
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_x_max() -> f64 {
    3.0
}

fn default_h() -> f64 {
    0.01
}

fn default_method() -> Method {
    Method::GaussSeidel
}

fn default_interpolation() -> InterpOrder {
    InterpOrder::Quintic
}

fn default_max_iterations() -> usize {
    SolverConfig::DEFAULT_MAX_ITERATIONS
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

/// A configuration resolved into library types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: RegimeModel,
    pub solver: SolverConfig,
}

fn invalid(field: &'static str, reason: impl ToString) -> CliError {
    CliError::Config { field, reason: reason.to_string() }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let (model, fixture_eps) = self.model.resolve()?;
        let g = &self.grid;
        let grid = GridSpec::from_steps(g.x_max, g.h, model.expiry, g.k).map_err(|e| invalid("grid", e))?;
        let s = &self.solver;
        let solver = SolverConfig::new(grid)
            .with_method(s.method)
            .with_interpolation(s.interpolation)
            .with_epsilon(s.epsilon.or(fixture_eps).unwrap_or(SolverConfig::DEFAULT_EPSILON))
            .with_max_iterations(s.max_iterations)
            .with_parallel(s.parallel);
        solver.validate().map_err(|e| invalid("solver", e))?;
        let out = &self.output;
        if out.asset_prices.is_empty() {
            return Err(invalid("output.asset_prices", "must list at least one price"));
        }
        if let Some(p) = out.asset_prices.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(invalid("output.asset_prices", format!("{p} is not a positive price")));
        }
        if out.formats.is_empty() {
            return Err(invalid("output.formats", "must list at least one format"));
        }
        Ok(Resolved { model, solver })
    }
}

impl ModelSection {
    fn explicit_fields(&self) -> [(&'static str, bool); 5] {
        [
            ("model.strike", self.strike.is_some()),
            ("model.expiry", self.expiry.is_some()),
            ("model.rates", self.rates.is_some()),
            ("model.vols", self.vols.is_some()),
            ("model.generator", self.generator.is_some()),
        ]
    }

    /// The market and, for fixtures, its customary tolerance.
    fn resolve(&self) -> Result<(RegimeModel, Option<f64>), CliError> {
        if let Some(name) = &self.fixture {
            if let Some((field, _)) = self.explicit_fields().into_iter().find(|(_, set)| *set) {
                return Err(invalid(field, "cannot be combined with model.fixture"));
            }
            let f = fixture(name).map_err(|e| invalid("model.fixture", e))?;
            return Ok((f.model, Some(f.epsilon)));
        }
        if let Some((field, _)) = self.explicit_fields().into_iter().find(|(_, set)| !*set) {
            return Err(invalid(field, "missing (or set model.fixture)"));
        }
        let q = validate_generator(self.generator.as_ref().unwrap()).map_err(|e| invalid("model.generator", e))?;
        let model = RegimeModel::new(
            self.rates.clone().unwrap(),
            self.vols.clone().unwrap(),
            q,
            self.strike.unwrap(),
            self.expiry.unwrap(),
        )
        .map_err(|e| invalid("model", e))?;
        Ok((model, None))
    }
}
