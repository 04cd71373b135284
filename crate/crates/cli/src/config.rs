//! TOML experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use pathgap_core::damped::ProjectionMode;
use pathgap_core::functions::FunctionSpec;
use pathgap_core::geometry::ModelSpec;
use pathgap_core::inequality::VerifyOptions;
use pathgap_core::{CurvatureBounds, ManifoldModel, PathGrid, Point, SamplerConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Lsi,
    Poincare,
    HeatLsi,
    ConstantsTable,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Lsi => "lsi",
            Scenario::Poincare => "poincare",
            Scenario::HeatLsi => "heat-lsi",
            Scenario::ConstantsTable => "constants-table",
        }
    }
}

/// Lower bounds `Ric^Z ≥ K`, `II ≥ σ` for the heat scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatParams {
    pub k: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "yes")]
    pub closed_form: bool,
}

fn yes() -> bool {
    true
}

fn default_resamples() -> usize {
    200
}

fn default_multiplier() -> f64 {
    1.0
}

/// Axes of the constants table; the table is their Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsGrid {
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    #[serde(default = "zero_axis")]
    pub sigma1: Vec<f64>,
    #[serde(default = "zero_axis")]
    pub sigma2: Vec<f64>,
    pub horizon: Vec<f64>,
    /// Pair `k1[i]` with `k2[i]` instead of crossing them.
    #[serde(default)]
    pub zip_k: bool,
}

fn zero_axis() -> Vec<f64> {
    vec![0.0]
}

/// Output file names, relative to `--out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_json")]
    pub json: String,
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default)]
    pub svg: Option<String>,
}

fn default_json() -> String {
    "report.json".into()
}

fn default_csv() -> String {
    "report.csv".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { json: default_json(), csv: default_csv(), svg: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub n_paths: Option<usize>,
    #[serde(default = "yes")]
    pub factor2: bool,
    #[serde(default)]
    pub projection: ProjectionMode,
    #[serde(default = "default_multiplier")]
    pub rhs_multiplier: f64,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub boundary_tolerance: Option<f64>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub grid: Option<PathGrid>,
    /// Omitted: the exact bounds of the model.
    #[serde(default)]
    pub bounds: Option<CurvatureBounds>,
    #[serde(default)]
    pub heat: Option<HeatParams>,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub constants: Option<ConstantsGrid>,
    /// Axis name to values; see `sweep`.
    #[serde(default)]
    pub sweep: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Command-line overrides.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
    pub factor2: Option<bool>,
}

/// A fully resolved verification scenario.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub model: ManifoldModel,
    pub start: Point,
    pub sampler: SamplerConfig,
    pub bounds: CurvatureBounds,
    pub heat: Option<HeatParams>,
    pub function: FunctionSpec,
    pub options: VerifyOptions,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| cfg_err(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.n_paths {
            self.n_paths = Some(n);
        }
        if let (Some(n), Some(g)) = (o.n_steps, self.grid.as_mut()) {
            g.n_steps = n;
        }
        if let Some(f) = o.factor2 {
            self.factor2 = f;
        }
    }

    pub fn options(&self) -> VerifyOptions {
        VerifyOptions {
            factor2: self.factor2,
            projection: self.projection,
            rhs_multiplier: self.rhs_multiplier,
            bootstrap_resamples: self.bootstrap_resamples,
            closed_form: self.heat.map_or(true, |h| h.closed_form),
        }
    }

    /// Build the model, start point, sampler and function; check registry
    /// names and bound consistency.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        if self.scenario == Scenario::ConstantsTable {
            return Err(cfg_err("a constants-table scenario has no paths to simulate"));
        }
        let spec = self.model.clone().ok_or_else(|| cfg_err("missing [model]"))?;
        let model = ManifoldModel::try_from(spec)?;
        let start = Point::new(self.start.as_deref().ok_or_else(|| cfg_err("missing start"))?);
        if start.0.len() != model.ambient_dim() {
            return Err(cfg_err(format!(
                "start has {} coordinates, the {} model needs {}",
                start.0.len(),
                model.kind().name(),
                model.ambient_dim()
            )));
        }
        model.check_point(&start)?;
        let grid = self.grid.ok_or_else(|| cfg_err("missing [grid]"))?;
        grid.validate()?;
        let n_paths = self.n_paths.ok_or_else(|| cfg_err("missing n_paths"))?;
        let sampler = SamplerConfig { grid, n_paths, base_seed: self.seed, boundary_tolerance: self.boundary_tolerance };
        sampler.validate()?;
        let function = self.function.clone().ok_or_else(|| cfg_err("missing [function]"))?;
        let bounds = self.bounds.unwrap_or_else(|| model.exact_bounds());
        let options = self.options();
        match self.scenario {
            Scenario::Lsi | Scenario::Poincare => {
                function.build_pointwise(&model)?.indices(&grid)?;
                pathgap_core::inequality::check_bounds(&model, &bounds)?;
            }
            Scenario::HeatLsi => {
                function.build_integral(&model)?;
                let h = self.heat.ok_or_else(|| cfg_err("heat-lsi needs [heat] with k and sigma"))?;
                pathgap_core::heat::check_heat_bounds(&model, h.k, h.sigma)?;
            }
            Scenario::ConstantsTable => unreachable!(),
        }
        Ok(Resolved { scenario: self.scenario, model, start, sampler, bounds, heat: self.heat, function, options })
    }
}

pub const SWEEP_AXES: &[&str] =
    &["horizon", "n_steps", "n_paths", "k1", "k2", "k", "sigma1", "sigma2", "sigma", "rhs_multiplier"];

fn bounds_mut(cfg: &mut ExperimentConfig) -> Result<&mut CurvatureBounds, CliError> {
    if cfg.bounds.is_none() {
        let spec = cfg.model.clone().ok_or_else(|| cfg_err("missing [model]"))?;
        cfg.bounds = Some(ManifoldModel::try_from(spec)?.exact_bounds());
    }
    Ok(cfg.bounds.as_mut().expect("just set"))
}

/// Set one sweep axis on a copy of the configuration.
pub fn set_axis(cfg: &mut ExperimentConfig, axis: &str, value: f64) -> Result<(), CliError> {
    let count = |v: f64| -> Result<usize, CliError> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(cfg_err(format!("{axis} must be a positive integer, got {v}")))
        }
    };
    if cfg.scenario == Scenario::ConstantsTable {
        return Err(cfg_err("use the [constants] table to sweep constants"));
    }
    match axis {
        "horizon" => cfg.grid.as_mut().ok_or_else(|| cfg_err("missing [grid]"))?.horizon = value,
        "n_steps" => cfg.grid.as_mut().ok_or_else(|| cfg_err("missing [grid]"))?.n_steps = count(value)?,
        "n_paths" => cfg.n_paths = Some(count(value)?),
        "rhs_multiplier" => cfg.rhs_multiplier = value,
        "k" if cfg.scenario == Scenario::HeatLsi => cfg.heat.as_mut().ok_or_else(|| cfg_err("missing [heat]"))?.k = value,
        "sigma" if cfg.scenario == Scenario::HeatLsi => {
            cfg.heat.as_mut().ok_or_else(|| cfg_err("missing [heat]"))?.sigma = value
        }
        "k" => {
            let b = bounds_mut(cfg)?;
            b.k1 = value;
            b.k2 = value;
        }
        "sigma" => {
            let b = bounds_mut(cfg)?;
            b.sigma1 = value;
            b.sigma2 = value;
        }
        "k1" => bounds_mut(cfg)?.k1 = value,
        "k2" => bounds_mut(cfg)?.k2 = value,
        "sigma1" => bounds_mut(cfg)?.sigma1 = value,
        "sigma2" => bounds_mut(cfg)?.sigma2 = value,
        other => return Err(cfg_err(format!("unknown sweep axis '{other}', expected one of {SWEEP_AXES:?}"))),
    }
    Ok(())
}
