//! CSV rows and report files.

use std::fs;
use std::path::Path;

use pathgap_core::constants::{ClosedFormConstants, CurvatureBounds, SupMethod};
use pathgap_core::InequalityReport;
use serde::Serialize;

use crate::config::{ExperimentConfig, Scenario};
use crate::{csv_err, CliError};

/// One row of the constants table. Column order is part of the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsRow {
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub lambda_sup: f64,
    pub t_star: f64,
    pub spectral_bound: f64,
    #[serde(rename = "heat_C")]
    pub heat_c: f64,
    pub beta: Option<f64>,
    #[serde(rename = "heat_C_coarse")]
    pub heat_c_coarse: f64,
    pub lambda_method: SupMethod,
}

impl ConstantsRow {
    pub fn new(b: &CurvatureBounds, horizon: f64, c: &ClosedFormConstants) -> Self {
        ConstantsRow {
            k1: b.k1,
            k2: b.k2,
            sigma1: b.sigma1,
            sigma2: b.sigma2,
            horizon,
            lambda_sup: c.lambda_sup,
            t_star: c.t_star,
            spectral_bound: c.spectral_bound,
            heat_c: c.heat_c,
            beta: c.beta,
            heat_c_coarse: c.heat_c_coarse,
            lambda_method: c.lambda_method,
        }
    }
}

/// One row per verification run or sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub cell: usize,
    pub scenario: String,
    pub model: String,
    pub function: String,
    pub horizon: Option<f64>,
    pub n_steps: Option<usize>,
    pub n_paths: Option<usize>,
    pub seed: u64,
    pub factor2: bool,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub lhs: Option<f64>,
    pub lhs_se: Option<f64>,
    pub rhs: Option<f64>,
    pub rhs_se: Option<f64>,
    pub margin: Option<f64>,
    pub verdict: String,
    /// Binding links with verdict `violated`, `;`-separated.
    pub violated_links: String,
    pub status: String,
}

impl ReportRow {
    pub fn new(cell: usize, cfg: &ExperimentConfig, outcome: Result<&InequalityReport, &String>) -> Self {
        let model = cfg
            .model
            .as_ref()
            .map(|m| match m.dim {
                Some(d) => format!("{}(d={d})", m.kind),
                None => m.kind.clone(),
            })
            .unwrap_or_default();
        let bounds = cfg.bounds.or_else(|| {
            cfg.model.clone().and_then(|m| pathgap_core::ManifoldModel::try_from(m).ok()).map(|m| m.exact_bounds())
        });
        let (k1, k2, sigma1, sigma2) = match (cfg.scenario, cfg.heat, bounds) {
            (Scenario::HeatLsi, Some(h), _) => (None, Some(h.k), None, Some(h.sigma)),
            (_, _, Some(b)) => (Some(b.k1), Some(b.k2), Some(b.sigma1), Some(b.sigma2)),
            _ => (None, None, None, None),
        };
        let mut row = ReportRow {
            cell,
            scenario: cfg.scenario.name().into(),
            model,
            function: String::new(),
            horizon: cfg.grid.map(|g| g.horizon),
            n_steps: cfg.grid.map(|g| g.n_steps),
            n_paths: cfg.n_paths,
            seed: cfg.seed,
            factor2: cfg.factor2,
            k1,
            k2,
            sigma1,
            sigma2,
            lhs: None,
            lhs_se: None,
            rhs: None,
            rhs_se: None,
            margin: None,
            verdict: String::new(),
            violated_links: String::new(),
            status: "ok".into(),
        };
        match outcome {
            Ok(r) => {
                row.function = r.metadata.function.clone();
                row.lhs = Some(r.lhs.value);
                row.lhs_se = Some(r.lhs.std_error);
                row.rhs = Some(r.rhs.value);
                row.rhs_se = Some(r.rhs.std_error);
                row.margin = Some(r.margin);
                row.verdict = serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                row.violated_links = r
                    .links
                    .iter()
                    .filter(|l| l.binding && l.verdict == pathgap_core::Verdict::Violated)
                    .map(|l| l.name.as_str())
                    .collect::<Vec<_>>()
                    .join(";");
            }
            Err(e) => row.status = format!("error: {e}"),
        }
        row
    }
}

/// Write rows with a header. With no rows the header is still written.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub const CONSTANTS_HEADER: &[&str] = &[
    "K1",
    "K2",
    "sigma1",
    "sigma2",
    "T",
    "lambda_sup",
    "t_star",
    "spectral_bound",
    "heat_C",
    "beta",
    "heat_C_coarse",
    "lambda_method",
];

pub const REPORT_HEADER: &[&str] = &[
    "cell",
    "scenario",
    "model",
    "function",
    "horizon",
    "n_steps",
    "n_paths",
    "seed",
    "factor2",
    "k1",
    "k2",
    "sigma1",
    "sigma2",
    "lhs",
    "lhs_se",
    "rhs",
    "rhs_se",
    "margin",
    "verdict",
    "violated_links",
    "status",
];

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
