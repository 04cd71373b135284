//! Configuration-driven experiment runner for `pathgap-core`.
//!
//! Subcommands map to [`run_constants`], [`run_verify`], [`run_sweep`] and
//! [`dump_paths`]. Reports are written as JSON (pretty, schema version 1),
//! CSV (header always present) and optionally a static SVG figure.

pub mod config;
pub mod output;
pub mod svg;

use std::path::{Path, PathBuf};

use pathgap_core::constants::{closed_form_constants, CurvatureBounds};
use pathgap_core::executor::PathExecutor;
use pathgap_core::rng::derive_seed;
use pathgap_core::sampler::simulate_path;
use pathgap_core::{heat, inequality, InequalityReport, Sequential};
use rayon::prelude::*;

pub use config::{ExperimentConfig, Overrides, Resolved, Scenario};
pub use output::{ConstantsRow, ReportRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<pathgap_core::Error> for CliError {
    fn from(e: pathgap_core::Error) -> Self {
        match e {
            pathgap_core::Error::Config(m) | pathgap_core::Error::Domain(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Runs paths on the rayon pool, results in index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Parallel;

impl PathExecutor for Parallel {
    fn map_indices<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }
}

/// Run one verification scenario.
pub fn run_verify<E: PathExecutor>(r: &Resolved, exec: &E) -> Result<InequalityReport, CliError> {
    let x = &r.start;
    let report = match r.scenario {
        Scenario::Lsi => {
            let f = r.function.build_pointwise(&r.model)?;
            inequality::verify_lsi(&r.model, x, &f, &r.bounds, &r.sampler, &r.options, exec)?
        }
        Scenario::Poincare => {
            let f = r.function.build_pointwise(&r.model)?;
            inequality::verify_poincare(&r.model, x, &f, &r.bounds, &r.sampler, &r.options, exec)?
        }
        Scenario::HeatLsi => {
            let f = r.function.build_integral(&r.model)?;
            let h = r.heat.ok_or_else(|| CliError::Config("heat-lsi needs [heat]".into()))?;
            heat::verify_heat_lsi(&r.model, x, &f, h.k, h.sigma, &r.sampler, &r.options, exec)?
        }
        Scenario::ConstantsTable => return Err(CliError::Config("constants-table is not a verification".into())),
    };
    Ok(report)
}

/// Rows of the constants table, in axis order (last axis fastest).
pub fn run_constants(cfg: &ExperimentConfig) -> Result<Vec<ConstantsRow>, CliError> {
    let g = cfg.constants.as_ref().ok_or_else(|| CliError::Config("missing [constants]".into()))?;
    let ks: Vec<(f64, f64)> = if g.zip_k {
        if g.k1.len() != g.k2.len() {
            return Err(CliError::Config("zip_k needs k1 and k2 of equal length".into()));
        }
        g.k1.iter().copied().zip(g.k2.iter().copied()).collect()
    } else {
        g.k1.iter().flat_map(|&a| g.k2.iter().map(move |&b| (a, b))).collect()
    };
    // A crossed grid skips the ordered pairs that cannot be bounds
    // (`K₂ > K₁` or `σ₂ > σ₁`); an explicit zip reports them.
    let crossed = |lo: f64, hi: f64| !g.zip_k && lo > hi;
    let mut cells = Vec::new();
    for &(k1, k2) in &ks {
        if crossed(k2, k1) {
            continue;
        }
        for &s1 in &g.sigma1 {
            for &s2 in g.sigma2.iter().filter(|&&s2| !crossed(s2, s1)) {
                for &t in &g.horizon {
                    cells.push((k1, k2, s1, s2, t));
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(CliError::Config("empty constants grid (no admissible K₂ ≤ K₁, σ₂ ≤ σ₁ cell)".into()));
    }
    cells
        .into_par_iter()
        .map(|(k1, k2, s1, s2, t)| {
            let b = CurvatureBounds::new(k1, k2, s1, s2)?;
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("horizon must be positive, got {t}")));
            }
            Ok(ConstantsRow::new(&b, t, &closed_form_constants(t, &b)))
        })
        .collect()
}

/// One evaluated sweep cell.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub index: usize,
    pub values: Vec<(String, f64)>,
    pub outcome: Result<InequalityReport, String>,
    pub row: ReportRow,
}

/// Cartesian product of the `[sweep]` axes in key order, last axis fastest.
pub fn sweep_cells(cfg: &ExperimentConfig) -> Result<Vec<Vec<(String, f64)>>, CliError> {
    if cfg.sweep.is_empty() || cfg.sweep.values().any(|v| v.is_empty()) {
        return Err(CliError::Config("empty sweep: give at least one nonempty axis under [sweep]".into()));
    }
    let mut cells: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for (axis, values) in &cfg.sweep {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.push((axis.clone(), v));
                    c
                })
            })
            .collect();
    }
    Ok(cells)
}

/// Verification sweep: cells in parallel, each with seed
/// `derive_seed(base_seed, cell index)` and sequential paths.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepCell>, CliError> {
    let cells = sweep_cells(cfg)?;
    let prepared: Vec<(ExperimentConfig, Vec<(String, f64)>)> = cells
        .into_iter()
        .enumerate()
        .map(|(i, values)| {
            let mut c = cfg.clone();
            for (axis, v) in &values {
                config::set_axis(&mut c, axis, *v)?;
            }
            c.seed = derive_seed(cfg.seed, i as u64);
            Ok((c, values))
        })
        .collect::<Result<_, CliError>>()?;
    Ok(prepared
        .into_par_iter()
        .enumerate()
        .map(|(index, (c, values))| {
            let outcome = c.resolve().and_then(|r| run_verify(&r, &Sequential)).map_err(|e| e.to_string());
            let row = ReportRow::new(index, &c, outcome.as_ref());
            SweepCell { index, values, outcome, row }
        })
        .collect())
}

/// Write sampled paths as CSV: `path,step,t,x0..,local_time,on_boundary`.
pub fn dump_paths(r: &Resolved, out: &Path) -> Result<PathBuf, CliError> {
    let mut w = csv::Writer::from_path(out).map_err(csv_err)?;
    let dim = r.model.ambient_dim();
    let mut header = vec!["path".to_string(), "step".into(), "t".into()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.extend(["local_time".to_string(), "on_boundary".into()]);
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..r.sampler.n_paths {
        let p = simulate_path(&r.model, &r.start, &r.sampler, i as u64)?;
        let lt = p.local_time();
        for k in 0..=p.n_steps() {
            let mut rec = vec![i.to_string(), k.to_string(), p.grid.time(k).to_string()];
            rec.extend(p.points[k].0.iter().map(|v| v.to_string()));
            rec.push(lt[k].to_string());
            rec.push((p.on_boundary[k] as u8).to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(out.to_path_buf())
}

pub(crate) fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(format!("csv: {e}"))
}

/// Exit code for a set of reports: 1 iff any is violated.
pub fn exit_code<'a>(reports: impl IntoIterator<Item = &'a InequalityReport>) -> i32 {
    if reports.into_iter().any(|r| r.any_violated()) {
        EXIT_VIOLATED
    } else {
        EXIT_OK
    }
}
