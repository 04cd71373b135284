//! Monte Carlo verification of the path-space log-Sobolev and Poincaré
//! inequalities.
//!
//! Every report carries a chain of links `lhs ≤ rhs`, each with its own
//! verdict, so that a failure can be located:
//!
//! * `damped-lsi`: `Ent(F²) ≤ 2 E∫|D̃F|²`;
//! * `damped-vs-form`: `E∫|D̃F|² ≤ 𝓔(F, F)`;
//! * `main`: `Ent(F²) ≤ c 𝓔(F, F)` with `c = 2` (default) or `1`;
//! * `corollary-*`: the closed-form consequence that applies to the model.
//!
//! Links marked non-binding are informational (for example the same
//! inequality with the other choice of the factor `c`).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::constants::{compute_a_b, spectral_gap_bound, sup_lambda, CurvatureBounds, SupMethod};
use crate::damped::{path_gradients, CylinderPointwise, ProjectionMode};
use crate::error::{bail, Result};
use crate::executor::PathExecutor;
use crate::geometry::{ManifoldModel, ModelSpec, Point};
use crate::rng::derive_seed;
use crate::sampler::{simulate_path, PathGrid, SamplerConfig};
use crate::stats::{entropy_estimate, mean_estimate, variance_estimate};

pub use crate::stats::EstimateWithError;

pub const SCHEMA_VERSION: u32 = 1;

/// Width of the noise band, in combined standard errors.
pub const VERDICT_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    HoldsWithinError,
    Violated,
}

pub fn combined_se(lhs: &EstimateWithError, rhs: &EstimateWithError) -> f64 {
    lhs.std_error.hypot(rhs.std_error)
}

/// `violated` iff `lhs − 3 SE > rhs`; `holds-within-error` iff
/// `|rhs − lhs| < 3 SE`; `holds` otherwise.
pub fn verdict(lhs: &EstimateWithError, rhs: &EstimateWithError) -> Verdict {
    let band = VERDICT_SIGMAS * combined_se(lhs, rhs);
    let margin = rhs.value - lhs.value;
    if lhs.value - band > rhs.value {
        Verdict::Violated
    } else if margin.abs() < band {
        Verdict::HoldsWithinError
    } else {
        Verdict::Holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    pub lhs: EstimateWithError,
    pub rhs: EstimateWithError,
    pub margin: f64,
    pub combined_se: f64,
    pub verdict: Verdict,
    /// Whether a violation of this link fails the run.
    pub binding: bool,
}

impl Link {
    pub fn new(name: &str, lhs: EstimateWithError, rhs: EstimateWithError, binding: bool) -> Self {
        Link {
            name: name.to_string(),
            lhs,
            rhs,
            margin: rhs.value - lhs.value,
            combined_se: combined_se(&lhs, &rhs),
            verdict: verdict(&lhs, &rhs),
            binding,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub model: ModelSpec,
    pub start: Vec<f64>,
    pub function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<CurvatureBounds>,
    pub grid: PathGrid,
    pub n_paths: usize,
    pub base_seed: u64,
    pub factor2: bool,
    pub projection: ProjectionMode,
    pub rhs_multiplier: f64,
    pub bootstrap_resamples: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub schema_version: u32,
    pub scenario: String,
    pub lhs: EstimateWithError,
    pub rhs: EstimateWithError,
    pub margin: f64,
    pub verdict: Verdict,
    pub links: Vec<Link>,
    /// Named scalar diagnostics (constants used, path-wise checks).
    pub extras: BTreeMap<String, f64>,
    pub metadata: ReportMetadata,
}

impl InequalityReport {
    pub(crate) fn from_links(scenario: &str, main: &str, links: Vec<Link>, extras: BTreeMap<String, f64>, metadata: ReportMetadata) -> Self {
        let head = links.iter().find(|l| l.name == main).expect("main link present").clone();
        InequalityReport {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.to_string(),
            lhs: head.lhs,
            rhs: head.rhs,
            margin: head.margin,
            verdict: head.verdict,
            links,
            extras,
            metadata,
        }
    }

    pub fn link(&self, name: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.name == name)
    }

    /// True when the headline or any binding link is violated.
    pub fn any_violated(&self) -> bool {
        self.verdict == Verdict::Violated || self.links.iter().any(|l| l.binding && l.verdict == Verdict::Violated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    /// Use `Ent ≤ 2𝓔` (true) or `Ent ≤ 𝓔` (false) as the main bound.
    pub factor2: bool,
    pub projection: ProjectionMode,
    /// Scales the main and corollary right-hand sides (harness self-test).
    pub rhs_multiplier: f64,
    pub bootstrap_resamples: usize,
    /// Heat inequality only: request the closed-form (convex-boundary)
    /// constants.
    pub closed_form: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            factor2: true,
            projection: ProjectionMode::EveryEvent,
            rhs_multiplier: 1.0,
            bootstrap_resamples: 200,
            closed_form: true,
        }
    }
}

impl VerifyOptions {
    pub fn factor(&self) -> f64 {
        if self.factor2 {
            2.0
        } else {
            1.0
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.rhs_multiplier > 0.0 && self.rhs_multiplier.is_finite()) {
            bail!(Config, "rhs multiplier must be positive and finite");
        }
        Ok(())
    }
}

/// Check that `bounds` hold for the model's exact curvature.
pub fn check_bounds(model: &ManifoldModel, bounds: &CurvatureBounds) -> Result<()> {
    bounds.validate()?;
    let exact = model.exact_bounds();
    if bounds.k2 > exact.k2 || bounds.k1 < exact.k1 {
        bail!(
            Config,
            "bounds K2 = {}, K1 = {} do not enclose Ric^Z = {} of the {} model",
            bounds.k2,
            bounds.k1,
            exact.k1,
            model.kind().name()
        );
    }
    if model.has_boundary() && (bounds.sigma2 > exact.sigma2 || bounds.sigma1 < exact.sigma1) {
        bail!(
            Config,
            "bounds sigma2 = {}, sigma1 = {} do not enclose II = {} of the {} model",
            bounds.sigma2,
            bounds.sigma1,
            exact.sigma1,
            model.kind().name()
        );
    }
    Ok(())
}

/// Which closed-form corollary applies to a model and a set of bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Corollary {
    /// No boundary: `Ent ≤ C(T,K₁,K₂) ∫|DF|²`, `C = sup Λ(·,T)`.
    Boundaryless { constant: f64 },
    /// Ricci-flat with `σ₂ ≥ 0`:
    /// `Ent ≤ E[(1+σ₁l_T)∫|DF|²dt] + E[σ₁(1+σ₁l_T)T ∫|DF|²dl]`.
    RicciFlatConvex { sigma1: f64 },
    /// All bounds zero: `Ent ≤ E∫|DF|²`.
    Flat,
}

impl Corollary {
    pub fn select(model: &ManifoldModel, bounds: &CurvatureBounds, horizon: f64) -> Option<Self> {
        if !model.has_boundary() {
            return Some(Corollary::Boundaryless { constant: sup_lambda(horizon, bounds.k1, bounds.k2).value });
        }
        if bounds.k1 != 0.0 || bounds.k2 != 0.0 {
            return None;
        }
        if bounds.sigma1 == 0.0 && bounds.sigma2 == 0.0 {
            Some(Corollary::Flat)
        } else if bounds.sigma2 >= 0.0 {
            Some(Corollary::RicciFlatConvex { sigma1: bounds.sigma1 })
        } else {
            None
        }
    }

    pub fn link_name(&self) -> &'static str {
        match self {
            Corollary::Boundaryless { .. } => "corollary-boundaryless",
            Corollary::RicciFlatConvex { .. } => "corollary-ricci-flat-convex",
            Corollary::Flat => "corollary-flat",
        }
    }

    fn per_path(&self, r: &LsiRecord, horizon: f64) -> f64 {
        match *self {
            Corollary::Boundaryless { constant } => constant * r.plain,
            Corollary::RicciFlatConvex { sigma1 } => {
                let w = 1.0 + sigma1 * r.local_time;
                w * r.plain + sigma1 * w * horizon * r.plain_dl
            }
            Corollary::Flat => r.plain,
        }
    }
}

/// Per-path scalars of the LSI chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsiRecord {
    pub f: f64,
    /// `Σ_k |D_k|²(A_k dt + B_k dl_{k+1})`.
    pub form: f64,
    /// `Σ_k |D_k|² dt`.
    pub plain: f64,
    /// `Σ_k |D_k|² dl_{k+1}`.
    pub plain_dl: f64,
    /// `Σ_k |D̃_k|² dt`.
    pub damped: f64,
    pub local_time: f64,
}

pub fn lsi_record(
    model: &ManifoldModel,
    x: &Point,
    func: &CylinderPointwise,
    bounds: &CurvatureBounds,
    cfg: &SamplerConfig,
    mode: ProjectionMode,
    index: u64,
) -> Result<LsiRecord> {
    let path = simulate_path(model, x, cfg, index)?;
    let grads = path_gradients(&path, model, func, mode)?;
    let ab = compute_a_b(&path, bounds);
    let n = path.n_steps();
    let dt = path.dt();
    let (mut form, mut plain, mut plain_dl, mut damped) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let g2 = grads.malliavin.vectors[k].norm_squared();
        let dl = path.dl[k + 1];
        form += g2 * (ab.a[k] * dt + ab.b[k] * dl);
        plain += g2 * dt;
        plain_dl += g2 * dl;
        damped += grads.damped.vectors[k].norm_squared() * dt;
    }
    Ok(LsiRecord { f: func.eval(&path)?, form, plain, plain_dl, damped, local_time: path.total_local_time() })
}

fn lsi_records<E: PathExecutor>(
    model: &ManifoldModel,
    x: &Point,
    func: &CylinderPointwise,
    bounds: &CurvatureBounds,
    cfg: &SamplerConfig,
    mode: ProjectionMode,
    exec: &E,
) -> Result<Vec<LsiRecord>> {
    cfg.validate()?;
    model.check_point(x)?;
    func.indices(&cfg.grid)?;
    exec.map_indices(cfg.n_paths, |k| lsi_record(model, x, func, bounds, cfg, mode, k as u64)).into_iter().collect()
}

fn column(records: &[LsiRecord], f: impl Fn(&LsiRecord) -> f64) -> Vec<f64> {
    records.iter().map(f).collect()
}

/// Plug-in entropy of `F²` with a bootstrap standard error.
pub fn estimate_entropy(values: &[f64], resamples: usize, seed: u64) -> Result<EstimateWithError> {
    entropy_estimate(values, resamples, seed)
}

/// Monte Carlo mean of `Σ_k |D_kF|²(A_k dt + B_k dl_k)`.
pub fn estimate_dirichlet_ou<E: PathExecutor>(
    model: &ManifoldModel,
    x: &Point,
    func: &CylinderPointwise,
    bounds: &CurvatureBounds,
    cfg: &SamplerConfig,
    exec: &E,
) -> Result<EstimateWithError> {
    let records = lsi_records(model, x, func, bounds, cfg, ProjectionMode::EveryEvent, exec)?;
    mean_estimate(&column(&records, |r| r.form))
}

/// Monte Carlo mean of `2 Σ_k |D̃_kF|² dt`.
pub fn estimate_damped_dirichlet<E: PathExecutor>(
    model: &ManifoldModel,
    x: &Point,
    func: &CylinderPointwise,
    cfg: &SamplerConfig,
    mode: ProjectionMode,
    exec: &E,
) -> Result<EstimateWithError> {
    let records = lsi_records(model, x, func, &model.exact_bounds(), cfg, mode, exec)?;
    Ok(mean_estimate(&column(&records, |r| r.damped))?.scaled(2.0))
}

pub(crate) fn bootstrap_seed(cfg: &SamplerConfig) -> u64 {
    derive_seed(cfg.base_seed, u64::MAX)
}

fn metadata(
    model: &ManifoldModel,
    x: &Point,
    function: String,
    bounds: Option<CurvatureBounds>,
    cfg: &SamplerConfig,
    opts: &VerifyOptions,
) -> ReportMetadata {
    ReportMetadata {
        model: ModelSpec::from(model.clone()),
        start: x.0.iter().cloned().collect(),
        function,
        bounds,
        grid: cfg.grid,
        n_paths: cfg.n_paths,
        base_seed: cfg.base_seed,
        factor2: opts.factor2,
        projection: opts.projection,
        rhs_multiplier: opts.rhs_multiplier,
        bootstrap_resamples: opts.bootstrap_resamples,
        notes: Vec::new(),
    }
}

/// Verify `Ent(F²) ≤ c 𝓔(F, F)` and its chain on Monte Carlo paths.
pub fn verify_lsi<E: PathExecutor>(
    model: &ManifoldModel,
    x: &Point,
    func: &CylinderPointwise,
    bounds: &CurvatureBounds,
    cfg: &SamplerConfig,
    opts: &VerifyOptions,
    exec: &E,
) -> Result<InequalityReport> {
    opts.validate()?;
    check_bounds(model, bounds)?;
    let records = lsi_records(model, x, func, bounds, cfg, opts.projection, exec)?;
    let horizon = cfg.grid.horizon;
    let mult = opts.rhs_multiplier;

    let ent = entropy_estimate(&column(&records, |r| r.f), opts.bootstrap_resamples, bootstrap_seed(cfg))?;
    let form = mean_estimate(&column(&records, |r| r.form))?;
    let damped = mean_estimate(&column(&records, |r| r.damped))?;
    let plain = mean_estimate(&column(&records, |r| r.plain))?;
    let alt = if opts.factor2 { 1.0 } else { 2.0 };

    let mut links = alloc::vec![
        Link::new("damped-lsi", ent, damped.scaled(2.0), true),
        Link::new("damped-vs-form", damped, form, true),
        Link::new("main", ent, form.scaled(opts.factor() * mult), true),
        Link::new(if opts.factor2 { "main-factor1" } else { "main-factor2" }, ent, form.scaled(alt), false),
    ];
    let mut extras = BTreeMap::new();
    extras.insert("plain_form".to_string(), plain.value);
    extras.insert("mean_local_time".to_string(), records.iter().map(|r| r.local_time).sum::<f64>() / records.len() as f64);
    let mut meta = metadata(model, x, func.function().name(), Some(*bounds), cfg, opts);
    let sup = sup_lambda(horizon, bounds.k1, bounds.k2);
    if !model.has_boundary() {
        extras.insert("lambda_sup".to_string(), sup.value);
        extras.insert("lambda_t_star".to_string(), sup.t_star);
        if sup.method == SupMethod::Grid {
            meta.notes.push("K2 = 0: sup of Lambda taken by grid maximization".to_string());
        }
        links.push(Link::new("form-vs-lambda-envelope", form, plain.scaled(sup.value), true));
    }
    match Corollary::select(model, bounds, horizon) {
        Some(cor) => {
            let values = column(&records, |r| cor.per_path(r, horizon));
            let rhs = mean_estimate(&values)?;
            if let Corollary::Boundaryless { constant } = cor {
                extras.insert("corollary_constant".to_string(), constant);
            }
            links.push(Link::new(cor.link_name(), ent, rhs.scaled(opts.factor() * mult), true));
            links.push(Link::new(&alloc::format!("{}-factor{}", cor.link_name(), alt as u32), ent, rhs.scaled(alt), false));
        }
        None => meta.notes.push("no closed-form corollary applies to these bounds".to_string()),
    }
    Ok(InequalityReport::from_links("lsi", "main", links, extras, meta))
}

/// Verify `Var(F) ≤ B(T,K₁,K₂) E∫|DF|²` on a boundaryless model, with `B`
/// the inverse-spectral-gap bound.
pub fn verify_poincare<E: PathExecutor>(
    model: &ManifoldModel,
    x: &Point,
    func: &CylinderPointwise,
    bounds: &CurvatureBounds,
    cfg: &SamplerConfig,
    opts: &VerifyOptions,
    exec: &E,
) -> Result<InequalityReport> {
    opts.validate()?;
    check_bounds(model, bounds)?;
    if model.has_boundary() {
        bail!(Config, "the spectral-gap bound is stated for manifolds without boundary");
    }
    let records = lsi_records(model, x, func, bounds, cfg, opts.projection, exec)?;
    let var = variance_estimate(&column(&records, |r| r.f))?;
    let plain = mean_estimate(&column(&records, |r| r.plain))?;
    let bound = spectral_gap_bound(cfg.grid.horizon, bounds.k1, bounds.k2);
    let links = alloc::vec![Link::new("main", var, plain.scaled(bound.value * opts.rhs_multiplier), true)];
    let mut extras = BTreeMap::new();
    extras.insert("spectral_bound".to_string(), bound.value);
    extras.insert("plain_form".to_string(), plain.value);
    let mut meta = metadata(model, x, func.function().name(), Some(*bounds), cfg, opts);
    if bound.method == SupMethod::Grid {
        meta.notes.push("K2 = 0: spectral bound taken from the grid supremum of Lambda".to_string());
    }
    Ok(InequalityReport::from_links("poincare", "main", links, extras, meta))
}
