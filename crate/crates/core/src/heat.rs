//! Integral cylinder functions `F(γ) = f(∫₀ᵀg₁(s,γ_s)ds, …, ∫₀ᵀg_m(s,γ_s)ds)`,
//! their L² gradients, and the log-Sobolev bound with weight `A(s)`.
//!
//! Verification goes through the integral form of the damped gradient:
//! `Ent(F²) ≤ 2E∫₀ᵀ|∫_sᵀ Q_{s,u}∇F(u)du|²ds ≤ 2E∫₀ᵀA(s)|∇F(s)|²ds`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;

use crate::constants::{heat_a, heat_c, heat_c_coarse, heat_weights, sup_heat_a, CurvatureBounds};
use crate::damped::{PathOperators, ProjectionMode};
use crate::error::{bail, Result};
use crate::executor::PathExecutor;
use crate::geometry::{ManifoldModel, ModelSpec, Point};
use crate::inequality::{bootstrap_seed, EstimateWithError, InequalityReport, Link, ReportMetadata, VerifyOptions};
use crate::linalg::Vector;
use crate::sampler::{simulate_path, PathSample, SamplerConfig};
use crate::stats::{entropy_estimate, mean_estimate};

/// Outer function `f: ℝ^m → ℝ`.
pub trait OuterFunction: Send + Sync {
    fn name(&self) -> String;
    fn value(&self, y: &[f64]) -> f64;
    /// `∂_j f(y)`.
    fn partial(&self, y: &[f64], j: usize) -> f64;
}

/// Inner function `g(s, x)` with chart differential `d_x g`.
pub trait InnerFunction: Send + Sync {
    fn name(&self) -> String;
    fn value(&self, s: f64, x: &Vector) -> f64;
    fn differential(&self, s: f64, x: &Vector) -> Vector;
}

#[derive(Clone)]
pub struct CylinderIntegral {
    outer: Arc<dyn OuterFunction>,
    inner: Vec<Arc<dyn InnerFunction>>,
}

impl core::fmt::Debug for CylinderIntegral {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.name())
    }
}

impl CylinderIntegral {
    pub fn new(outer: Arc<dyn OuterFunction>, inner: Vec<Arc<dyn InnerFunction>>) -> Result<Self> {
        if inner.is_empty() {
            bail!(Config, "an integral cylinder function needs at least one inner function");
        }
        Ok(CylinderIntegral { outer, inner })
    }

    pub fn m(&self) -> usize {
        self.inner.len()
    }

    pub fn name(&self) -> String {
        let inner: Vec<String> = self.inner.iter().map(|g| g.name()).collect();
        alloc::format!("{}[{}]", self.outer.name(), inner.join(", "))
    }

    /// Left Riemann sums `Σ_{k<n} g_j(t_k, x_k) dt`.
    pub fn integrals(&self, path: &PathSample) -> Vec<f64> {
        let dt = path.dt();
        self.inner
            .iter()
            .map(|g| (0..path.n_steps()).map(|k| g.value(path.grid.time(k), path.points[k].coords())).sum::<f64>() * dt)
            .collect()
    }
}

pub fn eval_integral_cylinder(path: &PathSample, func: &CylinderIntegral) -> f64 {
    func.outer.value(&func.integrals(path))
}

/// `∇F(t_k) = Σ_j ∂_jf · U_kᵀ d g_j(t_k, x_k)`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatGradientField {
    pub vectors: Vec<Vector>,
}

pub fn l2_gradient(path: &PathSample, func: &CylinderIntegral) -> HeatGradientField {
    let y = func.integrals(path);
    let partials: Vec<f64> = (0..func.m()).map(|j| func.outer.partial(&y, j)).collect();
    let d = path.frames[0].matrix().ncols();
    let vectors = (0..=path.n_steps())
        .map(|k| {
            let (t, x) = (path.grid.time(k), path.points[k].coords());
            let mut dg = Vector::zeros(x.len());
            for (g, &p) in func.inner.iter().zip(&partials) {
                if p != 0.0 {
                    dg += g.differential(t, x) * p;
                }
            }
            if dg.iter().all(|v| *v == 0.0) {
                Vector::zeros(d)
            } else {
                path.frames[k].pull_covector(&dg)
            }
        })
        .collect();
    HeatGradientField { vectors }
}

/// Per-path terms of the heat chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatRecord {
    pub f: f64,
    /// `Σ_k |Y_k|² dt` with `Y_k = Σ_{u≥k} Q_{k,u}∇F(u) dt`.
    pub exact: f64,
    /// `Σ_u A_u |∇F(u)|² dt`, path-dependent `A`.
    pub bound: f64,
    /// `Σ_u heat_A(t_u) |∇F(u)|² dt`.
    pub closed: f64,
    /// `Σ_u |∇F(u)|² dt`.
    pub plain: f64,
    /// `max_k (|Y_k|² − φ_k Σ_{u≥k} e^{…}|∇F(u)|² dt)`, positive on a
    /// failure of the Hölder step.
    pub holder_excess: f64,
}

pub fn heat_record(
    path: &PathSample,
    model: &ManifoldModel,
    func: &CylinderIntegral,
    k_lower: f64,
    sigma: f64,
    mode: ProjectionMode,
) -> HeatRecord {
    let n = path.n_steps();
    let dt = path.dt();
    let ops = PathOperators::new(model, path);
    let grad = l2_gradient(path, func);
    let g2: Vec<f64> = grad.vectors.iter().map(|v| v.norm_squared()).collect();

    // Y_k, backwards.
    let d = grad.vectors[0].len();
    let mut y = Vector::zeros(d);
    let mut exact = 0.0;
    let mut inner_sq = alloc::vec![0.0; n + 1];
    for k in (0..n).rev() {
        let carried = match &ops.step[k] {
            Some(g) => g * &y,
            None => y.clone(),
        };
        let here = &grad.vectors[k] * dt;
        y = match (mode, &ops.proj[k]) {
            (_, None) => here + carried,
            (ProjectionMode::EveryEvent, Some(p)) => p * (here + carried),
            (ProjectionMode::TerminalOnly, Some(p)) => p * here + carried,
        };
        inner_sq[k] = y.norm_squared();
        exact += inner_sq[k] * dt;
    }

    // Hölder step with weights e^{−K(u−s)−σ(l_u−l_s)}.
    let (phi, a) = heat_weights(dt, &path.dl, k_lower, sigma);
    let mut tail = 0.0;
    let mut holder_excess = f64::NEG_INFINITY;
    for k in (0..n).rev() {
        if k + 1 < n {
            tail *= (-k_lower * dt - sigma * path.dl[k + 1]).exp();
        }
        tail += g2[k] * dt;
        holder_excess = holder_excess.max(inner_sq[k] - phi[k] * tail);
    }

    let horizon = path.grid.horizon;
    let (mut bound, mut closed, mut plain) = (0.0, 0.0, 0.0);
    for u in 0..n {
        bound += a[u] * g2[u] * dt;
        closed += heat_a(path.grid.time(u), horizon, k_lower) * g2[u] * dt;
        plain += g2[u] * dt;
    }
    HeatRecord { f: eval_integral_cylinder(path, func), exact, bound, closed, plain, holder_excess }
}

fn heat_records<E: PathExecutor>(
    model: &ManifoldModel,
    x: &Point,
    func: &CylinderIntegral,
    k_lower: f64,
    sigma: f64,
    cfg: &SamplerConfig,
    mode: ProjectionMode,
    exec: &E,
) -> Result<Vec<HeatRecord>> {
    cfg.validate()?;
    model.check_point(x)?;
    check_heat_bounds(model, k_lower, sigma)?;
    exec.map_indices(cfg.n_paths, |i| {
        simulate_path(model, x, cfg, i as u64).map(|p| heat_record(&p, model, func, k_lower, sigma, mode))
    })
    .into_iter()
    .collect()
}

/// `Ric^Z ≥ K` and, with a boundary, `II ≥ σ`.
pub fn check_heat_bounds(model: &ManifoldModel, k_lower: f64, sigma: f64) -> Result<()> {
    if !(k_lower.is_finite() && sigma.is_finite()) {
        bail!(Config, "K and sigma must be finite");
    }
    let exact = model.exact_bounds();
    if k_lower > exact.k2 {
        bail!(Config, "K = {k_lower} exceeds Ric^Z = {} of the {} model", exact.k2, model.kind().name());
    }
    if model.has_boundary() && sigma > exact.sigma2 {
        bail!(Config, "sigma = {sigma} exceeds II = {} of the {} model", exact.sigma2, model.kind().name());
    }
    Ok(())
}

/// Both sides of the Hölder step, each doubled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedHeatForm {
    /// `2E Σ_k |Y_k|² dt`.
    pub exact: EstimateWithError,
    /// `2E Σ_u A_u |∇F(u)|² dt`.
    pub bound: EstimateWithError,
    /// Paths on which `exact > bound` beyond rounding.
    pub pathwise_violations: usize,
}

fn pathwise_tolerance(r: &HeatRecord) -> f64 {
    1e-10 * (1.0 + r.bound.abs())
}

pub fn damped_heat_form<E: PathExecutor>(
    model: &ManifoldModel,
    x: &Point,
    func: &CylinderIntegral,
    k_lower: f64,
    sigma: f64,
    cfg: &SamplerConfig,
    mode: ProjectionMode,
    exec: &E,
) -> Result<DampedHeatForm> {
    let records = heat_records(model, x, func, k_lower, sigma, cfg, mode, exec)?;
    summarize(&records).map(|(exact, bound, _, _, v)| DampedHeatForm { exact, bound, pathwise_violations: v })
}

type Summary = (EstimateWithError, EstimateWithError, EstimateWithError, EstimateWithError, usize);

fn summarize(records: &[HeatRecord]) -> Result<Summary> {
    let col = |f: fn(&HeatRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    let violations = records.iter().filter(|r| r.exact > r.bound + pathwise_tolerance(r)).count();
    Ok((
        mean_estimate(&col(|r| r.exact))?.scaled(2.0),
        mean_estimate(&col(|r| r.bound))?.scaled(2.0),
        mean_estimate(&col(|r| r.closed))?.scaled(2.0),
        mean_estimate(&col(|r| r.plain))?,
        violations,
    ))
}

/// Verify `Ent(F²) ≤ 2E∫A|∇F|²` and `Ent(F²) ≤ C E∫|∇F|²`, `C = 2 sup A`.
pub fn verify_heat_lsi<E: PathExecutor>(
    model: &ManifoldModel,
    x: &Point,
    func: &CylinderIntegral,
    k_lower: f64,
    sigma: f64,
    cfg: &SamplerConfig,
    opts: &VerifyOptions,
    exec: &E,
) -> Result<InequalityReport> {
    opts.validate()?;
    if opts.closed_form && model.has_boundary() && sigma < 0.0 {
        bail!(Config, "closed-form heat constants need a convex boundary (sigma >= 0), got sigma = {sigma}");
    }
    let records = heat_records(model, x, func, k_lower, sigma, cfg, opts.projection, exec)?;
    let (exact, bound, closed, plain, violations) = summarize(&records)?;
    let values: Vec<f64> = records.iter().map(|r| r.f).collect();
    let ent = entropy_estimate(&values, opts.bootstrap_resamples, bootstrap_seed(cfg))?;
    let horizon = cfg.grid.horizon;
    let mult = opts.rhs_multiplier;
    let coarse = heat_c_coarse(horizon, k_lower);
    let published = heat_c(horizon, k_lower);

    let mut links = alloc::vec![
        Link::new("exact-lsi", ent, exact, true),
        Link::new("exact-vs-bound", exact, bound, true),
        Link::new("main", ent, bound.scaled(mult), true),
    ];
    if opts.closed_form {
        links.push(Link::new("main-closed-form", ent, closed.scaled(mult), true));
        links.push(Link::new("corollary", ent, plain.scaled(coarse * mult), true));
        links.push(Link::new("corollary-published", ent, plain.scaled(published), false));
    }

    let mut extras = BTreeMap::new();
    let (s_star, sup_a) = sup_heat_a(horizon, k_lower);
    extras.insert("K".to_string(), k_lower);
    extras.insert("sigma".to_string(), sigma);
    extras.insert("heat_a_sup".to_string(), sup_a);
    extras.insert("heat_s_star".to_string(), s_star);
    extras.insert("heat_c".to_string(), published);
    extras.insert("heat_c_coarse".to_string(), coarse);
    extras.insert("plain_form".to_string(), plain.value);
    extras.insert("pathwise_violations".to_string(), violations as f64);
    let holder = records.iter().map(|r| r.holder_excess).fold(f64::NEG_INFINITY, f64::max);
    extras.insert("max_holder_excess".to_string(), holder);

    let mut notes = Vec::new();
    if violations > 0 {
        notes.push(alloc::format!("{violations} paths with exact form above the A-weighted bound"));
    }
    let meta = ReportMetadata {
        model: ModelSpec::from(model.clone()),
        start: x.0.iter().cloned().collect(),
        function: func.name(),
        bounds: None::<CurvatureBounds>,
        grid: cfg.grid,
        n_paths: cfg.n_paths,
        base_seed: cfg.base_seed,
        factor2: true,
        projection: opts.projection,
        rhs_multiplier: mult,
        bootstrap_resamples: opts.bootstrap_resamples,
        notes,
    };
    Ok(InequalityReport::from_links("heat-lsi", "main", links, extras, meta))
}
