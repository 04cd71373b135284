//! Euler scheme for the reflecting diffusion `L = ½Δ + Z` and its
//! horizontal frame process.
//!
//! Arrays indexed by grid step have length `n + 1`. `dw[k]` and `dl[k]`
//! are the increments over `(t_{k-1}, t_k]`, so index 0 holds zeros.

// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geometry::{Frame, ManifoldModel, ModelKind, Point};
use crate::linalg::Vector;
use crate::rng::{derive_seed, GaussianStream};

/// Uniform time grid `t_k = k T / n` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathGrid {
    pub horizon: f64,
    pub n_steps: usize,
}

impl PathGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        let grid = PathGrid { horizon, n_steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            bail!(Config, "time horizon must be positive and finite, got {}", self.horizon);
        }
        if self.n_steps == 0 {
            bail!(Config, "n_steps must be positive");
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// Index of the grid point nearest to `t`, clamped to `[0, n]`.
    pub fn snap(&self, t: f64) -> usize {
        let k = (t / self.dt()).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n_steps)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub grid: PathGrid,
    pub n_paths: usize,
    pub base_seed: u64,
    /// Distance below which a point counts as on the boundary. Defaults to
    /// `1e-9 ×` the model's length scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_tolerance: Option<f64>,
}

impl SamplerConfig {
    pub fn new(grid: PathGrid, n_paths: usize, base_seed: u64) -> Self {
        SamplerConfig { grid, n_paths, base_seed, boundary_tolerance: None }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.n_paths == 0 {
            bail!(Config, "n_paths must be at least 1");
        }
        if let Some(tol) = self.boundary_tolerance {
            if !(tol >= 0.0 && tol.is_finite()) {
                bail!(Config, "boundary tolerance must be nonnegative and finite");
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, model: &ManifoldModel) -> f64 {
        self.boundary_tolerance.unwrap_or_else(|| model.default_boundary_tolerance())
    }
}

/// One discretized trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub points: Vec<Point>,
    pub frames: Vec<Frame>,
    pub dw: Vec<Vector>,
    pub dl: Vec<f64>,
    pub on_boundary: Vec<bool>,
    /// Reproducibility token derived from `(base_seed, path_index)`.
    pub seed: u64,
    pub path_index: u64,
    pub grid: PathGrid,
}

impl PathSample {
    pub fn n_steps(&self) -> usize {
        self.grid.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt()
    }

    /// Cumulative local time `l_{t_k}`.
    pub fn local_time(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.dl
            .iter()
            .map(|&d| {
                acc += d;
                acc
            })
            .collect()
    }

    pub fn total_local_time(&self) -> f64 {
        self.dl.iter().sum()
    }

    pub fn terminal(&self) -> &Point {
        &self.points[self.grid.n_steps]
    }
}

/// Push `y` back into the closed domain; returns the local-time increment.
fn reflect(model: &ManifoldModel, y: &mut Vector) -> f64 {
    match model.kind() {
        ModelKind::HalfLine | ModelKind::HalfSpace { .. } => {
            let last = y.len() - 1;
            if y[last] < 0.0 {
                let dl = -y[last];
                y[last] = 0.0;
                dl
            } else {
                0.0
            }
        }
        ModelKind::Ball { radius, .. } => {
            let r = y.norm();
            if r > radius {
                *y *= radius / r;
                r - radius
            } else {
                0.0
            }
        }
        ModelKind::Sphere { .. } | ModelKind::HyperbolicPlane => 0.0,
    }
}

/// Run the scheme on prescribed Brownian increments (one per step).
pub fn simulate_path_with_increments<I>(
    model: &ManifoldModel,
    x: &Point,
    grid: &PathGrid,
    boundary_tolerance: f64,
    increments: I,
) -> Result<PathSample>
where
    I: IntoIterator<Item = Vector>,
{
    grid.validate()?;
    model.check_point(x)?;
    let n = grid.n_steps;
    let d = model.dim();
    let dt = grid.dt();
    let mut points = Vec::with_capacity(n + 1);
    let mut frames = Vec::with_capacity(n + 1);
    let mut dw = Vec::with_capacity(n + 1);
    let mut dl = Vec::with_capacity(n + 1);
    let mut on_boundary = Vec::with_capacity(n + 1);

    let f0 = model.initial_frame(x)?;
    on_boundary.push(model.is_on_boundary(x, boundary_tolerance));
    points.push(x.clone());
    frames.push(f0);
    dw.push(Vector::zeros(d));
    dl.push(0.0);

    let mut noise = increments.into_iter();
    for k in 0..n {
        let Some(w) = noise.next() else {
            bail!(Config, "expected {n} increments, got {k}");
        };
        if w.len() != d {
            bail!(Config, "increment {k} has dimension {}, expected {d}", w.len());
        }
        let (p, f) = (&points[k], &frames[k]);
        let (mut y, g) = match model.drift() {
            Some(z) => model.geodesic_step(p, f, &(&w + f.pull_covector(z) * dt)),
            None => model.geodesic_step(p, f, &w),
        };
        let push = reflect(model, &mut y.0);
        if !model.contains(&y, boundary_tolerance) {
            bail!(Domain, "step {k} left the domain at {:?}", y.0.as_slice());
        }
        on_boundary.push(model.is_on_boundary(&y, boundary_tolerance));
        points.push(y);
        frames.push(g);
        dw.push(w);
        dl.push(push);
    }
    Ok(PathSample { points, frames, dw, dl, on_boundary, seed: 0, path_index: 0, grid: *grid })
}

/// Simulate path `path_index` of the ensemble described by `cfg`.
pub fn simulate_path(model: &ManifoldModel, x: &Point, cfg: &SamplerConfig, path_index: u64) -> Result<PathSample> {
    cfg.validate()?;
    let d = model.dim();
    let sd = cfg.grid.dt().sqrt();
    let mut stream = GaussianStream::new(cfg.base_seed, path_index, d);
    let increments = (0..cfg.grid.n_steps).map(move |_| stream.next_vector(sd));
    let mut path = simulate_path_with_increments(model, x, &cfg.grid, cfg.tolerance(model), increments)?;
    path.seed = derive_seed(cfg.base_seed, path_index);
    path.path_index = path_index;
    Ok(path)
}

/// The `n_paths` samples of `cfg`, in path order. Each item depends only on
/// `(model, x, cfg, index)`.
pub fn simulate_ensemble<'a>(
    model: &'a ManifoldModel,
    x: &'a Point,
    cfg: &'a SamplerConfig,
) -> impl Iterator<Item = Result<PathSample>> + 'a {
    (0..cfg.n_paths as u64).map(move |k| simulate_path(model, x, cfg, k))
}
