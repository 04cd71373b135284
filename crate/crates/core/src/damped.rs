//! The multiplicative functional `Q`, Malliavin and damped gradients of
//! pointwise cylinder functions.
//!
//! One step of `Q` is `Q[k+1] = Q[k]·G_k·Π_{k+1}` with
//! `G_k = Id − Ric^Z(X_k) dt − II(X_{k+1}) dl_{k+1}` and
//! `Π_j = Id − 1_{X_j∈∂M} P_{U_j}`. The second fundamental form is taken
//! at the boundary point where the local-time increment is recorded.
//!
//! Gradients are computed by backward recursions, `O(n d²)` per path; no
//! `n × n` family of `Q` matrices is ever formed.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::constants::CurvatureBounds;
use crate::error::{bail, Result};
use crate::geometry::{Frame, ManifoldModel};
use crate::linalg::{op_norm, outer, Matrix, Vector};
use crate::sampler::{PathGrid, PathSample};

/// Where the boundary projection enters `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMode {
    /// `Π` is applied at every boundary event along the way.
    #[default]
    EveryEvent,
    /// `Π` is applied only at the terminal time of each `Q_{s,t}`.
    TerminalOnly,
}

/// `P_u a = ⟨u a, N⟩ u⁻¹N` in frame coordinates.
pub fn boundary_projection(frame: &Frame, normal: &Vector) -> Result<Matrix> {
    if (normal.norm() - 1.0).abs() > 1e-9 {
        bail!(Precondition, "normal must be a unit vector, |N| = {}", normal.norm());
    }
    Ok(outer(&frame.pull_covector(normal)))
}

/// A path functional `F(γ) = f(γ_{t_1}, …, γ_{t_N})`.
pub trait PointwiseFunction: Send + Sync {
    fn name(&self) -> String;

    fn value(&self, args: &[&Vector]) -> f64;

    /// Chart differential of `f` in its `i`-th argument, or `None` when no
    /// gradient is registered.
    fn differential(&self, args: &[&Vector], i: usize) -> Option<Vector>;

    /// A Lipschitz constant, when known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

#[derive(Clone)]
pub struct CylinderPointwise {
    times: Vec<f64>,
    function: Arc<dyn PointwiseFunction>,
}

impl core::fmt::Debug for CylinderPointwise {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CylinderPointwise").field("times", &self.times).field("function", &self.function.name()).finish()
    }
}

impl CylinderPointwise {
    pub fn new(times: Vec<f64>, function: Arc<dyn PointwiseFunction>) -> Result<Self> {
        if times.is_empty() {
            bail!(Config, "a cylinder function needs at least one time");
        }
        if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            bail!(Config, "cylinder times must be positive and finite");
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            bail!(Config, "cylinder times must be strictly increasing");
        }
        Ok(CylinderPointwise { times, function })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn function(&self) -> &dyn PointwiseFunction {
        self.function.as_ref()
    }

    /// Grid indices of the cylinder times (nearest grid point, at least 1).
    pub fn indices(&self, grid: &PathGrid) -> Result<Vec<usize>> {
        let last = *self.times.last().expect("nonempty");
        if last > grid.horizon * (1.0 + 1e-12) {
            bail!(Config, "cylinder time {last} beyond the horizon {}", grid.horizon);
        }
        Ok(self.times.iter().map(|&t| grid.snap(t).max(1)).collect())
    }

    pub fn eval(&self, path: &PathSample) -> Result<f64> {
        let idx = self.indices(&path.grid)?;
        let args: Vec<&Vector> = idx.iter().map(|&k| &path.points[k].0).collect();
        Ok(self.function.value(&args))
    }

    /// `(index, U_{t_i}⁻¹∇_i f)` for every argument.
    pub fn frame_gradients(&self, path: &PathSample) -> Result<Vec<(usize, Vector)>> {
        let idx = self.indices(&path.grid)?;
        let args: Vec<&Vector> = idx.iter().map(|&k| &path.points[k].0).collect();
        let mut out = Vec::with_capacity(idx.len());
        for (i, &k) in idx.iter().enumerate() {
            let Some(df) = self.function.differential(&args, i) else {
                bail!(Config, "no gradient registered for argument {i} of '{}'", self.function.name());
            };
            if df.len() != path.points[k].0.len() {
                bail!(Config, "gradient of '{}' has the wrong dimension", self.function.name());
            }
            out.push((k, path.frames[k].pull_covector(&df)));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientFlavor {
    Malliavin,
    Damped,
}

/// Gradient vectors at the grid times `t_0, …, t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub vectors: Vec<Vector>,
    pub flavor: GradientFlavor,
}

impl GradientField {
    /// `Σ_k |g_k|² w_k` over `k < n`.
    pub fn weighted_square_sum(&self, weight: impl Fn(usize) -> f64) -> f64 {
        let n = self.vectors.len() - 1;
        (0..n).map(|k| self.vectors[k].norm_squared() * weight(k)).sum()
    }
}

/// `Id − M`, or `None` standing for the identity.
type Factor = Option<Matrix>;

fn apply(f: &Factor, v: &Vector) -> Vector {
    match f {
        Some(m) => m * v,
        None => v.clone(),
    }
}

fn apply_left(q: &Matrix, f: &Factor) -> Matrix {
    match f {
        Some(m) => q * m,
        None => q.clone(),
    }
}

/// Per-step factors of `Q` along one path.
#[derive(Debug, Clone)]
pub struct PathOperators {
    /// `Ric^Z(X_k)` in frame coordinates, `k = 0..=n`.
    pub ric: Vec<Matrix>,
    /// `II(X_k)` where `dl_k > 0`.
    pub ii: Vec<Option<Matrix>>,
    /// `G_k`, `k = 0..n`.
    pub step: Vec<Factor>,
    /// `Π_k`, `k = 0..=n`.
    pub proj: Vec<Factor>,
    pub dt: f64,
}

impl PathOperators {
    pub fn new(model: &ManifoldModel, path: &PathSample) -> Self {
        let n = path.n_steps();
        let d = model.dim();
        let dt = path.dt();
        let ric_const = model.ric_z_unchecked();
        let flat = model.is_ricci_flat();
        let ric = alloc::vec![ric_const.clone(); n + 1];
        let mut ii = Vec::with_capacity(n + 1);
        let mut proj = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let (p, f) = (&path.points[k], &path.frames[k]);
            ii.push((path.dl[k] > 0.0).then(|| model.second_fundamental_form_unchecked(p, f)));
            proj.push(path.on_boundary[k].then(|| {
                let n_hat = f.pull_covector(&model.normal_unchecked(p));
                Matrix::identity(d, d) - outer(&n_hat)
            }));
        }
        let mut step = Vec::with_capacity(n);
        for k in 0..n {
            let mut g: Factor = None;
            if !flat {
                g = Some(Matrix::identity(d, d) - &ric_const * dt);
            }
            if let Some(s) = &ii[k + 1] {
                let base = g.take().unwrap_or_else(|| Matrix::identity(d, d));
                g = Some(base - s * path.dl[k + 1]);
            }
            step.push(g);
        }
        PathOperators { ric, ii, step, proj, dt }
    }

    pub fn n_steps(&self) -> usize {
        self.step.len()
    }
}

/// `Q_{s, t_k}` for `k = s..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QProcess {
    pub base: usize,
    /// `q[j] = Q_{s, s+j}`.
    pub q: Vec<Matrix>,
}

impl QProcess {
    pub fn at(&self, k: usize) -> &Matrix {
        &self.q[k - self.base]
    }
}

pub fn q_evolve_with(ops: &PathOperators, base: usize, mode: ProjectionMode) -> Result<QProcess> {
    let n = ops.n_steps();
    if base > n {
        bail!(Precondition, "base index {base} beyond n = {n}");
    }
    let d = ops.ric[0].nrows();
    let mut q = Vec::with_capacity(n + 1 - base);
    let start = apply_left(&Matrix::identity(d, d), &ops.proj[base]);
    match mode {
        ProjectionMode::EveryEvent => {
            q.push(start);
            for k in base..n {
                let next = apply_left(&apply_left(&q[k - base], &ops.step[k]), &ops.proj[k + 1]);
                q.push(next);
            }
        }
        ProjectionMode::TerminalOnly => {
            q.push(start);
            let mut unprojected = Matrix::identity(d, d);
            for k in base..n {
                unprojected = apply_left(&unprojected, &ops.step[k]);
                q.push(apply_left(&unprojected, &ops.proj[k + 1]));
            }
        }
    }
    Ok(QProcess { base, q })
}

/// The functional `Q_{s,·}` along `path`.
pub fn q_evolve(path: &PathSample, model: &ManifoldModel, base: usize, mode: ProjectionMode) -> Result<QProcess> {
    q_evolve_with(&PathOperators::new(model, path), base, mode)
}

/// `max_k ‖Q_{s,k}‖ / exp(−K₂(t_k − t_s) − σ₂(l_k − l_s))`.
pub fn q_norm_ratio(q: &QProcess, path: &PathSample, bounds: &CurvatureBounds) -> f64 {
    let l = path.local_time();
    let dt = path.dt();
    let s = q.base;
    let mut worst: f64 = 0.0;
    for (j, m) in q.q.iter().enumerate() {
        let k = s + j;
        let envelope = (-bounds.k2 * (k - s) as f64 * dt - bounds.sigma2 * (l[k] - l[s])).exp();
        worst = worst.max(op_norm(m) / envelope);
    }
    worst
}

fn point_sources(n: usize, d: usize, grads: &[(usize, Vector)]) -> Vec<Option<Vector>> {
    let mut v: Vec<Option<Vector>> = alloc::vec![None; n + 1];
    for (k, g) in grads {
        match &mut v[*k] {
            Some(acc) => *acc += g,
            slot => *slot = Some(g.clone()),
        }
    }
    let _ = d;
    v
}

fn malliavin_from(ops: &PathOperators, sources: &[Option<Vector>], d: usize) -> Vec<Vector> {
    let n = ops.n_steps();
    let mut out = alloc::vec![Vector::zeros(d); n + 1];
    for k in (0..n).rev() {
        let mut acc = out[k + 1].clone();
        if let Some(v) = &sources[k + 1] {
            acc += apply(&ops.proj[k + 1], v);
        }
        out[k] = acc;
    }
    out
}

fn damped_from(ops: &PathOperators, sources: &[Option<Vector>], d: usize, mode: ProjectionMode) -> Vec<Vector> {
    let n = ops.n_steps();
    let mut out = alloc::vec![Vector::zeros(d); n + 1];
    // s = Σ_{i: idx_i ≥ k+1} Q_{k+1, idx_i} v_i.
    let mut s = match &sources[n] {
        Some(v) => apply(&ops.proj[n], v),
        None => Vector::zeros(d),
    };
    for k in (0..n).rev() {
        let carried = apply(&ops.step[k], &s);
        match mode {
            ProjectionMode::EveryEvent => {
                out[k] = apply(&ops.proj[k], &carried);
                s = match &sources[k] {
                    Some(v) => apply(&ops.proj[k], &(v + &carried)),
                    None => out[k].clone(),
                };
            }
            ProjectionMode::TerminalOnly => {
                out[k] = carried.clone();
                s = match &sources[k] {
                    Some(v) => apply(&ops.proj[k], v) + carried,
                    None => carried,
                };
            }
        }
    }
    out
}

/// Both gradient flavors of `F` along one path.
#[derive(Debug, Clone)]
pub struct PathGradients {
    pub malliavin: GradientField,
    pub damped: GradientField,
    pub operators: PathOperators,
}

pub fn path_gradients(
    path: &PathSample,
    model: &ManifoldModel,
    func: &CylinderPointwise,
    mode: ProjectionMode,
) -> Result<PathGradients> {
    let ops = PathOperators::new(model, path);
    let d = model.dim();
    let sources = point_sources(path.n_steps(), d, &func.frame_gradients(path)?);
    let malliavin = GradientField { vectors: malliavin_from(&ops, &sources, d), flavor: GradientFlavor::Malliavin };
    let damped = GradientField { vectors: damped_from(&ops, &sources, d, mode), flavor: GradientFlavor::Damped };
    Ok(PathGradients { malliavin, damped, operators: ops })
}

/// `D_kF = Σ_{i: t_i > t_k} Π_{t_i} U_{t_i}⁻¹∇_i f`.
pub fn malliavin_gradient(path: &PathSample, model: &ManifoldModel, func: &CylinderPointwise) -> Result<GradientField> {
    let ops = PathOperators::new(model, path);
    let d = model.dim();
    let sources = point_sources(path.n_steps(), d, &func.frame_gradients(path)?);
    Ok(GradientField { vectors: malliavin_from(&ops, &sources, d), flavor: GradientFlavor::Malliavin })
}

/// `D̃_kF = Σ_{i: t_i > t_k} Q_{t_k, t_i} U_{t_i}⁻¹∇_i f`.
pub fn damped_gradient(
    path: &PathSample,
    model: &ManifoldModel,
    func: &CylinderPointwise,
    mode: ProjectionMode,
) -> Result<GradientField> {
    Ok(path_gradients(path, model, func, mode)?.damped)
}

/// `|D̃_k − (D_k − Σ_{j>k} Q_{k,j}(Ric^Z D_j dt + II D_j dl_j))|` for every `k`.
pub fn identity_residuals(grads: &PathGradients, dl: &[f64], mode: ProjectionMode) -> Vec<f64> {
    let ops = &grads.operators;
    let n = ops.n_steps();
    let d = ops.ric[0].nrows();
    let dm = &grads.malliavin.vectors;
    let dd = &grads.damped.vectors;
    let h = |j: usize| -> Vector {
        let mut v = &ops.ric[j] * &dm[j] * ops.dt;
        if let Some(s) = &ops.ii[j] {
            v += s * &dm[j] * dl[j];
        }
        v
    };
    let mut out = alloc::vec![0.0; n + 1];
    out[n] = (&dd[n] - &dm[n]).norm();
    // w = Σ_{j>k} Q_{k,j} h_j.
    let mut tail = Vector::zeros(d);
    for k in (0..n).rev() {
        let inner = apply(&ops.proj[k + 1], &h(k + 1)) + &tail;
        let carried = apply(&ops.step[k], &inner);
        tail = match mode {
            ProjectionMode::EveryEvent => apply(&ops.proj[k], &carried),
            ProjectionMode::TerminalOnly => carried,
        };
        out[k] = (&dd[k] - &dm[k] + &tail).norm();
    }
    out
}

/// `max_k` of [`identity_residuals`].
pub fn identity_residual(
    path: &PathSample,
    model: &ManifoldModel,
    func: &CylinderPointwise,
    mode: ProjectionMode,
) -> Result<f64> {
    let grads = path_gradients(path, model, func, mode)?;
    Ok(identity_residuals(&grads, &path.dl, mode).into_iter().fold(0.0, f64::max))
}

/// Largest excess of `|D̃_k|` over `|D_k| + Σ_{j>k} |D_j| μ_{t_k}(dt_j)` along a
/// path; nonpositive when the pointwise domination holds exactly.
pub fn domination_excess(grads: &PathGradients, path: &PathSample, bounds: &CurvatureBounds) -> f64 {
    let n = path.n_steps();
    let dt = path.dt();
    let (kx, sx) = (bounds.k_max(), bounds.sigma_max());
    let dm = &grads.malliavin.vectors;
    let dd = &grads.damped.vectors;
    let mut worst = f64::NEG_INFINITY;
    // acc_k = Σ_{j>k} |D_j| e^{−K₂(t_j−t_k)−σ₂(l_j−l_k)} (K* dt + σ* dl_j).
    let mut acc = 0.0;
    for k in (0..=n).rev() {
        if k < n {
            let decay = (-bounds.k2 * dt - bounds.sigma2 * path.dl[k + 1]).exp();
            acc = decay * (dm[k + 1].norm() * (kx * dt + sx * path.dl[k + 1]) + acc);
        }
        worst = worst.max(dd[k].norm() - dm[k].norm() - acc);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::sampler::{simulate_path, simulate_path_with_increments, SamplerConfig};

    struct Coord(usize);

    impl PointwiseFunction for Coord {
        fn name(&self) -> String {
            String::from("coord")
        }
        fn value(&self, args: &[&Vector]) -> f64 {
            args.iter().map(|x| x[self.0]).sum()
        }
        fn differential(&self, args: &[&Vector], _: usize) -> Option<Vector> {
            let mut g = Vector::zeros(args[0].len());
            g[self.0] = 1.0;
            Some(g)
        }
    }

    struct NoGradient;

    impl PointwiseFunction for NoGradient {
        fn name(&self) -> String {
            String::from("opaque")
        }
        fn value(&self, _: &[&Vector]) -> f64 {
            0.0
        }
        fn differential(&self, _: &[&Vector], _: usize) -> Option<Vector> {
            None
        }
    }

    fn coord(times: &[f64], c: usize) -> CylinderPointwise {
        CylinderPointwise::new(times.to_vec(), Arc::new(Coord(c))).unwrap()
    }

    fn cfg(horizon: f64, n: usize, seed: u64) -> SamplerConfig {
        SamplerConfig::new(PathGrid::new(horizon, n).unwrap(), 1, seed)
    }

    #[test]
    fn projection_examples() {
        let p = boundary_projection(&Frame::identity(1), &Vector::from_vec(alloc::vec![1.0])).unwrap();
        assert_eq!(p[(0, 0)], 1.0);
        let p = boundary_projection(&Frame::identity(2), &Vector::from_vec(alloc::vec![0.0, 1.0])).unwrap();
        assert_eq!(p, Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        let r = boundary_projection(&Frame::identity(2), &Vector::from_vec(alloc::vec![0.0, 2.0]));
        assert!(r.is_err());
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let f = Frame(Matrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]));
        let nrm = Vector::from_vec(alloc::vec![0.6, 0.0, 0.8]);
        let p = boundary_projection(&f, &nrm).unwrap();
        assert!((&p * &p - &p).abs().max() < 1e-15);
        assert!((p.trace() - 1.0).abs() < 1e-15);
        assert!(crate::linalg::asymmetry(&p) < 1e-15);
    }

    #[test]
    fn q_is_identity_for_flat_boundaryless_paths() {
        let m = ManifoldModel::half_space(2).unwrap();
        let path = simulate_path(&m, &Point::new(&[0.0, 50.0]), &cfg(1.0, 50, 1), 0).unwrap();
        let q = q_evolve(&path, &m, 0, ProjectionMode::EveryEvent).unwrap();
        assert!(q.q.iter().all(|m| *m == Matrix::identity(2, 2)));
    }

    #[test]
    fn q_on_sphere_decays_exponentially() {
        let m = ManifoldModel::sphere(2).unwrap();
        let path = simulate_path(&m, &Point::new(&[0.0, 0.0, 1.0]), &cfg(1.0, 1000, 2), 0).unwrap();
        let q = q_evolve(&path, &m, 0, ProjectionMode::EveryEvent).unwrap();
        for k in (0..=1000).step_by(100) {
            let want = Matrix::identity(2, 2) * (-(k as f64) * 1e-3).exp();
            assert!((q.at(k) - want).abs().max() <= 1e-2);
        }
    }

    #[test]
    fn q_vanishes_after_half_line_reflection() {
        let m = ManifoldModel::half_line();
        let g = PathGrid::new(1.0, 3).unwrap();
        let inc = [0.1, -0.5, 0.2].map(|v| Vector::from_vec(alloc::vec![v]));
        let path = simulate_path_with_increments(&m, &Point::new(&[0.2]), &g, 1e-9, inc).unwrap();
        assert!(path.on_boundary[2]);
        let q = q_evolve(&path, &m, 0, ProjectionMode::EveryEvent).unwrap();
        assert_eq!(q.at(1)[(0, 0)], 1.0);
        assert_eq!(q.at(2)[(0, 0)], 0.0);
        assert_eq!(q.at(3)[(0, 0)], 0.0);
    }

    #[test]
    fn malliavin_of_linear_function() {
        let m = ManifoldModel::half_space(2).unwrap();
        let path = simulate_path(&m, &Point::new(&[0.0, 30.0]), &cfg(1.0, 10, 3), 0).unwrap();
        let g = malliavin_gradient(&path, &m, &coord(&[0.5], 0)).unwrap();
        for k in 0..=10 {
            let want = if k < 5 { 1.0 } else { 0.0 };
            assert_eq!(g.vectors[k][0], want);
            assert_eq!(g.vectors[k][1], 0.0);
        }
        let d = damped_gradient(&path, &m, &coord(&[0.5], 0), ProjectionMode::EveryEvent).unwrap();
        assert_eq!(d.vectors, g.vectors);
    }

    #[test]
    fn unregistered_gradient_is_config_error() {
        let m = ManifoldModel::half_line();
        let f = CylinderPointwise::new(alloc::vec![1.0], Arc::new(NoGradient)).unwrap();
        let path = simulate_path(&m, &Point::new(&[1.0]), &cfg(1.0, 4, 0), 0).unwrap();
        assert!(matches!(malliavin_gradient(&path, &m, &f), Err(crate::Error::Config(_))));
    }

    #[test]
    fn damped_on_sphere_is_exponentially_discounted() {
        let m = ManifoldModel::sphere(2).unwrap();
        let path = simulate_path(&m, &Point::new(&[0.0, 0.0, 1.0]), &cfg(1.0, 1000, 5), 0).unwrap();
        let f = coord(&[1.0], 0);
        let g = path_gradients(&path, &m, &f, ProjectionMode::EveryEvent).unwrap();
        for k in (0..1000).step_by(50) {
            let want = &g.malliavin.vectors[k] * (-((1000 - k) as f64) * 1e-3).exp();
            assert!((&g.damped.vectors[k] - want).norm() <= 2e-3);
        }
    }

    #[test]
    fn damped_vanishes_after_half_line_hit() {
        let m = ManifoldModel::half_line();
        let g = PathGrid::new(1.0, 4).unwrap();
        let inc = [0.1, -0.5, 0.2, 0.1].map(|v| Vector::from_vec(alloc::vec![v]));
        let path = simulate_path_with_increments(&m, &Point::new(&[0.2]), &g, 1e-9, inc).unwrap();
        let d = damped_gradient(&path, &m, &coord(&[1.0], 0), ProjectionMode::EveryEvent).unwrap();
        assert_eq!(d.vectors[0][0], 0.0);
        assert_eq!(d.vectors[1][0], 0.0);
        assert_eq!(d.vectors[2][0], 0.0);
        assert_eq!(d.vectors[3][0], 1.0);
    }

    /// `Σ_i Q_{k,idx_i} v_i` from explicit `Q` families.
    fn damped_by_brute_force(path: &PathSample, m: &ManifoldModel, f: &CylinderPointwise, mode: ProjectionMode) -> Vec<Vector> {
        let n = path.n_steps();
        let grads = f.frame_gradients(path).unwrap();
        (0..=n)
            .map(|k| {
                let q = q_evolve(path, m, k, mode).unwrap();
                let mut acc = Vector::zeros(m.dim());
                for (i, v) in &grads {
                    if *i > k {
                        acc += q.at(*i) * v;
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn backward_recursion_matches_q_families() {
        let m = ManifoldModel::ball(2, 1.0).unwrap();
        let f = coord(&[0.3, 0.7, 1.0], 1);
        for mode in [ProjectionMode::EveryEvent, ProjectionMode::TerminalOnly] {
            for idx in 0..5 {
                let path = simulate_path(&m, &Point::new(&[0.8, 0.0]), &cfg(1.0, 40, 8), idx).unwrap();
                let fast = damped_gradient(&path, &m, &f, mode).unwrap();
                let slow = damped_by_brute_force(&path, &m, &f, mode);
                for k in 0..=40 {
                    assert!((&fast.vectors[k] - &slow[k]).norm() < 1e-12);
                }
            }
        }
    }

    /// Direct evaluation of the identity residual from explicit `Q` families.
    #[test]
    fn identity_residual_recursion_matches_direct_sum() {
        let m = ManifoldModel::ball(2, 1.0).unwrap();
        let f = coord(&[0.5, 1.0], 0);
        let mode = ProjectionMode::EveryEvent;
        let path = simulate_path(&m, &Point::new(&[0.9, 0.0]), &cfg(1.0, 30, 4), 1).unwrap();
        let grads = path_gradients(&path, &m, &f, mode).unwrap();
        let fast = identity_residuals(&grads, &path.dl, mode);
        let ops = &grads.operators;
        let dm = &grads.malliavin.vectors;
        for k in 0..=30 {
            let q = q_evolve(&path, &m, k, mode).unwrap();
            let mut sum = Vector::zeros(2);
            for j in (k + 1)..=30 {
                let mut h = &ops.ric[j] * &dm[j] * ops.dt;
                if let Some(s) = &ops.ii[j] {
                    h += s * &dm[j] * path.dl[j];
                }
                sum += q.at(j) * h;
            }
            let direct = (&grads.damped.vectors[k] - (&dm[k] - sum)).norm();
            assert!((direct - fast[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_residual_is_zero_on_flat_boundaryless_paths() {
        let m = ManifoldModel::half_space(3).unwrap();
        let path = simulate_path(&m, &Point::new(&[0.0, 0.0, 40.0]), &cfg(1.0, 64, 1), 0).unwrap();
        let r = identity_residual(&path, &m, &coord(&[0.4, 1.0], 1), ProjectionMode::EveryEvent).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn identity_residual_on_sphere_is_first_order() {
        let m = ManifoldModel::sphere(2).unwrap();
        let f = coord(&[0.5, 1.0], 0);
        let path = simulate_path(&m, &Point::new(&[0.0, 0.0, 1.0]), &cfg(1.0, 1000, 6), 0).unwrap();
        let r = identity_residual(&path, &m, &f, ProjectionMode::EveryEvent).unwrap();
        assert!(r <= 1e-2, "residual {r}");
    }

    #[test]
    fn q_norm_bound_on_ball_paths() {
        let m = ManifoldModel::ball(2, 1.0).unwrap();
        let b = m.exact_bounds();
        let c = cfg(1.0, 200, 12);
        let mut hits = 0;
        for idx in 0..20 {
            let path = simulate_path(&m, &Point::new(&[0.9, 0.0]), &c, idx).unwrap();
            hits += usize::from(path.total_local_time() > 0.0);
            for base in [0, 50, 150] {
                let q = q_evolve(&path, &m, base, ProjectionMode::EveryEvent).unwrap();
                assert!(q_norm_ratio(&q, &path, &b) <= 1.0 + 1e-12);
                for k in base..=200 {
                    if path.on_boundary[k] {
                        let n_hat = path.frames[k].pull_covector(&m.normal_unchecked(&path.points[k]));
                        assert!((q.at(k) * outer(&n_hat)).abs().max() < 1e-12);
                    }
                }
            }
        }
        assert!(hits > 10);
    }

    #[test]
    fn pointwise_domination_holds_on_sphere_and_ball() {
        let f = coord(&[0.5, 1.0], 0);
        let sphere = ManifoldModel::sphere(2).unwrap();
        let path = simulate_path(&sphere, &Point::new(&[0.0, 0.0, 1.0]), &cfg(1.0, 500, 2), 0).unwrap();
        let g = path_gradients(&path, &sphere, &f, ProjectionMode::EveryEvent).unwrap();
        assert!(domination_excess(&g, &path, &sphere.exact_bounds()) <= 1e-2);
        let ball = ManifoldModel::ball(2, 1.0).unwrap();
        for idx in 0..10 {
            let path = simulate_path(&ball, &Point::new(&[0.9, 0.0]), &cfg(1.0, 200, 2), idx).unwrap();
            let g = path_gradients(&path, &ball, &f, ProjectionMode::EveryEvent).unwrap();
            assert!(domination_excess(&g, &path, &ball.exact_bounds()) <= 1e-12);
        }
    }

    #[test]
    fn gradients_vanish_at_and_after_last_time() {
        let m = ManifoldModel::hyperbolic_plane();
        let f = coord(&[0.25, 0.5], 1);
        let path = simulate_path(&m, &Point::new(&[0.1, 0.0]), &cfg(1.0, 40, 3), 0).unwrap();
        let g = path_gradients(&path, &m, &f, ProjectionMode::EveryEvent).unwrap();
        for k in 20..=40 {
            assert_eq!(g.malliavin.vectors[k].norm(), 0.0);
            assert_eq!(g.damped.vectors[k].norm(), 0.0);
        }
        assert!(g.malliavin.vectors[0].norm() > 0.0);
    }
}
