//! Model manifolds with closed-form geometry.
//!
//! Every model carries exact curvature data, so the curvature bounds
//! `K₂ ≤ Ric^Z ≤ K₁` and `σ₂ ≤ II ≤ σ₁` are realized with equality.
//!
//! Chart conventions:
//!
//! * flat models (`HalfLine`, `HalfSpace`, `Ball`) use Cartesian coordinates;
//!   `HalfSpace` is `{x_d ≥ 0}` and `Ball` is `{|x| ≤ R}`;
//! * `Sphere` of dimension `d` uses embedding coordinates in `ℝ^{d+1}`;
//! * `HyperbolicPlane` uses the Poincaré disk, metric `λ(x)² Id` with
//!   `λ(x) = 2 / (1 − |x|²)`.
//!
//! A [`Frame`] stores its `d` tangent vectors as the columns of an
//! `ambient × d` matrix in chart coordinates, orthonormal for the metric.
//! Tensors returned by [`ManifoldModel::ric_z`] and
//! [`ManifoldModel::second_fundamental_form`] act on frame coordinates.

use alloc::string::String;
use alloc::vec::Vec;
// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::constants::CurvatureBounds;
use crate::error::{bail, Error, Result};
use crate::linalg::{orthonormalize_columns, outer, Matrix, Vector};

const SPHERE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    HalfLine,
    HalfSpace { dim: usize },
    Ball { dim: usize, radius: f64 },
    Sphere { dim: usize },
    HyperbolicPlane,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::HalfLine => "half-line",
            ModelKind::HalfSpace { .. } => "half-space",
            ModelKind::Ball { .. } => "ball",
            ModelKind::Sphere { .. } => "sphere",
            ModelKind::HyperbolicPlane => "hyperbolic-plane",
        }
    }
}

/// Serializable description of a model, as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<f64>>,
}

/// A model geometry together with an optional constant drift `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct ManifoldModel {
    kind: ModelKind,
    drift: Option<Vector>,
}

/// A point in the model chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vector);

/// An orthonormal frame at a point (columns are tangent vectors).
#[derive(Debug, Clone, PartialEq)]
pub struct Frame(pub Matrix);

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Point(Vector::from_column_slice(coords))
    }

    pub fn coords(&self) -> &Vector {
        &self.0
    }
}

impl Frame {
    pub fn identity(d: usize) -> Self {
        Frame(Matrix::identity(d, d))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// Frame coordinates `(df(u e_1), …, df(u e_d))` of a chart differential.
    ///
    /// For a Riemannian gradient `∇f` this is `u⁻¹∇f`, in every model.
    pub fn pull_covector(&self, differential: &Vector) -> Vector {
        self.0.tr_mul(differential)
    }

    /// The tangent vector `u a` for frame coordinates `a`.
    pub fn push(&self, a: &Vector) -> Vector {
        &self.0 * a
    }
}

impl TryFrom<ModelSpec> for ManifoldModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let need_dim = |spec: &ModelSpec| -> Result<usize> {
            match spec.dim {
                Some(d) if d >= 1 => Ok(d),
                Some(d) => bail!(Config, "model dimension must be at least 1, got {d}"),
                None => bail!(Config, "model '{}' needs a dimension", spec.kind),
            }
        };
        let kind = match spec.kind.as_str() {
            "half-line" => ModelKind::HalfLine,
            "half-space" => ModelKind::HalfSpace { dim: need_dim(&spec)? },
            "ball" => {
                let radius = spec.radius.unwrap_or(1.0);
                ModelKind::Ball { dim: need_dim(&spec)?, radius }
            }
            "sphere" => ModelKind::Sphere { dim: need_dim(&spec)? },
            "hyperbolic-plane" => ModelKind::HyperbolicPlane,
            other => bail!(Config, "unknown model kind '{other}'"),
        };
        let model = ManifoldModel::new(kind)?;
        match spec.drift {
            Some(z) => model.with_drift(&z),
            None => Ok(model),
        }
    }
}

impl From<ManifoldModel> for ModelSpec {
    fn from(model: ManifoldModel) -> Self {
        let (dim, radius) = match model.kind {
            ModelKind::HalfLine | ModelKind::HyperbolicPlane => (None, None),
            ModelKind::HalfSpace { dim } | ModelKind::Sphere { dim } => (Some(dim), None),
            ModelKind::Ball { dim, radius } => (Some(dim), Some(radius)),
        };
        ModelSpec {
            kind: String::from(model.kind.name()),
            dim,
            radius,
            drift: model.drift.map(|z| z.iter().cloned().collect()),
        }
    }
}

impl ManifoldModel {
    pub fn new(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::HalfSpace { dim } | ModelKind::Sphere { dim } if dim == 0 => {
                bail!(Config, "model dimension must be at least 1")
            }
            ModelKind::Ball { dim, radius } => {
                if dim == 0 {
                    bail!(Config, "model dimension must be at least 1");
                }
                if !(radius > 0.0 && radius.is_finite()) {
                    bail!(Config, "ball radius must be positive and finite, got {radius}");
                }
            }
            _ => {}
        }
        Ok(ManifoldModel { kind, drift: None })
    }

    pub fn half_line() -> Self {
        ManifoldModel { kind: ModelKind::HalfLine, drift: None }
    }

    pub fn half_space(dim: usize) -> Result<Self> {
        Self::new(ModelKind::HalfSpace { dim })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(ModelKind::Ball { dim, radius })
    }

    pub fn sphere(dim: usize) -> Result<Self> {
        Self::new(ModelKind::Sphere { dim })
    }

    pub fn hyperbolic_plane() -> Self {
        ManifoldModel { kind: ModelKind::HyperbolicPlane, drift: None }
    }

    /// Attach a constant drift. Only flat half-spaces accept one, where
    /// `∇Z = 0` keeps `Ric^Z = Ric`.
    pub fn with_drift(mut self, drift: &[f64]) -> Result<Self> {
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace { .. } => {}
            _ => bail!(Config, "a drift is only supported on half-line/half-space models"),
        }
        if drift.len() != self.dim() {
            bail!(Config, "drift has {} components, model dimension is {}", drift.len(), self.dim());
        }
        if drift.iter().any(|z| !z.is_finite()) {
            bail!(Config, "drift must be finite");
        }
        self.drift = if drift.iter().all(|&z| z == 0.0) { None } else { Some(Vector::from_column_slice(drift)) };
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn drift(&self) -> Option<&Vector> {
        self.drift.as_ref()
    }

    /// Intrinsic dimension `d`.
    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::HalfLine => 1,
            ModelKind::HyperbolicPlane => 2,
            ModelKind::HalfSpace { dim } | ModelKind::Ball { dim, .. } | ModelKind::Sphere { dim } => dim,
        }
    }

    /// Number of chart coordinates.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ModelKind::Sphere { dim } => dim + 1,
            _ => self.dim(),
        }
    }

    pub fn has_boundary(&self) -> bool {
        matches!(self.kind, ModelKind::HalfLine | ModelKind::HalfSpace { .. } | ModelKind::Ball { .. })
    }

    /// Length scale of the domain (the radius for balls, 1 otherwise).
    pub fn scale(&self) -> f64 {
        match self.kind {
            ModelKind::Ball { radius, .. } => radius,
            _ => 1.0,
        }
    }

    /// Distance-to-boundary threshold used to decide `X ∈ ∂M`.
    pub fn default_boundary_tolerance(&self) -> f64 {
        1e-9 * self.scale()
    }

    /// Exact curvature constants of the model.
    ///
    /// For balls, `σ₁ = σ₂ = 1/R` bound the second fundamental form on the
    /// tangent space of the boundary.
    pub fn exact_bounds(&self) -> CurvatureBounds {
        let (k, sigma) = match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace { .. } => (0.0, 0.0),
            ModelKind::Ball { radius, .. } => (0.0, 1.0 / radius),
            ModelKind::Sphere { dim } => ((dim as f64) - 1.0, 0.0),
            ModelKind::HyperbolicPlane => (-1.0, 0.0),
        };
        CurvatureBounds { k1: k, k2: k, sigma1: sigma, sigma2: sigma }
    }

    /// Conformal factor `λ` of the metric `λ² Id` at `p`.
    pub fn conformal_factor(&self, p: &Point) -> f64 {
        match self.kind {
            ModelKind::HyperbolicPlane => 2.0 / (1.0 - p.0.norm_squared()),
            _ => 1.0,
        }
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        let x = &p.0;
        if x.len() != self.ambient_dim() || x.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace { .. } => x[x.len() - 1] >= -tol,
            ModelKind::Ball { radius, .. } => x.norm() <= radius + tol,
            ModelKind::Sphere { .. } => (x.norm() - 1.0).abs() <= tol.max(SPHERE_TOLERANCE),
            ModelKind::HyperbolicPlane => x.norm_squared() < 1.0,
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if self.contains(p, self.default_boundary_tolerance()) {
            Ok(())
        } else {
            bail!(Domain, "{:?} is not in the closed {} domain", p.0.as_slice(), self.kind.name())
        }
    }

    /// Distance to `∂M`; infinite for boundaryless models.
    pub fn boundary_gap(&self, p: &Point) -> f64 {
        let x = &p.0;
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace { .. } => x[x.len() - 1].max(0.0),
            ModelKind::Ball { radius, .. } => (radius - x.norm()).max(0.0),
            ModelKind::Sphere { .. } | ModelKind::HyperbolicPlane => f64::INFINITY,
        }
    }

    pub fn is_on_boundary(&self, p: &Point, tol: f64) -> bool {
        self.boundary_gap(p) <= tol
    }

    /// Inward unit normal `N` at a boundary point.
    pub fn inward_normal(&self, p: &Point) -> Result<Vector> {
        self.check_point(p)?;
        if !self.is_on_boundary(p, self.default_boundary_tolerance()) {
            bail!(Precondition, "inward normal requested at interior point {:?}", p.0.as_slice());
        }
        Ok(self.normal_unchecked(p))
    }

    /// Inward normal of the nearest boundary face (no boundary-membership check).
    pub(crate) fn normal_unchecked(&self, p: &Point) -> Vector {
        let d = self.dim();
        match self.kind {
            ModelKind::Ball { .. } => {
                let r = p.0.norm();
                if r > 0.0 {
                    -&p.0 / r
                } else {
                    let mut n = Vector::zeros(d);
                    n[0] = 1.0;
                    n
                }
            }
            _ => {
                let mut n = Vector::zeros(d);
                n[d - 1] = 1.0;
                n
            }
        }
    }

    /// Bakry–Émery tensor `Ric + ∇Z` in orthonormal frame coordinates.
    ///
    /// For the model spaces it is a multiple of the identity, hence the same
    /// in every orthonormal frame.
    pub fn ric_z(&self, p: &Point) -> Result<Matrix> {
        self.check_point(p)?;
        Ok(self.ric_z_unchecked())
    }

    pub(crate) fn ric_z_unchecked(&self) -> Matrix {
        let d = self.dim();
        let k = self.exact_bounds().k1;
        Matrix::identity(d, d) * k
    }

    /// Whether the Ricci tensor vanishes identically.
    pub(crate) fn is_ricci_flat(&self) -> bool {
        self.exact_bounds().k1 == 0.0
    }

    /// Second fundamental form of `∂M` (inward normal) in frame coordinates.
    ///
    /// The matrix vanishes on the normal direction `u⁻¹N`.
    pub fn second_fundamental_form(&self, p: &Point, f: &Frame) -> Result<Matrix> {
        self.check_point(p)?;
        if !self.has_boundary() {
            bail!(Precondition, "{} has no boundary", self.kind.name());
        }
        if !self.is_on_boundary(p, self.default_boundary_tolerance()) {
            bail!(Precondition, "second fundamental form requested at interior point {:?}", p.0.as_slice());
        }
        Ok(self.second_fundamental_form_unchecked(p, f))
    }

    pub(crate) fn second_fundamental_form_unchecked(&self, p: &Point, f: &Frame) -> Matrix {
        let d = self.dim();
        match self.kind {
            ModelKind::Ball { radius, .. } => {
                let n = f.pull_covector(&self.normal_unchecked(p));
                (Matrix::identity(d, d) - outer(&n)) / radius
            }
            _ => Matrix::zeros(d, d),
        }
    }

    /// A canonical orthonormal frame at `p`.
    pub fn initial_frame(&self, p: &Point) -> Result<Frame> {
        self.check_point(p)?;
        let d = self.dim();
        Ok(match self.kind {
            ModelKind::Sphere { .. } => {
                let x = &p.0;
                let n = d + 1;
                let mut cols: Vec<Vector> = Vec::with_capacity(d);
                for i in 0..n {
                    if cols.len() == d {
                        break;
                    }
                    let mut e = Vector::zeros(n);
                    e[i] = 1.0;
                    let mut v = &e - x * x.dot(&e);
                    for c in &cols {
                        let proj = c.dot(&v);
                        v -= c * proj;
                    }
                    let len = v.norm();
                    if len > 1e-6 {
                        cols.push(v / len);
                    }
                }
                Frame(Matrix::from_columns(&cols))
            }
            ModelKind::HyperbolicPlane => Frame(Matrix::identity(2, 2) / self.conformal_factor(p)),
            _ => Frame::identity(d),
        })
    }

    /// Largest entry of `uᵀ G u − Id`.
    pub fn frame_defect(&self, p: &Point, f: &Frame) -> f64 {
        let lambda = self.conformal_factor(p);
        let gram = f.0.tr_mul(&f.0) * (lambda * lambda);
        let d = gram.nrows();
        (gram - Matrix::identity(d, d)).abs().max()
    }

    /// Move along the geodesic from `p` with initial velocity `u v`.
    ///
    /// Returns the endpoint and the parallel-transported frame. No
    /// reflection is applied; flat models may step outside the domain.
    pub fn geodesic_step(&self, p: &Point, f: &Frame, v: &Vector) -> (Point, Frame) {
        if v.iter().all(|&c| c == 0.0) {
            return (p.clone(), f.clone());
        }
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace { .. } | ModelKind::Ball { .. } => {
                let mut y = p.0.clone();
                y.gemv(1.0, &f.0, v, 1.0);
                (Point(y), f.clone())
            }
            ModelKind::Sphere { .. } => sphere_step(p, f, v),
            ModelKind::HyperbolicPlane => hyperbolic_step(p, f, v),
        }
    }
}

fn sphere_step(p: &Point, f: &Frame, v: &Vector) -> (Point, Frame) {
    let x = &p.0;
    let w = f.push(v);
    let theta = w.norm();
    let w_hat = &w / theta;
    let (s, c) = (theta.sin(), theta.cos());
    let mut y = x * c + &w_hat * s;
    y /= y.norm();
    // Only the component along the direction of motion rotates.
    let shift = &w_hat * (c - 1.0) - x * s;
    let mut cols = f.0.clone();
    for j in 0..cols.ncols() {
        let a = w_hat.dot(&cols.column(j));
        cols.column_mut(j).axpy(a, &shift, 1.0);
        let drift = y.dot(&cols.column(j));
        cols.column_mut(j).axpy(-drift, &y, 1.0);
    }
    orthonormalize_columns(&mut cols, 1.0);
    (Point(y), Frame(cols))
}

fn minkowski(a: &Vector, b: &Vector) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn disk_to_hyperboloid(x: &Vector) -> Vector {
    let r2 = x.norm_squared();
    let den = 1.0 - r2;
    Vector::from_vec(alloc::vec![(1.0 + r2) / den, 2.0 * x[0] / den, 2.0 * x[1] / den])
}

fn push_to_hyperboloid(x: &Vector, v: &Vector) -> Vector {
    let den = 1.0 - x.norm_squared();
    let xv = x.dot(v);
    let k = 4.0 * xv / (den * den);
    Vector::from_vec(alloc::vec![k, 2.0 * v[0] / den + k * x[0], 2.0 * v[1] / den + k * x[1]])
}

fn hyperboloid_to_disk(big: &Vector) -> Vector {
    let den = 1.0 + big[0];
    Vector::from_vec(alloc::vec![big[1] / den, big[2] / den])
}

fn pull_to_disk(big: &Vector, w: &Vector) -> Vector {
    let den = 1.0 + big[0];
    Vector::from_vec(alloc::vec![
        w[1] / den - big[1] * w[0] / (den * den),
        w[2] / den - big[2] * w[0] / (den * den),
    ])
}

fn hyperbolic_step(p: &Point, f: &Frame, v: &Vector) -> (Point, Frame) {
    let x = &p.0;
    let big = disk_to_hyperboloid(x);
    let w = push_to_hyperboloid(x, &f.push(v));
    let theta = minkowski(&w, &w).max(0.0).sqrt();
    let w_hat = &w / theta;
    let (sh, ch) = (theta.sinh(), theta.cosh());
    let big_next = &big * ch + &w_hat * sh;
    let shift = &w_hat * (ch - 1.0) + &big * sh;
    let y = hyperboloid_to_disk(&big_next);
    let mut cols = Matrix::zeros(2, 2);
    for j in 0..2 {
        let c = push_to_hyperboloid(x, &f.0.column(j).clone_owned());
        let a = minkowski(&c, &w_hat);
        let transported = c + &shift * a;
        cols.set_column(j, &pull_to_disk(&big_next, &transported));
    }
    let lambda = 2.0 / (1.0 - y.norm_squared());
    orthonormalize_columns(&mut cols, lambda);
    (Point(y), Frame(cols))
}
