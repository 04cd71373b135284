//! Registry of named test functions with hand-coded gradients.
//!
//! Pointwise functions act on `(x_1, …, x_N)` (one chart point per
//! cylinder time):
//!
//! | name              | value                                  |
//! |-------------------|----------------------------------------|
//! | `coordinate`      | `a Σ_i x_i[c] + b`                     |
//! | `tanh-coordinate` | `tanh(a Σ_i x_i[c] + b)`               |
//! | `tanh-sum`        | `tanh(a Σ_i Σ_j x_i[j] + b)`           |
//! | `exp-neg`         | `exp(−a Σ_i x_i[c])`                   |
//! | `constant`        | `b`                                    |
//!
//! Integral functions are `f(∫₀ᵀ g_1(s, γ_s) ds, …)` with outer `f` one of
//! `identity` (single argument), `sum`, `tanh` (`tanh(a Σ y_j + b)`), and
//! inner `g` one of `unit` (`1`), `time` (`s`), `coordinate` (`x[c]`),
//! `linear` (`⟨w, x⟩`), `tanh-coordinate` (`tanh(x[c])`).

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::damped::{CylinderPointwise, PointwiseFunction};
use crate::error::{bail, Result};
use crate::geometry::ManifoldModel;
use crate::heat::{CylinderIntegral, InnerFunction, OuterFunction};
use crate::linalg::Vector;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerSpec {
    pub name: String,
    #[serde(default)]
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

/// Configuration-level description of a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Pointwise {
        name: String,
        times: Vec<f64>,
        #[serde(default)]
        index: usize,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        shift: f64,
    },
    Integral {
        outer: String,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        shift: f64,
        inner: Vec<InnerSpec>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PointwiseKind {
    Coordinate,
    TanhCoordinate,
    TanhSum,
    ExpNeg,
    Constant,
}

/// A registered pointwise function.
#[derive(Debug, Clone, PartialEq)]
pub struct Registered {
    kind: PointwiseKind,
    index: usize,
    scale: f64,
    shift: f64,
}

impl Registered {
    pub fn from_name(name: &str, index: usize, scale: f64, shift: f64) -> Result<Self> {
        let kind = match name {
            "coordinate" => PointwiseKind::Coordinate,
            "tanh-coordinate" => PointwiseKind::TanhCoordinate,
            "tanh-sum" => PointwiseKind::TanhSum,
            "exp-neg" => PointwiseKind::ExpNeg,
            "constant" => PointwiseKind::Constant,
            other => bail!(Config, "unknown pointwise function '{other}'"),
        };
        if !(scale.is_finite() && shift.is_finite()) {
            bail!(Config, "function parameters must be finite");
        }
        Ok(Registered { kind, index, scale, shift })
    }

    fn inner_sum(&self, args: &[&Vector]) -> f64 {
        match self.kind {
            PointwiseKind::TanhSum => args.iter().map(|x| x.sum()).sum(),
            _ => args.iter().map(|x| x[self.index]).sum(),
        }
    }
}

impl PointwiseFunction for Registered {
    fn name(&self) -> String {
        let base = match self.kind {
            PointwiseKind::Coordinate => "coordinate",
            PointwiseKind::TanhCoordinate => "tanh-coordinate",
            PointwiseKind::TanhSum => "tanh-sum",
            PointwiseKind::ExpNeg => "exp-neg",
            PointwiseKind::Constant => "constant",
        };
        alloc::format!("{base}(index={}, scale={}, shift={})", self.index, self.scale, self.shift)
    }

    fn value(&self, args: &[&Vector]) -> f64 {
        let s = self.inner_sum(args);
        match self.kind {
            PointwiseKind::Coordinate => self.scale * s + self.shift,
            PointwiseKind::TanhCoordinate | PointwiseKind::TanhSum => (self.scale * s + self.shift).tanh(),
            PointwiseKind::ExpNeg => (-self.scale * s).exp(),
            PointwiseKind::Constant => self.shift,
        }
    }

    fn differential(&self, args: &[&Vector], i: usize) -> Option<Vector> {
        let dim = args[i].len();
        let s = self.inner_sum(args);
        let slope = match self.kind {
            PointwiseKind::Coordinate => self.scale,
            PointwiseKind::TanhCoordinate | PointwiseKind::TanhSum => {
                let t = (self.scale * s + self.shift).tanh();
                self.scale * (1.0 - t * t)
            }
            PointwiseKind::ExpNeg => -self.scale * (-self.scale * s).exp(),
            PointwiseKind::Constant => return Some(Vector::zeros(dim)),
        };
        Some(match self.kind {
            PointwiseKind::TanhSum => Vector::from_element(dim, slope),
            _ => {
                let mut g = Vector::zeros(dim);
                g[self.index] = slope;
                g
            }
        })
    }

    fn lipschitz(&self) -> Option<f64> {
        match self.kind {
            PointwiseKind::Constant => Some(0.0),
            PointwiseKind::Coordinate | PointwiseKind::TanhCoordinate => Some(self.scale.abs()),
            PointwiseKind::TanhSum | PointwiseKind::ExpNeg => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum OuterKind {
    Identity,
    Sum,
    Tanh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegisteredOuter {
    kind: OuterKind,
    scale: f64,
    shift: f64,
}

impl RegisteredOuter {
    pub fn from_name(name: &str, scale: f64, shift: f64) -> Result<Self> {
        let kind = match name {
            "identity" => OuterKind::Identity,
            "sum" => OuterKind::Sum,
            "tanh" => OuterKind::Tanh,
            other => bail!(Config, "unknown outer function '{other}'"),
        };
        Ok(RegisteredOuter { kind, scale, shift })
    }
}

impl OuterFunction for RegisteredOuter {
    fn name(&self) -> String {
        match self.kind {
            OuterKind::Identity => "identity".to_string(),
            OuterKind::Sum => "sum".to_string(),
            OuterKind::Tanh => alloc::format!("tanh(scale={}, shift={})", self.scale, self.shift),
        }
    }

    fn value(&self, y: &[f64]) -> f64 {
        let s: f64 = y.iter().sum();
        match self.kind {
            OuterKind::Identity | OuterKind::Sum => s,
            OuterKind::Tanh => (self.scale * s + self.shift).tanh(),
        }
    }

    fn partial(&self, y: &[f64], _j: usize) -> f64 {
        match self.kind {
            OuterKind::Identity | OuterKind::Sum => 1.0,
            OuterKind::Tanh => {
                let t = (self.scale * y.iter().sum::<f64>() + self.shift).tanh();
                self.scale * (1.0 - t * t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum InnerKind {
    Unit,
    Time,
    Coordinate(usize),
    Linear(Vector),
    TanhCoordinate(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegisteredInner {
    kind: InnerKind,
}

impl RegisteredInner {
    pub fn from_spec(spec: &InnerSpec, model: &ManifoldModel) -> Result<Self> {
        let n = model.ambient_dim();
        let check = |c: usize| -> Result<usize> {
            if c >= n {
                bail!(Config, "coordinate index {c} out of range for {n} chart coordinates");
            }
            Ok(c)
        };
        let kind = match spec.name.as_str() {
            "unit" => InnerKind::Unit,
            "time" => InnerKind::Time,
            "coordinate" => InnerKind::Coordinate(check(spec.index)?),
            "tanh-coordinate" => InnerKind::TanhCoordinate(check(spec.index)?),
            "linear" => {
                let Some(w) = &spec.weights else {
                    bail!(Config, "inner function 'linear' needs weights");
                };
                if w.len() != n {
                    bail!(Config, "linear weights have {} entries, need {n}", w.len());
                }
                InnerKind::Linear(Vector::from_column_slice(w))
            }
            other => bail!(Config, "unknown inner function '{other}'"),
        };
        Ok(RegisteredInner { kind })
    }
}

impl InnerFunction for RegisteredInner {
    fn name(&self) -> String {
        match &self.kind {
            InnerKind::Unit => "unit".to_string(),
            InnerKind::Time => "time".to_string(),
            InnerKind::Coordinate(c) => alloc::format!("coordinate({c})"),
            InnerKind::Linear(w) => alloc::format!("linear({:?})", w.as_slice()),
            InnerKind::TanhCoordinate(c) => alloc::format!("tanh-coordinate({c})"),
        }
    }

    fn value(&self, s: f64, x: &Vector) -> f64 {
        match &self.kind {
            InnerKind::Unit => 1.0,
            InnerKind::Time => s,
            InnerKind::Coordinate(c) => x[*c],
            InnerKind::Linear(w) => w.dot(x),
            InnerKind::TanhCoordinate(c) => x[*c].tanh(),
        }
    }

    fn differential(&self, _s: f64, x: &Vector) -> Vector {
        let mut g = Vector::zeros(x.len());
        match &self.kind {
            InnerKind::Unit | InnerKind::Time => {}
            InnerKind::Coordinate(c) => g[*c] = 1.0,
            InnerKind::Linear(w) => g.copy_from(w),
            InnerKind::TanhCoordinate(c) => {
                let t = x[*c].tanh();
                g[*c] = 1.0 - t * t;
            }
        }
        g
    }
}

impl FunctionSpec {
    pub fn build_pointwise(&self, model: &ManifoldModel) -> Result<CylinderPointwise> {
        match self {
            FunctionSpec::Pointwise { name, times, index, scale, shift } => {
                if *index >= model.ambient_dim() {
                    bail!(Config, "coordinate index {index} out of range for {} chart coordinates", model.ambient_dim());
                }
                let f = Registered::from_name(name, *index, *scale, *shift)?;
                CylinderPointwise::new(times.clone(), Arc::new(f))
            }
            FunctionSpec::Integral { .. } => bail!(Config, "expected a pointwise cylinder function"),
        }
    }

    pub fn build_integral(&self, model: &ManifoldModel) -> Result<CylinderIntegral> {
        match self {
            FunctionSpec::Integral { outer, scale, shift, inner } => {
                if inner.is_empty() {
                    bail!(Config, "an integral cylinder function needs at least one inner function");
                }
                let outer = RegisteredOuter::from_name(outer, *scale, *shift)?;
                if outer.kind == OuterKind::Identity && inner.len() != 1 {
                    bail!(Config, "outer 'identity' takes exactly one inner function");
                }
                let inner = inner
                    .iter()
                    .map(|s| RegisteredInner::from_spec(s, model).map(|g| Arc::new(g) as Arc<dyn InnerFunction>))
                    .collect::<Result<Vec<_>>>()?;
                CylinderIntegral::new(Arc::new(outer), inner)
            }
            FunctionSpec::Pointwise { .. } => bail!(Config, "expected an integral cylinder function"),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FunctionSpec::Pointwise { name, times, index, scale, shift } => {
                alloc::format!("{name}(index={index}, scale={scale}, shift={shift}) at t={times:?}")
            }
            FunctionSpec::Integral { outer, scale, shift, inner } => {
                let names: Vec<&str> = inner.iter().map(|s| s.name.as_str()).collect();
                alloc::format!("{outer}(scale={scale}, shift={shift}) of integrals {names:?}")
            }
        }
    }
}
