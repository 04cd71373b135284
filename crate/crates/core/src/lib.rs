//! Numerics for log-Sobolev and spectral-gap bounds on the path space of a
//! reflecting diffusion.
//!
//! The crate is `no_std` (it needs `alloc`). It provides:
//!
//! * [`geometry`]: model manifolds with closed-form curvature, second
//!   fundamental form, geodesic stepping and parallel transport.
//! * [`sampler`]: an Euler scheme for the reflecting horizontal diffusion,
//!   with local time accumulated at the boundary.
//! * [`damped`]: the multiplicative functional `Q`, Malliavin and damped
//!   gradients of pointwise cylinder functions.
//! * [`constants`]: the explicit constants (random measure mass, `A`/`B`
//!   weights, `Λ(t,T)` and its supremum, spectral-gap bounds, heat-process
//!   constants).
//! * [`inequality`] and [`heat`]: Monte Carlo estimators and verification
//!   reports for the inequalities.
//!
//! IO, configuration files and the command line live in the companion
//! `pathgap` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constants;
pub mod damped;
pub mod error;
pub mod executor;
pub mod functions;
pub mod geometry;
pub mod heat;
pub mod inequality;
pub mod linalg;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use constants::CurvatureBounds;
pub use error::{Error, Result};
pub use executor::{PathExecutor, Sequential};
pub use geometry::{Frame, ManifoldModel, ModelKind, Point};
pub use inequality::{EstimateWithError, InequalityReport, Verdict};
pub use sampler::{PathGrid, PathSample, SamplerConfig};
