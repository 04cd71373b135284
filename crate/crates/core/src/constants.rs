//! Explicit constants: the random measure `μ_t`, the weights `A_t`/`B_t`,
//! the function `Λ(t, T)` with its supremum, spectral-gap bounds and the
//! heat-process constants.
//!
//! Closed forms are written in terms of
//! `E(K, s) = (1 − e^{−Ks}) / K` (with `E(0, s) = s`), which removes the
//! cancellations of the textbook expressions for small `|K|` and makes the
//! `K → 0` limits exact. For instance
//!
//! `Λ(t,T) = 1 + K*(E(K₂,T−t) + E(K₂,t)) + K*²·½E(K₂,t)(E(K₂,T) + E(K₂,T−t))`
//!
//! with `K* = |K₁| ∨ |K₂|`.

use alloc::vec::Vec;
// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::sampler::PathSample;

/// Constant bounds `K₂ ≤ Ric^Z ≤ K₁`, `σ₂ ≤ II ≤ σ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureBounds {
    pub k1: f64,
    pub k2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl CurvatureBounds {
    pub fn new(k1: f64, k2: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        let b = CurvatureBounds { k1, k2, sigma1, sigma2 };
        b.validate()?;
        Ok(b)
    }

    pub fn zero() -> Self {
        CurvatureBounds { k1: 0.0, k2: 0.0, sigma1: 0.0, sigma2: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.k1, self.k2, self.sigma1, self.sigma2];
        if all.iter().any(|v| !v.is_finite()) {
            bail!(Config, "curvature bounds must be finite");
        }
        if self.k2 > self.k1 {
            bail!(Config, "need K2 <= K1, got K2 = {} > K1 = {}", self.k2, self.k1);
        }
        if self.sigma2 > self.sigma1 {
            bail!(Config, "need sigma2 <= sigma1, got {} > {}", self.sigma2, self.sigma1);
        }
        Ok(())
    }

    /// `|K₁| ∨ |K₂|`.
    pub fn k_max(&self) -> f64 {
        self.k1.abs().max(self.k2.abs())
    }

    /// `|σ₁| ∨ |σ₂|`.
    pub fn sigma_max(&self) -> f64 {
        self.sigma1.abs().max(self.sigma2.abs())
    }

    /// Signed `β = (|K₁| ∨ |K₂|) / K₂`; `None` when `K₂ = 0`.
    pub fn beta(&self) -> Option<f64> {
        (self.k2 != 0.0).then(|| self.k_max() / self.k2)
    }

    pub fn all_zero(&self) -> bool {
        self.k1 == 0.0 && self.k2 == 0.0 && self.sigma1 == 0.0 && self.sigma2 == 0.0
    }
}

/// `(1 − e^{−k s}) / k`, continuous at `k = 0`.
pub fn damped_length(k: f64, s: f64) -> f64 {
    let x = k * s;
    if x == 0.0 {
        s
    } else {
        -(-x).exp_m1() / k
    }
}

/// Path weights `A[0..=n]`, `B[0..=n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathConstants {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// `μ_{t_k}([t_k, T])` for every grid index, from local-time increments
/// `dl` (length `n + 1`, `dl[0] = 0`).
///
/// Uses `μ_k = e^{−K₂dt − σ₂dl_{k+1}} (K* dt + σ* dl_{k+1} + μ_{k+1})`.
pub fn mu_masses_from_increments(dt: f64, dl: &[f64], bounds: &CurvatureBounds) -> Vec<f64> {
    let n = dl.len() - 1;
    let (kx, sx) = (bounds.k_max(), bounds.sigma_max());
    let mut mu = alloc::vec![0.0; n + 1];
    for k in (0..n).rev() {
        let decay = (-bounds.k2 * dt - bounds.sigma2 * dl[k + 1]).exp();
        mu[k] = decay * (kx * dt + sx * dl[k + 1] + mu[k + 1]);
    }
    mu
}

pub fn mu_masses(path: &PathSample, bounds: &CurvatureBounds) -> Vec<f64> {
    mu_masses_from_increments(path.dt(), &path.dl, bounds)
}

/// `μ_{t_k}([t_k, T])` at a single index.
pub fn mu_mass(path: &PathSample, bounds: &CurvatureBounds, k: usize) -> Result<f64> {
    if k > path.n_steps() {
        bail!(Precondition, "grid index {k} beyond n = {}", path.n_steps());
    }
    Ok(mu_masses(path, bounds)[k])
}

/// `A` and `B` from local-time increments; `O(n)` via
/// `S_{k+1} = e^{−K₂dt − σ₂dl_{k+1}} (S_k + (1 + μ_k) dt)`,
/// `A_k = 1 + μ_k + K* S_k`, `B_k = σ* S_k`.
pub fn compute_a_b_from_increments(dt: f64, dl: &[f64], bounds: &CurvatureBounds) -> PathConstants {
    let n = dl.len() - 1;
    let mu = mu_masses_from_increments(dt, dl, bounds);
    let (kx, sx) = (bounds.k_max(), bounds.sigma_max());
    let mut a = Vec::with_capacity(n + 1);
    let mut b = Vec::with_capacity(n + 1);
    let mut s = 0.0;
    for k in 0..=n {
        a.push(1.0 + mu[k] + kx * s);
        b.push(sx * s);
        if k < n {
            let decay = (-bounds.k2 * dt - bounds.sigma2 * dl[k + 1]).exp();
            s = decay * (s + (1.0 + mu[k]) * dt);
        }
    }
    PathConstants { a, b }
}

pub fn compute_a_b(path: &PathSample, bounds: &CurvatureBounds) -> PathConstants {
    compute_a_b_from_increments(path.dt(), &path.dl, bounds)
}

/// `Λ(t, T)` for `0 ≤ t ≤ T`; the `K₂ = 0` value is the analytic limit
/// `1 + K*T + K*²(Tt − t²/2)`.
pub fn lambda_fn(t: f64, horizon: f64, k1: f64, k2: f64) -> f64 {
    let kx = k1.abs().max(k2.abs());
    let e_t = damped_length(k2, t);
    let e_rest = damped_length(k2, horizon - t);
    let e_full = damped_length(k2, horizon);
    1.0 + kx * (e_rest + e_t) + 0.5 * kx * kx * e_t * (e_full + e_rest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupMethod {
    ClosedForm,
    /// Grid maximization (used when `K₂ = 0`).
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSup {
    pub t_star: f64,
    pub value: f64,
    pub method: SupMethod,
}

const GRID_POINTS: usize = 100_000;

/// Maximize `f` on a uniform grid of `[0, T]`.
pub fn grid_max(horizon: f64, points: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best = (0.0, f(0.0));
    for i in 1..=points {
        let t = (horizon * i as f64 / points as f64).min(horizon);
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Stationary point of `Λ(·, T)` for `K₂ > 0`:
/// `e^{2K₂t₀} = (1 + β/(2+β)(1 − e^{−K₂T})) e^{K₂T}`.
pub fn lambda_stationary_point(horizon: f64, k1: f64, k2: f64) -> Option<f64> {
    if k2 <= 0.0 {
        return None;
    }
    let beta = k1.abs().max(k2.abs()) / k2;
    let c = beta / (2.0 + beta) * (-(-k2 * horizon).exp_m1());
    Some((c.ln_1p() + k2 * horizon) / (2.0 * k2))
}

/// `sup_{t∈[0,T]} Λ(t, T)` from the published closed form (`K₂ > 0`).
pub fn sup_lambda_closed_form(horizon: f64, k1: f64, k2: f64) -> f64 {
    let beta = k1.abs().max(k2.abs()) / k2;
    let e = (-k2 * horizon).exp();
    let root = (1.0 + beta / (2.0 + beta) * (1.0 - e)).sqrt();
    let half = (-k2 * horizon / 2.0).exp();
    (1.0 + beta).powi(2) - (beta + beta * beta / 2.0) * root * half - (beta + beta * beta - beta * beta / 2.0 * e) / root * half
}

/// `sup_{t∈[0,T]} Λ(t, T)` with its maximizer.
pub fn sup_lambda(horizon: f64, k1: f64, k2: f64) -> LambdaSup {
    let kx = k1.abs().max(k2.abs());
    if k2 < 0.0 {
        let l0 = 1.0 + kx * damped_length(k2, horizon);
        LambdaSup { t_star: horizon, value: 0.5 + 0.5 * l0 * l0, method: SupMethod::ClosedForm }
    } else if k2 > 0.0 {
        let t0 = lambda_stationary_point(horizon, k1, k2).unwrap_or(horizon);
        LambdaSup { t_star: t0, value: sup_lambda_closed_form(horizon, k1, k2), method: SupMethod::ClosedForm }
    } else {
        let (t_star, value) = grid_max(horizon, GRID_POINTS, |t| lambda_fn(t, horizon, k1, k2));
        LambdaSup { t_star, value, method: SupMethod::Grid }
    }
}

/// Upper bound on the inverse spectral gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    pub value: f64,
    pub method: SupMethod,
}

/// The `K₂ > 0` inverse-spectral-gap bound as stated in the corollary:
/// `(1+β)² − 2√((β+β²/2)(β+β²−β²e^{−K₂T}/2)) e^{−K₂T/2}`.
pub fn spectral_gap_closed_form(horizon: f64, k1: f64, k2: f64) -> f64 {
    let beta = k1.abs().max(k2.abs()) / k2;
    let e = (-k2 * horizon).exp();
    let prod = (beta + beta * beta / 2.0) * (beta + beta * beta - beta * beta / 2.0 * e);
    (1.0 + beta).powi(2) - 2.0 * prod.sqrt() * (-k2 * horizon / 2.0).exp()
}

pub fn spectral_gap_bound(horizon: f64, k1: f64, k2: f64) -> SpectralBound {
    if k2 < 0.0 {
        let l0 = 1.0 + k1.abs().max(k2.abs()) * damped_length(k2, horizon);
        SpectralBound { value: 0.5 + 0.5 * l0 * l0, method: SupMethod::ClosedForm }
    } else if k2 > 0.0 {
        SpectralBound { value: spectral_gap_closed_form(horizon, k1, k2), method: SupMethod::ClosedForm }
    } else {
        let s = sup_lambda(horizon, k1, k2);
        SpectralBound { value: s.value, method: SupMethod::Grid }
    }
}

/// `φ(s) = ∫_s^T e^{−K(u−s)} du` (convex case, boundary terms dropped).
pub fn heat_phi(s: f64, horizon: f64, k: f64) -> f64 {
    damped_length(k, horizon - s)
}

/// `A(s) = ∫_0^s φ(u) e^{−K(s−u)} du
///       = (2 − 2e^{−Ks} + e^{−K(T+s)} − e^{−K(T−s)}) / (2K²)`,
/// evaluated as `½E(K,s)(E(K,T) + E(K,T−s))`.
pub fn heat_a(s: f64, horizon: f64, k: f64) -> f64 {
    0.5 * damped_length(k, s) * (damped_length(k, horizon) + damped_length(k, horizon - s))
}

/// Root in `[0, T]` of `e^{2Ks} = 2e^{KT} − 1`, where `A′` vanishes.
/// Exists for `K > 0`; for `K = 0` the limit point `T` is returned.
pub fn heat_stationary_point(horizon: f64, k: f64) -> Option<f64> {
    if k > 0.0 {
        Some((2.0 * (k * horizon).exp_m1()).ln_1p() / (2.0 * k))
    } else if k == 0.0 {
        Some(horizon)
    } else {
        None
    }
}

/// `(s*, sup_{s∈[0,T]} A(s))`.
pub fn sup_heat_a(horizon: f64, k: f64) -> (f64, f64) {
    let s = heat_stationary_point(horizon, k).unwrap_or(horizon);
    (s, heat_a(s, horizon, k))
}

/// The two-case constant `C(T, K)` as published: for `K ≥ 0` it is
/// `(1/2K²)[2 − (2−e^{−KT})/√(2e^{KT}−1) − e^{−KT}√(2e^{KT}−1)]`, which
/// equals `A(s*)`; for `K < 0` it is `(1 − e^{−KT})²/K² = 2A(T)`.
pub fn heat_c(horizon: f64, k: f64) -> f64 {
    if k >= 0.0 {
        sup_heat_a(horizon, k).1
    } else {
        damped_length(k, horizon).powi(2)
    }
}

/// `2 sup_s A(s)`: the constant that follows from the heat inequality
/// `Ent ≤ 2 E∫A|∇F|²` for every sign of `K`.
pub fn heat_c_coarse(horizon: f64, k: f64) -> f64 {
    2.0 * sup_heat_a(horizon, k).1
}

/// Path-dependent `φ_k` and `A_k` of the heat inequality with local-time
/// weights `e^{−K(u−s) − σ(l_u − l_s)}` (left-endpoint sums):
/// `φ_k = dt + e^{−Kdt−σdl_{k+1}} φ_{k+1}` and
/// `A_u = φ_u dt + e^{−Kdt−σdl_u} A_{u−1}`.
pub fn heat_weights(dt: f64, dl: &[f64], k: f64, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let n = dl.len() - 1;
    let mut phi = alloc::vec![0.0; n + 1];
    for j in (0..n).rev() {
        phi[j] = dt + (-k * dt - sigma * dl[j + 1]).exp() * phi[j + 1];
    }
    let mut a = alloc::vec![0.0; n + 1];
    let mut prev = 0.0;
    for u in 0..n {
        let carry = if u == 0 { 0.0 } else { (-k * dt - sigma * dl[u]).exp() * prev };
        a[u] = phi[u] * dt + carry;
        prev = a[u];
    }
    (phi, a)
}

/// One row of the constants table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormConstants {
    pub beta: Option<f64>,
    pub lambda_sup: f64,
    pub t_star: f64,
    pub lambda_method: SupMethod,
    pub spectral_bound: f64,
    /// Published `C(T, K)` with `K = K₂`.
    pub heat_c: f64,
    /// `2 sup_s A(s)` with `K = K₂`.
    pub heat_c_coarse: f64,
}

pub fn closed_form_constants(horizon: f64, bounds: &CurvatureBounds) -> ClosedFormConstants {
    let sup = sup_lambda(horizon, bounds.k1, bounds.k2);
    ClosedFormConstants {
        beta: bounds.beta(),
        lambda_sup: sup.value,
        t_star: sup.t_star,
        lambda_method: sup.method,
        spectral_bound: spectral_gap_bound(horizon, bounds.k1, bounds.k2).value,
        heat_c: heat_c(horizon, bounds.k2),
        heat_c_coarse: heat_c_coarse(horizon, bounds.k2),
    }
}
