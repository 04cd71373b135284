//! Monte Carlo estimators with standard errors.

use alloc::vec::Vec;
// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

/// A Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl EstimateWithError {
    pub fn scaled(self, c: f64) -> Self {
        EstimateWithError { value: self.value * c, std_error: self.std_error * c.abs(), n_samples: self.n_samples }
    }
}

fn need_two(xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        bail!(Precondition, "need at least two samples, got {}", xs.len());
    }
    Ok(())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Sample mean with standard error `s / √n`.
pub fn mean_estimate(xs: &[f64]) -> Result<EstimateWithError> {
    need_two(xs)?;
    let n = xs.len();
    Ok(EstimateWithError { value: mean(xs), std_error: (sample_variance(xs) / n as f64).sqrt(), n_samples: n })
}

/// Unbiased variance with standard error `√((m₄ − s⁴)/n)`.
pub fn variance_estimate(xs: &[f64]) -> Result<EstimateWithError> {
    need_two(xs)?;
    if xs.iter().all(|&x| x == xs[0]) {
        return Ok(EstimateWithError { value: 0.0, std_error: 0.0, n_samples: xs.len() });
    }
    let n = xs.len() as f64;
    let m = mean(xs);
    let v = sample_variance(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let var_of_var = ((m4 - v * v) / n).max(0.0);
    Ok(EstimateWithError { value: v, std_error: var_of_var.sqrt(), n_samples: xs.len() })
}

fn x_log_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Plug-in `Ent(F²) = Ê[F² log F²] − Ê[F²] log Ê[F²]` from samples of `F`.
pub fn entropy_plugin(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let (mut a, mut b) = (0.0, 0.0);
    for v in values {
        let s = v * v;
        a += x_log_x(s);
        b += s;
    }
    let (a, b) = (a / n, b / n);
    (a - x_log_x(b)).max(0.0)
}

/// Entropy of `F²` with a nonparametric bootstrap standard error.
pub fn entropy_estimate(values: &[f64], resamples: usize, seed: u64) -> Result<EstimateWithError> {
    need_two(values)?;
    let n = values.len();
    let value = entropy_plugin(values);
    let first = values[0] * values[0];
    if values.iter().all(|v| v * v == first) {
        return Ok(EstimateWithError { value: 0.0, std_error: 0.0, n_samples: n });
    }
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let sq_log: Vec<f64> = sq.iter().map(|&s| x_log_x(s)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let (mut a, mut b) = (0.0, 0.0);
        for _ in 0..n {
            let i = rng.random_range(0..n);
            a += sq_log[i];
            b += sq[i];
        }
        let (a, b) = (a / n as f64, b / n as f64);
        stats.push(a - x_log_x(b));
    }
    let se = if resamples >= 2 { sample_variance(&stats).sqrt() } else { 0.0 };
    Ok(EstimateWithError { value, std_error: se, n_samples: n })
}
