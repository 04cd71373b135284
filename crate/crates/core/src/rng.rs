//! Counter-based Gaussian streams.
//!
//! The increment of path `k` at step `j` is a pure function of
//! `(base_seed, k, j)`: ChaCha8 is keyed by the base seed, the path index
//! selects the stream, and every step consumes a fixed number of words.

// Unused when std is linked into the build; its inherent methods take over.
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Vector;

/// Uniform variate in `(0, 1]` from 53 random bits.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Box–Muller transform of two uniforms in `(0, 1]`.
#[inline]
pub fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = core::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// SplitMix64 mix of `(base, index)`; used to derive per-cell and
/// per-purpose seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal vectors for one path.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    dim: usize,
}

impl GaussianStream {
    pub fn new(base_seed: u64, path_index: u64, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(path_index);
        GaussianStream { rng, dim }
    }

    /// 32-bit words consumed by one call to [`GaussianStream::fill`].
    pub fn words_per_step(&self) -> u128 {
        (self.dim.div_ceil(2) * 4) as u128
    }

    /// Position the stream at the start of `step` (0-based).
    pub fn seek(&mut self, step: u64) {
        self.rng.set_word_pos(step as u128 * self.words_per_step());
    }

    /// Fill `out` with `scale · N(0, Id)`.
    pub fn fill(&mut self, out: &mut Vector, scale: f64) {
        let mut i = 0;
        while i < self.dim {
            let u1 = open_unit(self.rng.next_u64());
            let u2 = open_unit(self.rng.next_u64());
            let (a, b) = box_muller(u1, u2);
            out[i] = a * scale;
            if i + 1 < self.dim {
                out[i + 1] = b * scale;
            }
            i += 2;
        }
    }

    pub fn next_vector(&mut self, scale: f64) -> Vector {
        let mut v = Vector::zeros(self.dim);
        self.fill(&mut v, scale);
        v
    }
}
