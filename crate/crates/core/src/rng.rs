//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`SeededRng`], a
//! xoshiro256++ generator seeded from a single `u64` through SplitMix64.
//! Two runs with the same seed produce the same sample streams.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::linalg::{Matrix, Scalar, Vector};

pub type SeededRng = Xoshiro256PlusPlus;

pub fn seeded(seed: u64) -> SeededRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn real_gaussian_vector(rng: &mut impl Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| gaussian(rng))
}

pub fn gaussian_vector(rng: &mut impl Rng, len: usize, complex: bool) -> Vector {
    DVector::from_fn(len, |_, _| {
        let re = gaussian(rng);
        let im = if complex { gaussian(rng) } else { 0.0 };
        Scalar::new(re, im)
    })
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize, complex: bool) -> Matrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re = gaussian(rng);
        let im = if complex { gaussian(rng) } else { 0.0 };
        Scalar::new(re, im)
    })
}

/// Uniform random sign, `true` for +1.
pub fn sign(rng: &mut impl Rng) -> bool {
    rng.random::<bool>()
}
