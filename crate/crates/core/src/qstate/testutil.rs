//! Random states for property tests.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{c, CMatrix, DensityMatrix};

/// Hilbert–Schmidt random state of the given rank.
pub fn random_state(dim: usize, rank: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: CMatrix = DMatrix::from_fn(dim, rank, |_, _| {
        c(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        )
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / c(tr, 0.0)).expect("valid random state")
}

pub fn two_qubit_state() -> impl Strategy<Value = DensityMatrix> {
    (any::<u64>(), 1usize..=4).prop_map(|(seed, rank)| random_state(4, rank, seed))
}

pub fn qubit_state() -> impl Strategy<Value = DensityMatrix> {
    (any::<u64>(), 1usize..=2).prop_map(|(seed, rank)| random_state(2, rank, seed))
}
