//! Deterministic inputs shared by the benchmarks.

use lhedge::SquareMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense column-stochastic matrix with entries drawn from a seeded stream.
pub fn random_stochastic(n: usize, seed: u64) -> SquareMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = SquareMatrix::zeros(n);
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = col.iter().sum();
        for (i, v) in col.iter().enumerate() {
            q.set(i, j, v / total);
        }
    }
    q
}

/// `rounds` loss vectors uniform in `[0, 1]^n`.
pub fn loss_stream(n: usize, rounds: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rounds).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect()
}
