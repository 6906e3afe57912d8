//! Seeded fixtures for the criterion benchmarks.

use hetroute::generate::{random_points, random_speeds};
use hetroute::instance::{Fleet, Metric};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform euclidean instance with `n` vertices and `k` vehicles whose
/// speeds span up to `spread`.
pub fn euclidean(seed: u64, n: usize, k: usize, spread: f64) -> (Metric, Fleet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metric = Metric::from_points(&random_points(&mut rng, n, false)).expect("points form a metric");
    let fleet = Fleet::round(&random_speeds(&mut rng, k, spread)).expect("speeds are at least 1");
    (metric, fleet)
}
