//! Seeded inputs shared by the benchmarks.

use edr_core::ReturnSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// `n_assets` independent normal daily return series of length `len`.
pub fn synthetic_assets(n_assets: usize, len: usize, seed: u64) -> Vec<ReturnSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_assets)
        .map(|i| {
            let mu = 0.0002 + 0.0001 * i as f64;
            let sigma = 0.008 + 0.004 * i as f64;
            let normal = Normal::new(mu, sigma).expect("valid normal");
            let values = (0..len).map(|_| normal.sample(&mut rng).max(-0.5)).collect();
            ReturnSeries::from_values(format!("asset{i}"), values).expect("valid series")
        })
        .collect()
}
