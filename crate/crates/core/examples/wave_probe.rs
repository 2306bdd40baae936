//! Measures avalanche wave counts and depths across drifts, to size the
//! feasible simulation envelope for the Z-supported model.

use frogrange_core::distribution::{DriftParam, FrogConfig};
use frogrange_core::simulator::{replica_rng, sample_range_allz, SimConfig};
use std::time::Instant;

fn main() {
    for &(rho, n, replicas) in &[
        (0.5f64, 1u64, 2000u64),
        (0.6, 1, 2000),
        (0.7, 1, 2000),
        (0.7, 2, 2000),
        (0.8, 1, 500),
        (0.8, 2, 200),
        (0.85, 1, 100),
        (0.9, 1, 20),
    ] {
        let drift = DriftParam::from_rho(rho).unwrap();
        let cfg = FrogConfig::all_z(n).unwrap();
        let sim = SimConfig::new(drift, cfg, replicas, 12345, 1e-6, None).unwrap();
        let start = Instant::now();
        let mut total_depth = 0u64;
        let mut total_waves = 0u64;
        let mut max_waves = 0u64;
        let mut capped = 0u64;
        for i in 0..replicas {
            let mut rng = replica_rng(12345, i);
            match sample_range_allz(&sim, &mut rng) {
                Ok((depth, waves)) => {
                    total_depth += depth;
                    total_waves += waves;
                    max_waves = max_waves.max(waves);
                }
                Err(_) => capped += 1,
            }
        }
        let done = replicas - capped;
        println!(
            "rho={rho} n={n} replicas={replicas}: mean_depth={:.1} mean_waves={:.1} max_waves={} capped={} elapsed={:.2?}",
            total_depth as f64 / done.max(1) as f64,
            total_waves as f64 / done.max(1) as f64,
            max_waves,
            capped,
            start.elapsed()
        );
    }
}
