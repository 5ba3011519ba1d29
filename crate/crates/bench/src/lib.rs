//! Fixtures shared by the benchmarks.

use isoweyl_core::generate::random_binary_spec;
use isoweyl_core::sampling::{sample_points, SamplePlan};
use isoweyl_core::scalar::q;
use isoweyl_core::{BigRational, MetricSpec};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 7;

/// A random binary metric with polynomial coupling functions.
pub fn random_spec() -> MetricSpec {
    random_binary_spec(&mut ChaCha8Rng::seed_from_u64(SEED), "bench")
}

/// `n` admissible sample points of `spec`.
pub fn points(spec: &MetricSpec, n: usize) -> Vec<[f64; 4]> {
    sample_points(spec, &SamplePlan::new(n, SEED)).expect("admissible points")
}

/// An exact point inside the default ordered chart.
pub fn rational_point() -> [BigRational; 4] {
    [q(5, 2), q(3, 2), q(1, 2), q(-1, 2)]
}
