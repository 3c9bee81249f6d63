//! Fixtures shared by the criterion benchmarks.

use sqrtlasso_core::{generate, GenSpec, Problem};

/// Default synthetic design with three true coefficients at noise level `sigma`.
pub fn fixture(n: usize, d: usize, sigma: f64, seed: u64) -> Problem {
    generate(&GenSpec::new(n, d, sigma, seed))
        .and_then(|ds| ds.problem())
        .expect("valid fixture")
}
