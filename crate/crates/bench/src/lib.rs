//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use approxlab::zoo::{make_group, make_set, Combine, GroupSpec, SetSpec};
use approxlab::{ElementSet, FiniteMetricGroup};

/// `Z_n x Z_n` with the sum of Lee metrics.
pub fn torus(n: usize) -> Arc<FiniteMetricGroup> {
    make_group(&GroupSpec::product(vec![GroupSpec::cyclic_lee(n); 2], Combine::Sum)).expect("zoo group")
}

/// A seeded random symmetric set of `size` elements containing 1.
pub fn random_set(g: &Arc<FiniteMetricGroup>, size: usize, seed: u64) -> ElementSet {
    make_set(g, &SetSpec::RandomSymmetric { size }, seed).expect("zoo set")
}
