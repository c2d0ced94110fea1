//! Random coalition formation baseline for the comparison experiments.
//!
//! The baseline shuffles the sensors and chunks them into coalitions of the
//! largest size that strictly satisfies the energy budget; inference
//! performance is nondecreasing in coalition size, so maximal feasible
//! coalitions give the baseline its best shot.

use rand::seq::SliceRandom;

use crate::game::{Coalition, Partition};
use crate::network::EnergyModel;
use crate::rng::Stream;

/// Baseline partition policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselinePolicy {
    /// Uniformly random partition into maximal feasible coalitions.
    RandomMaxSize,
}

/// Largest coalition size whose energy `r (k-1) E_t` stays strictly below
/// the budget, capped at the network size. Singletons consume nothing, so
/// the result is at least 1.
pub fn max_feasible_size(energy: &EnergyModel, n: usize) -> usize {
    let mut best = 1;
    for k in 2..=n {
        if energy.is_feasible(k) {
            best = k;
        } else {
            break;
        }
    }
    best
}

/// Uniformly random partition into coalitions of the maximal feasible size,
/// with one remainder coalition when the sensor count is not a multiple.
/// Deterministic per stream state; every coalition satisfies the budget.
pub fn random_partition(n: usize, energy: &EnergyModel, rng: &mut Stream) -> Partition {
    let k = max_feasible_size(energy, n);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let coalitions: Vec<Coalition> = ids
        .chunks(k)
        .map(|chunk| Coalition::new(chunk.to_vec()).expect("chunks are nonempty and disjoint"))
        .collect();
    Partition::new(coalitions, n).expect("chunks partition the id range")
}
