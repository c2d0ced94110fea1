//! Copula-based coalition formation for distributed inference in
//! energy-constrained sensor networks.
//!
//! Sensors observe a common phenomenon with spatially dependent noise. Each
//! sensor wants to maximize its own inference performance (average Fisher
//! information for estimation, Kullback-Leibler divergence for detection) by
//! sharing observations inside a coalition, but inter-sensor communication
//! costs energy. The crate models the dependence with copulas, splits the
//! dependence contribution of a coalition into a diversity gain and a
//! redundancy loss, and searches for a stable partition of the network with a
//! Pareto-order merge-and-split game.
//!
//! Module map:
//!
//! - [`copula`]: copula densities, sampling, Kendall-tau conversions,
//!   partial correlations and positive-semidefinite repair.
//! - [`network`]: sensor deployment, marginal observation models, the
//!   distance-based dependence model and the energy model.
//! - [`metrics`]: coalition inference metrics, their copula-induced parts,
//!   the D-vine diversity/redundancy decomposition and the Monte-Carlo
//!   estimators for non-Gaussian coalitions.
//! - [`game`]: coalition values, the merge-and-split algorithm and
//!   stability checks.
//! - [`baselines`]: the random max-size coalition formation baseline.
//! - [`rng`]: seed derivation for reproducible, splittable random streams.

// Validation uses `!(x > bound)` so that NaN parameters fail closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod copula;
pub mod game;
pub mod metrics;
pub mod network;
pub mod rng;
pub mod special;

// Matrix types appear in the public API (network construction, copula
// parameters); re-export the crate so downstream users stay on one version.
pub use nalgebra;
