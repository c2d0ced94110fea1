//! Experiment runner for copula-based coalition formation in sensor
//! networks: configuration loading, the four experiments, CSV/SVG emission
//! and run manifests.

// Validation uses `!(x > bound)` so that NaN parameters fail closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod config;
pub mod csvio;
pub mod experiments;
pub mod manifest;
pub mod svg;
