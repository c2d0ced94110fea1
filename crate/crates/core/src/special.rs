//! Scalar distribution helpers shared by the copula and metric code.
//!
//! The standard normal and Student-t CDF/quantile pairs sit on the hot path
//! of every Monte-Carlo estimator, so the t functions get a closed-form fast
//! path for four degrees of freedom (the only value the network experiments
//! use) and fall back to `statrs` otherwise.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf;

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile. `p` must lie in (0, 1).
#[inline]
pub fn norm_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p)
}

/// Student-t CDF with `nu` degrees of freedom.
#[inline]
pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if nu == 4.0 {
        // For nu = 4 the CDF reduces to a cubic in s = x/sqrt(1 + x^2/4).
        let s = x / (1.0 + 0.25 * x * x).sqrt();
        0.5 + 0.375 * s * (1.0 - s * s / 12.0)
    } else {
        StudentsT::new(0.0, 1.0, nu)
            .expect("valid degrees of freedom")
            .cdf(x)
    }
}

/// Student-t quantile with `nu` degrees of freedom. `p` must lie in (0, 1).
#[inline]
pub fn t_quantile(p: f64, nu: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    if nu == 4.0 {
        // Closed form for nu = 4 (trigonometric solution of the cubic CDF).
        let alpha = 4.0 * p * (1.0 - p);
        let sqrt_alpha = alpha.sqrt();
        let q = ((sqrt_alpha.min(1.0).acos()) / 3.0).cos() / sqrt_alpha;
        let x = 2.0 * (q - 1.0).max(0.0).sqrt();
        if p < 0.5 {
            -x
        } else {
            x
        }
    } else {
        StudentsT::new(0.0, 1.0, nu)
            .expect("valid degrees of freedom")
            .inverse_cdf(p)
    }
}
