//! Property suites for the metric layer: the closed-form landmark checks of
//! the pairwise dependence terms, monotonicity of coalition metrics in the
//! coalition, the vine-sum identity, and the finite-difference bias order of
//! the Fisher-information estimator.

mod common;

use coalsim_core::copula::CopulaFamily;
use coalsim_core::metrics::{
    coalition_fi_gaussian, coalition_kld_gaussian, fi_curvature_term,
    pairwise_decomposition_gaussian, pairwise_gafi_gaussian, pairwise_gkld_gaussian, InferenceTask,
    ThetaEval,
};
use coalsim_core::network::{
    deploy_uniform, sensor_variance, EnergyModel, MarginalModel, NetworkModel, Sensor,
    VariancePolicy,
};
use coalsim_core::rng::RunSeed;
use coalsim_core::special::norm_cdf;
use common::{gauss_hermite, gaussian_net_with, random_spd_correlation};
use nalgebra::DMatrix;
use rand::Rng;

fn uniform_in(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Landmark suite shared by the two pairwise dependence terms: convexity on
/// a grid, the analytic minimum, and the two zero crossings.
fn check_pairwise_landmarks(eval: impl Fn(f64) -> f64, rho_star: f64, min_value: f64, rho2: f64) {
    assert!(
        (eval(rho_star) - min_value).abs() < 1e-8,
        "minimum value: got {} expected {min_value}",
        eval(rho_star)
    );
    assert!(eval(0.0).abs() < 1e-8, "zero at origin");
    assert!(
        eval(rho2).abs() < 1e-8,
        "zero at second root: {}",
        eval(rho2)
    );

    // Convexity: second finite differences on a 199-point grid in
    // (-0.99, 0.99).
    let grid: Vec<f64> = (0..199).map(|i| -0.99 + 0.01 * i as f64).collect();
    for w in grid.windows(3) {
        let second = eval(w[0]) - 2.0 * eval(w[1]) + eval(w[2]);
        assert!(second >= -1e-8, "convexity violated at rho = {}", w[1]);
    }

    // Nonpositive exactly between the two roots, and the minimum is global
    // on the grid.
    let (lo, hi) = (rho2.min(0.0), rho2.max(0.0));
    for &r in &grid {
        let v = eval(r);
        if r > lo + 1e-9 && r < hi - 1e-9 {
            assert!(v <= 1e-10, "positive inside the root interval at {r}");
        }
        assert!(v >= min_value - 1e-8, "below the analytic minimum at {r}");
    }
}

#[test]
fn gafi_landmarks_on_random_parameters() {
    let mut rng = RunSeed(2024).stream();
    let mut done = 0;
    while done < 100 {
        let sx = uniform_in(&mut rng, 0.3, 2.5);
        let sy = uniform_in(&mut rng, 0.3, 2.5);
        let mx = uniform_in(&mut rng, 0.2, 2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let my = uniform_in(&mut rng, 0.2, 2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let rho_star = (sx / sy) * (my / mx);
        if rho_star.abs() > 0.995 {
            continue;
        }
        let rho2 = 2.0 * mx * my * sx * sy / (mx * mx * sy * sy + my * my * sx * sx);
        check_pairwise_landmarks(
            |rho| pairwise_gafi_gaussian(sx, sy, mx, my, rho).unwrap(),
            rho_star,
            -my * my / (sy * sy),
            rho2,
        );
        done += 1;
    }
}

#[test]
fn gafi_equal_scale_case_is_monotone_with_opposite_sign() {
    let (sigma, mu) = (1.3, 0.9);
    let mut prev = f64::INFINITY;
    for i in 0..199 {
        let rho = -0.99 + 0.01 * i as f64;
        let v = pairwise_gafi_gaussian(sigma, sigma, mu, mu, rho).unwrap();
        if rho.abs() > 1e-12 {
            assert!(
                (v >= 0.0) == (rho <= 0.0),
                "sign mismatch at rho = {rho}: {v}"
            );
        }
        assert!(v < prev + 1e-12, "not strictly decreasing at rho = {rho}");
        prev = v;
    }
}

#[test]
fn gkld_landmarks_on_random_parameters() {
    let mut rng = RunSeed(4048).stream();
    for _ in 0..100 {
        let sx = uniform_in(&mut rng, 0.3, 2.0);
        let sy = sx + uniform_in(&mut rng, 0.01, 2.0); // sigma_x <= sigma_y
        let theta0 = uniform_in(&mut rng, -1.0, 1.0);
        let theta1 = theta0 + uniform_in(&mut rng, 0.2, 2.0);
        let shift = theta1 - theta0;
        let rho_star = sx / sy;
        let rho2 = 2.0 * sx * sy / (sx * sx + sy * sy);
        check_pairwise_landmarks(
            |rho| pairwise_gkld_gaussian(sx, sy, theta0, theta1, rho).unwrap(),
            rho_star,
            -shift * shift / (2.0 * sy * sy),
            rho2,
        );
    }
}

#[test]
fn gkld_equal_variance_closed_form_and_monotonicity() {
    let (sigma, theta0, theta1) = (0.8, 0.1, 1.6);
    let shift = theta1 - theta0;
    let mut prev = f64::INFINITY;
    for i in 0..199 {
        let rho = -0.99 + 0.01 * i as f64;
        let v = pairwise_gkld_gaussian(sigma, sigma, theta0, theta1, rho).unwrap();
        let expected = -(shift * shift / (sigma * sigma)) * rho / (1.0 + rho);
        assert!((v - expected).abs() < 1e-12, "closed form at rho = {rho}");
        assert!(v < prev + 1e-12, "not strictly decreasing at rho = {rho}");
        prev = v;
    }
}

/// Random all-Gaussian network from a uniform deployment with
/// inverse-distance variances.
fn random_deployment_net(n: usize, seed: u64) -> NetworkModel {
    let mut rng = RunSeed(seed).stream();
    loop {
        let locations = deploy_uniform(n, [1.5, 1.5], &mut rng).unwrap();
        let source = [
            uniform_in(&mut rng, 0.0, 1.5),
            uniform_in(&mut rng, 0.0, 1.5),
        ];
        let sensors: Result<Vec<Sensor>, _> = locations
            .iter()
            .enumerate()
            .map(|(id, &location)| {
                sensor_variance(location, source, VariancePolicy::InverseDistance, id).map(|var| {
                    Sensor {
                        id,
                        location,
                        marginal: MarginalModel::GaussianMean { sigma: var.sqrt() },
                    }
                })
            })
            .collect();
        let energy = EnergyModel::new(1.0, 1.0, 4.0, 1.0).unwrap();
        match sensors {
            Ok(s) => match NetworkModel::new(s, source, energy) {
                Ok(net) => return net,
                Err(_) => continue,
            },
            Err(_) => continue,
        }
    }
}

#[test]
fn metrics_are_nondecreasing_in_the_coalition() {
    // 200 random Gaussian networks with up to 6 sensors: for every nested
    // pair of coalitions the Fisher information and the KLD of the superset
    // dominate.
    let mut rng = RunSeed(77_711).stream();
    for case in 0..200u64 {
        let n = 2 + (case % 5) as usize;
        let corr = random_spd_correlation(n, &mut rng);
        let sigmas: Vec<f64> = (0..n).map(|_| uniform_in(&mut rng, 0.5, 2.0)).collect();
        let energy = EnergyModel::new(1.0, 1.0, 4.0, 1.0).unwrap();
        let net = gaussian_net_with(&sigmas, corr, energy);
        let full = (1usize << n) - 1;
        let mut fi = vec![f64::NAN; full + 1];
        let mut kld = vec![f64::NAN; full + 1];
        for mask in 1..=full {
            let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            fi[mask] = coalition_fi_gaussian(&members, &net).unwrap().total;
            kld[mask] = coalition_kld_gaussian(&members, &net, 0.3, 1.5)
                .unwrap()
                .total;
        }
        for mask in 1..=full {
            // Proper nonempty subsets of mask.
            let mut sub = (mask - 1) & mask;
            while sub > 0 {
                assert!(
                    fi[sub] <= fi[mask] + 1e-10,
                    "FI monotonicity violated: case {case}, {sub:b} in {mask:b}"
                );
                assert!(
                    kld[sub] <= kld[mask] + 1e-10,
                    "KLD monotonicity violated: case {case}, {sub:b} in {mask:b}"
                );
                sub = (sub - 1) & mask;
            }
        }
    }
}

#[test]
fn decomposition_identity_is_exact_for_closed_forms() {
    // Deployment-driven networks exercise the repaired (eigenvalue-floored)
    // dependence matrices end to end.
    for case in 0..50u64 {
        let n = 2 + (case % 5) as usize;
        let net = random_deployment_net(n, 20_000 + case);
        let members: Vec<usize> = (0..n).collect();
        let v = coalition_fi_gaussian(&members, &net).unwrap();
        assert_eq!(v.total - v.individual_sum, v.copula_part);
        assert!(v.diversity_gain >= 0.0 && v.redundancy_loss >= 0.0);
        let d = coalition_kld_gaussian(&members, &net, 0.0, 1.0).unwrap();
        assert_eq!(d.total - d.individual_sum, d.copula_part);
    }
}

#[test]
#[allow(clippy::needless_range_loop)] // masks are semantic bit patterns
fn deployment_networks_stay_monotone() {
    // Same nesting property on distance-derived dependence; the repaired
    // matrices are worse conditioned, so the tolerance is relative.
    for case in 0..100u64 {
        let n = 2 + (case % 5) as usize;
        let net = random_deployment_net(n, 50_000 + case);
        let full = (1usize << n) - 1;
        let mut fi = vec![f64::NAN; full + 1];
        for mask in 1..=full {
            let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            fi[mask] = coalition_fi_gaussian(&members, &net).unwrap().total;
        }
        for mask in 1..=full {
            let mut sub = (mask - 1) & mask;
            while sub > 0 {
                let tol = 1e-10 + 1e-12 * fi[mask].abs();
                assert!(
                    fi[sub] <= fi[mask] + tol,
                    "case {case}: {} > {} for {sub:b} in {mask:b}",
                    fi[sub],
                    fi[mask]
                );
                sub = (sub - 1) & mask;
            }
        }
    }
}

#[test]
fn vine_terms_sum_to_the_copula_part() {
    // 100 random SPD correlation matrices with coalition sizes up to 6.
    let mut rng = RunSeed(31_415).stream();
    for case in 0..100 {
        let d = 2 + case % 5;
        let corr = random_spd_correlation(d, &mut rng);
        let sigmas: Vec<f64> = (0..d).map(|_| uniform_in(&mut rng, 0.5, 2.0)).collect();
        let energy = EnergyModel::new(1.0, 1.0, 4.0, 1.0).unwrap();
        let net = gaussian_net_with(&sigmas, corr, energy);
        let members: Vec<usize> = (0..d).collect();

        let est = InferenceTask::Estimation {
            eval: ThetaEval::standard_prior(),
        };
        let v = coalition_fi_gaussian(&members, &net).unwrap();
        let terms = pairwise_decomposition_gaussian(&members, &net, &est).unwrap();
        let sum: f64 = terms.iter().map(|t| t.value).sum();
        assert!(
            (sum - v.copula_part).abs() < 1e-9,
            "FI vine sum {sum} vs copula part {} (case {case})",
            v.copula_part
        );
        let dg: f64 = terms.iter().map(|t| t.value.max(0.0)).sum();
        let rl: f64 = terms.iter().map(|t| (-t.value).max(0.0)).sum();
        assert!((dg - v.diversity_gain).abs() < 1e-12);
        assert!((rl - v.redundancy_loss).abs() < 1e-12);

        let det = InferenceTask::Detection {
            theta0: 0.4,
            theta1: 1.9,
        };
        let k = coalition_kld_gaussian(&members, &net, 0.4, 1.9).unwrap();
        let terms = pairwise_decomposition_gaussian(&members, &net, &det).unwrap();
        let sum: f64 = terms.iter().map(|t| t.value).sum();
        assert!(
            (sum - k.copula_part).abs() < 1e-9,
            "KLD vine sum {sum} vs copula part {} (case {case})",
            k.copula_part
        );
    }
}

/// Noiseless (quadrature) variant of the Fisher-information estimator for a
/// two-sensor coalition with exponential marginals: integrate the
/// finite-difference curvature kernel over the observation distribution
/// with Gauss-Hermite quadrature, leaving the step bias as the only error.
/// Gaussian marginals would not do here: their log density is quadratic in
/// theta, so the central second difference is exact and there is no bias to
/// measure.
fn quadrature_fi_exponential(rho: f64, theta: f64, h: f64) -> f64 {
    let corr = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
    let copula = CopulaFamily::gaussian(corr.clone()).unwrap();
    let marginals = [
        MarginalModel::ExponentialRate,
        MarginalModel::ExponentialRate,
    ];
    let chol = corr.cholesky().unwrap();
    let l = chol.l();
    let (nodes, weights) = gauss_hermite(48);
    let norm = std::f64::consts::PI; // sqrt(pi)^2 for the 2-d product rule
    let mut acc = 0.0;
    for (i, &xi) in nodes.iter().enumerate() {
        for (j, &xj) in nodes.iter().enumerate() {
            let y = [std::f64::consts::SQRT_2 * xi, std::f64::consts::SQRT_2 * xj];
            let z = [l[(0, 0)] * y[0], l[(1, 0)] * y[0] + l[(1, 1)] * y[1]];
            let u = [norm_cdf(z[0]), norm_cdf(z[1])];
            let term = fi_curvature_term(&marginals, &copula, &u, theta, h).unwrap();
            acc += weights[i] * weights[j] * term;
        }
    }
    acc / norm
}

#[test]
fn fi_finite_difference_bias_shrinks_quadratically() {
    // Independent exponential pair: the information is exactly 2/theta^2,
    // and the quadrature variant of the estimator differs from it only by
    // the O(h^2) step bias, so halving the step divides the error by four.
    let theta = 1.0;
    let oracle = 2.0 / (theta * theta);
    let err_h = (quadrature_fi_exponential(0.0, theta, 0.2) - oracle).abs();
    let err_half = (quadrature_fi_exponential(0.0, theta, 0.1) - oracle).abs();
    assert!(err_h > 1e-5, "step bias too small to measure: {err_h}");
    let ratio = err_h / err_half;
    assert!(
        (3.5..4.5).contains(&ratio),
        "halving the step changed the bias by {ratio}x (errors {err_h:e}, {err_half:e})"
    );

    // Dependent case: no closed form, so compare successive refinements
    // (Richardson ratio), which is 4 for an O(h^2) bias.
    let q1 = quadrature_fi_exponential(0.5, theta, 0.4);
    let q2 = quadrature_fi_exponential(0.5, theta, 0.2);
    let q3 = quadrature_fi_exponential(0.5, theta, 0.1);
    let richardson = (q1 - q2) / (q2 - q3);
    assert!(
        (3.2..4.8).contains(&richardson),
        "Richardson ratio {richardson} (values {q1}, {q2}, {q3})"
    );
}
