//! Property suites for the copula module: conversion round trips, sampling
//! consistency against rank statistics, density normalization on a
//! quasi-uniform grid, and the repair/conditioning invariants.

mod common;

use coalsim_core::copula::{
    nearest_psd, param_to_tau, partial_correlation, tau_to_param, CopulaFamily, CopulaKind, PSD_TOL,
};
use coalsim_core::rng::RunSeed;
use common::{kendall_tau, random_spd_correlation, QuasiUniform2};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn corr2(rho: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0])
}

proptest! {
    #[test]
    fn elliptical_tau_round_trip(tau in -1.0f64..1.0) {
        for kind in [CopulaKind::Gaussian, CopulaKind::StudentT] {
            let p = tau_to_param(kind, tau).unwrap();
            let back = param_to_tau(kind, p).unwrap();
            prop_assert!((back - tau).abs() < 1e-12);
        }
    }

    #[test]
    fn archimedean_tau_round_trip(tau in 1e-6f64..0.999) {
        for kind in [CopulaKind::Clayton, CopulaKind::Gumbel] {
            let p = tau_to_param(kind, tau).unwrap();
            let back = param_to_tau(kind, p).unwrap();
            prop_assert!((back - tau).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_psd_is_idempotent(seed in 0u64..1000) {
        let mut rng = RunSeed(seed).stream();
        let d = 2 + (seed % 5) as usize;
        let mut m = DMatrix::identity(d, d);
        for i in 0..d {
            for j in 0..i {
                let v: f64 = rng.random::<f64>() * 2.0 - 1.0;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let once = nearest_psd(&m, PSD_TOL);
        let twice = nearest_psd(&once, PSD_TOL);
        for i in 0..d {
            prop_assert!((once[(i, i)] - 1.0).abs() < 1e-12);
            for j in 0..d {
                prop_assert!((twice[(i, j)] - once[(i, j)]).abs() < 1e-10);
            }
        }
        let eig = once.clone().symmetric_eigen();
        prop_assert!(eig.eigenvalues.min() >= -1e-10);
    }

    #[test]
    fn partial_correlation_with_empty_cond_is_the_entry(seed in 0u64..500) {
        let mut rng = RunSeed(seed).stream();
        let d = 3 + (seed % 3) as usize;
        let r = random_spd_correlation(d, &mut rng);
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    prop_assert_eq!(partial_correlation(&r, i, j, &[]).unwrap(), r[(i, j)]);
                }
            }
        }
    }
}

#[test]
fn independence_neutrality() {
    // Gaussian at rho = 0 is exact; the Archimedean families approach the
    // independence copula as their parameters approach the boundary.
    let gauss = CopulaFamily::gaussian(DMatrix::identity(2, 2)).unwrap();
    let clayton = CopulaFamily::clayton(1e-8).unwrap();
    let gumbel = CopulaFamily::gumbel(1.0 + 1e-8).unwrap();
    let mut qmc = QuasiUniform2::new();
    for _ in 0..100 {
        let u = qmc.next().unwrap();
        assert_eq!(gauss.log_density(&u).unwrap(), 0.0);
        assert!(clayton.log_density(&u).unwrap().abs() < 1e-5);
        assert!(gumbel.log_density(&u).unwrap().abs() < 1e-5);
    }
}

#[test]
fn density_normalizes_on_the_unit_square() {
    // Monte-Carlo integral of the density over (0,1)^2 with one million
    // quasi-uniform points should be 1 within one percent, for each
    // bivariate family at three dependence levels.
    let taus = [0.2, 0.5, 0.7];
    let mut families: Vec<(String, CopulaFamily)> = Vec::new();
    for &tau in &taus {
        let rho = tau_to_param(CopulaKind::Gaussian, tau).unwrap();
        families.push((
            format!("gaussian tau={tau}"),
            CopulaFamily::gaussian(corr2(rho)).unwrap(),
        ));
        families.push((
            format!("student_t tau={tau}"),
            CopulaFamily::student_t(corr2(rho), 4.0).unwrap(),
        ));
        families.push((
            format!("clayton tau={tau}"),
            CopulaFamily::clayton(tau_to_param(CopulaKind::Clayton, tau).unwrap()).unwrap(),
        ));
        families.push((
            format!("gumbel tau={tau}"),
            CopulaFamily::gumbel(tau_to_param(CopulaKind::Gumbel, tau).unwrap()).unwrap(),
        ));
    }
    let n = 1_000_000;
    for (name, family) in families {
        let mut qmc = QuasiUniform2::new();
        let mut acc = 0.0;
        for _ in 0..n {
            let u = qmc.next().unwrap();
            acc += family.log_density(&u).unwrap().exp();
        }
        let integral = acc / n as f64;
        assert!(
            (integral - 1.0).abs() < 0.01,
            "{name}: integral = {integral}"
        );
    }
}

#[test]
fn sampling_matches_kendall_tau() {
    // Empirical Kendall tau of 1e5 draws should match the parameter's tau
    // within 0.02 for every family.
    let n = 100_000;
    let cases: Vec<(String, CopulaFamily, f64)> = vec![
        (
            "gaussian identity".into(),
            CopulaFamily::gaussian(DMatrix::identity(2, 2)).unwrap(),
            0.0,
        ),
        (
            "gaussian tau=0.5".into(),
            CopulaFamily::gaussian(corr2(tau_to_param(CopulaKind::Gaussian, 0.5).unwrap()))
                .unwrap(),
            0.5,
        ),
        (
            "student_t tau=0.5".into(),
            CopulaFamily::student_t(corr2(tau_to_param(CopulaKind::StudentT, 0.5).unwrap()), 4.0)
                .unwrap(),
            0.5,
        ),
        (
            "clayton tau=0.4".into(),
            CopulaFamily::clayton(tau_to_param(CopulaKind::Clayton, 0.4).unwrap()).unwrap(),
            0.4,
        ),
        (
            "gumbel tau=0.6".into(),
            CopulaFamily::gumbel(tau_to_param(CopulaKind::Gumbel, 0.6).unwrap()).unwrap(),
            0.6,
        ),
    ];
    for (i, (name, family, expected)) in cases.into_iter().enumerate() {
        let mut rng = RunSeed(100 + i as u64).stream();
        let samples = family.sample(n, &mut rng).unwrap();
        let xs: Vec<f64> = (0..n).map(|r| samples[(r, 0)]).collect();
        let ys: Vec<f64> = (0..n).map(|r| samples[(r, 1)]).collect();
        let tau = kendall_tau(&xs, &ys);
        assert!(
            (tau - expected).abs() < 0.02,
            "{name}: empirical tau = {tau}, expected {expected}"
        );
    }
}

#[test]
fn multivariate_sampling_is_deterministic_per_seed() {
    let r = random_spd_correlation(4, &mut RunSeed(9).stream());
    let family = CopulaFamily::student_t(r, 4.0).unwrap();
    let a = family.sample(64, &mut RunSeed(42).stream()).unwrap();
    let b = family.sample(64, &mut RunSeed(42).stream()).unwrap();
    assert_eq!(a, b);
    let c = family.sample(64, &mut RunSeed(43).stream()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn multivariate_gaussian_sampling_tracks_the_matrix() {
    let mut rng = RunSeed(21).stream();
    let r = random_spd_correlation(3, &mut rng);
    let family = CopulaFamily::gaussian(r.clone()).unwrap();
    let n = 60_000;
    let samples = family.sample(n, &mut RunSeed(77).stream()).unwrap();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let xs: Vec<f64> = (0..n).map(|r| samples[(r, i)]).collect();
            let ys: Vec<f64> = (0..n).map(|r| samples[(r, j)]).collect();
            let expected = param_to_tau(CopulaKind::Gaussian, r[(i, j)]).unwrap();
            let tau = kendall_tau(&xs, &ys);
            assert!(
                (tau - expected).abs() < 0.025,
                "pair ({i},{j}): tau {tau} vs {expected}"
            );
        }
    }
}
