//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured runtime. The budget-sweep criterion lives in its own test
//! target (`acceptance_sweep`) so it gets the whole machine.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use coalsim::config::ExperimentConfig;
use coalsim::experiments::{run_eight_sensor_game, run_gafi_vs_rho, run_gkld_vs_tau, RunOptions};
use coalsim_core::game::{
    is_dhp_stable, run_merge_split, GameContext, Partition, DEFAULT_OP_CAP, STRICT_IMPROVEMENT_EPS,
};
use coalsim_core::metrics::{
    coalition_fi_gaussian, coalition_kld_gaussian, mc_coalition_fi, mc_coalition_kld,
    pairwise_decomposition_gaussian, pairwise_gafi_gaussian, pairwise_gkld_gaussian, InferenceTask,
    McSettings, NetDependence, ThetaEval,
};
use coalsim_core::nalgebra::DMatrix;
use coalsim_core::network::{
    deploy_uniform, sensor_variance, EnergyModel, MarginalModel, NetworkModel, Sensor,
    VariancePolicy,
};
use coalsim_core::rng::RunSeed;

fn uniform_in(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn random_spd_correlation(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| uniform_in(rng, -1.0, 1.0));
    let g = a.transpose() * &a + DMatrix::identity(d, d) * 0.05 * d as f64;
    DMatrix::from_fn(d, d, |i, j| g[(i, j)] / (g[(i, i)] * g[(j, j)]).sqrt())
}

fn gaussian_net(sigmas: &[f64], corr: DMatrix<f64>) -> NetworkModel {
    let sensors: Vec<Sensor> = sigmas
        .iter()
        .enumerate()
        .map(|(id, &sigma)| Sensor {
            id,
            location: [0.0, 0.0],
            marginal: MarginalModel::GaussianMean { sigma },
        })
        .collect();
    let energy = EnergyModel::new(1.0, 1.0, 4.0, 1.0).unwrap();
    NetworkModel::with_matrices(sensors, [0.75, 0.75], corr, energy).unwrap()
}

/// Shared landmark suite for the two pairwise closed forms: analytic
/// minimum, both zero crossings, convexity on the 199-point grid.
fn assert_pairwise_landmarks(eval: impl Fn(f64) -> f64, rho_star: f64, min_value: f64, rho2: f64) {
    assert!((eval(rho_star) - min_value).abs() < 1e-8, "minimum value");
    assert!(eval(0.0).abs() < 1e-8, "zero at the origin");
    assert!(eval(rho2).abs() < 1e-8, "zero at the second root");
    let grid: Vec<f64> = (0..199).map(|i| -0.99 + 0.01 * i as f64).collect();
    for w in grid.windows(3) {
        let second = eval(w[0]) - 2.0 * eval(w[1]) + eval(w[2]);
        assert!(second >= -1e-8, "convexity at rho = {}", w[1]);
    }
    let (lo, hi) = (rho2.min(0.0), rho2.max(0.0));
    for &r in &grid {
        if r > lo + 1e-9 && r < hi - 1e-9 {
            assert!(eval(r) <= 1e-10, "positive inside the root interval at {r}");
        }
    }
}

#[test]
fn criterion_01_gafi_closed_form_suite() {
    let t0 = Instant::now();
    let mut rng = RunSeed(101).stream();
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
        assert_pairwise_landmarks(
            |rho| pairwise_gafi_gaussian(sx, sy, mx, my, rho).unwrap(),
            rho_star,
            -my * my / (sy * sy),
            rho2,
        );
        done += 1;
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "runtime {elapsed:.2}s exceeds 1s");
    println!("criterion 01 (pairwise GAFI closed-form suite): PASS in {elapsed:.2}s");
}

#[test]
fn criterion_02_gkld_closed_form_suite() {
    let t0 = Instant::now();
    let mut rng = RunSeed(202).stream();
    for _ in 0..100 {
        let sx = uniform_in(&mut rng, 0.3, 2.0);
        let sy = sx + uniform_in(&mut rng, 0.01, 2.0);
        let theta0 = uniform_in(&mut rng, -1.0, 1.0);
        let theta1 = theta0 + uniform_in(&mut rng, 0.2, 2.0);
        let shift = theta1 - theta0;
        assert_pairwise_landmarks(
            |rho| pairwise_gkld_gaussian(sx, sy, theta0, theta1, rho).unwrap(),
            sx / sy,
            -shift * shift / (2.0 * sy * sy),
            2.0 * sx * sy / (sx * sx + sy * sy),
        );
    }
    // Equal variances: exact closed form and strict decrease.
    let (sigma, theta0, theta1) = (1.2, 0.3, 1.9);
    let shift = theta1 - theta0;
    let mut prev = f64::INFINITY;
    for i in 0..199 {
        let rho = -0.99 + 0.01 * i as f64;
        let v = pairwise_gkld_gaussian(sigma, sigma, theta0, theta1, rho).unwrap();
        let expected = -(shift * shift / (sigma * sigma)) * rho / (1.0 + rho);
        assert!((v - expected).abs() < 1e-12);
        assert!(v < prev, "not strictly decreasing at rho = {rho}");
        prev = v;
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "runtime {elapsed:.2}s exceeds 1s");
    println!("criterion 02 (pairwise GKLD closed-form suite): PASS in {elapsed:.2}s");
}

#[test]
fn criterion_03_metric_monotonicity() {
    let t0 = Instant::now();
    let mut rng = RunSeed(303).stream();
    for case in 0..200u64 {
        let n = 2 + (case % 5) as usize;
        let corr = random_spd_correlation(n, &mut rng);
        let sigmas: Vec<f64> = (0..n).map(|_| uniform_in(&mut rng, 0.5, 2.0)).collect();
        let net = gaussian_net(&sigmas, corr);
        let full = (1usize << n) - 1;
        let mut fi = vec![f64::NAN; full + 1];
        let mut kld = vec![f64::NAN; full + 1];
        for mask in 1..=full {
            let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            fi[mask] = coalition_fi_gaussian(&members, &net).unwrap().total;
            kld[mask] = coalition_kld_gaussian(&members, &net, 0.2, 1.6)
                .unwrap()
                .total;
        }
        for mask in 1..=full {
            let mut sub = (mask - 1) & mask;
            while sub > 0 {
                assert!(fi[sub] <= fi[mask] + 1e-10, "FI case {case}");
                assert!(kld[sub] <= kld[mask] + 1e-10, "KLD case {case}");
                sub = (sub - 1) & mask;
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "runtime {elapsed:.2}s exceeds 10s");
    println!("criterion 03 (metric monotonicity in the coalition): PASS in {elapsed:.2}s");
}

#[test]
fn criterion_04_decomposition_identities() {
    let t0 = Instant::now();
    let mut rng = RunSeed(404).stream();
    for case in 0..100 {
        let d = 2 + case % 5;
        let corr = random_spd_correlation(d, &mut rng);
        let sigmas: Vec<f64> = (0..d).map(|_| uniform_in(&mut rng, 0.5, 2.0)).collect();
        let net = gaussian_net(&sigmas, corr);
        let members: Vec<usize> = (0..d).collect();

        // (a) The aggregate identity is exact by construction.
        let v = coalition_fi_gaussian(&members, &net).unwrap();
        assert_eq!(v.total - v.individual_sum, v.copula_part);
        let k = coalition_kld_gaussian(&members, &net, 0.4, 1.9).unwrap();
        assert_eq!(k.total - k.individual_sum, k.copula_part);

        // (b) Vine terms sum to the copula part within 1e-9.
        let est = InferenceTask::Estimation {
            eval: ThetaEval::standard_prior(),
        };
        let sum: f64 = pairwise_decomposition_gaussian(&members, &net, &est)
            .unwrap()
            .iter()
            .map(|t| t.value)
            .sum();
        assert!(
            (sum - v.copula_part).abs() < 1e-9,
            "FI vine sum, case {case}"
        );
        let det = InferenceTask::Detection {
            theta0: 0.4,
            theta1: 1.9,
        };
        let sum: f64 = pairwise_decomposition_gaussian(&members, &net, &det)
            .unwrap()
            .iter()
            .map(|t| t.value)
            .sum();
        assert!(
            (sum - k.copula_part).abs() < 1e-9,
            "KLD vine sum, case {case}"
        );
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "runtime {elapsed:.2}s exceeds 10s");
    println!("criterion 04 (decomposition identities): PASS in {elapsed:.2}s");
}

#[test]
fn criterion_05_monte_carlo_oracle_agreement() {
    let t0 = Instant::now();
    let n_samples = 200_000;
    let cases: Vec<u64> = (0..20).collect();
    let results: Vec<(bool, bool)> = cases
        .par_iter()
        .map(|&case| {
            let mut rng = RunSeed(505).child(case).stream();
            let d = 2 + (case % 3) as usize + usize::from(case % 7 == 0); // up to 4
            let corr = random_spd_correlation(d, &mut rng);
            let sigmas: Vec<f64> = (0..d).map(|_| uniform_in(&mut rng, 0.6, 1.8)).collect();
            let net = gaussian_net(&sigmas, corr.clone());
            let members: Vec<usize> = (0..d).collect();
            let copula = coalsim_core::copula::CopulaFamily::gaussian(corr).unwrap();

            let kld_closed = coalition_kld_gaussian(&members, &net, 0.0, 1.0).unwrap();
            let mut s1 = RunSeed(606).child(case).stream();
            let kld_mc = mc_coalition_kld(
                &members, &net, 0.0, 1.0, &copula, &copula, n_samples, &mut s1,
            )
            .unwrap();
            let kld_ok = (kld_mc.total - kld_closed.total).abs() <= 3.0 * kld_mc.std_error();

            let fi_closed = coalition_fi_gaussian(&members, &net).unwrap();
            let mut s2 = RunSeed(707).child(case).stream();
            let fi_mc = mc_coalition_fi(
                &members,
                &net,
                &ThetaEval::standard_prior(),
                &copula,
                n_samples,
                1e-3,
                &mut s2,
            )
            .unwrap();
            let fi_ok = (fi_mc.total - fi_closed.total).abs() <= 3.0 * fi_mc.std_error();
            (kld_ok, fi_ok)
        })
        .collect();
    let kld_hits = results.iter().filter(|(k, _)| *k).count();
    let fi_hits = results.iter().filter(|(_, f)| *f).count();
    assert!(kld_hits >= 18, "KLD agreement only {kld_hits}/20");
    assert!(fi_hits >= 18, "FI agreement only {fi_hits}/20");
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "runtime {elapsed:.2}s exceeds 60s");
    println!(
        "criterion 05 (Monte-Carlo vs closed form, KLD {kld_hits}/20, FI {fi_hits}/20): \
         PASS in {elapsed:.2}s"
    );
}

#[test]
fn criterion_06_game_properties() {
    let t0 = Instant::now();
    let cases: Vec<u64> = (0..500).collect();
    cases.par_iter().for_each(|&case| {
        let mut rng = RunSeed(808).child(case).stream();
        let n = 2 + (case % 11) as usize; // up to 12
        let (net, task) = loop {
            let locations = deploy_uniform(n, [1.5, 1.5], &mut rng).unwrap();
            let source = [
                uniform_in(&mut rng, 0.0, 1.5),
                uniform_in(&mut rng, 0.0, 1.5),
            ];
            let alpha = 1.0 + 5.0 * rng.random::<f64>();
            let energy = EnergyModel::new(1.0, 1.0, alpha, 1.0).unwrap();
            let sensors: Result<Vec<Sensor>, _> = locations
                .iter()
                .enumerate()
                .map(|(id, &location)| {
                    sensor_variance(location, source, VariancePolicy::InverseDistance, id).map(
                        |var| Sensor {
                            id,
                            location,
                            marginal: MarginalModel::GaussianMean { sigma: var.sqrt() },
                        },
                    )
                })
                .collect();
            if let Ok(sensors) = sensors {
                if let Ok(net) = NetworkModel::new(sensors, source, energy) {
                    let task = if case % 2 == 0 {
                        InferenceTask::Estimation {
                            eval: ThetaEval::standard_prior(),
                        }
                    } else {
                        InferenceTask::Detection {
                            theta0: 0.0,
                            theta1: std::f64::consts::SQRT_2,
                        }
                    };
                    break (net, task);
                }
            }
        };
        let mut ctx = GameContext::new(
            &net,
            task,
            NetDependence::GaussianCopula,
            McSettings::default(),
            RunSeed(case),
        )
        .unwrap();
        let out = run_merge_split(Partition::singletons(n), &mut ctx, DEFAULT_OP_CAP)
            .unwrap_or_else(|e| panic!("case {case}: {e}"));

        // Every step is a Pareto improvement with at least one strict gain.
        let payoffs = |p: &Partition, ctx: &mut GameContext| -> Vec<f64> {
            let mut v = vec![0.0; n];
            for c in p.coalitions() {
                let value = ctx.coalition_value(c).unwrap().value;
                for &m in c.members() {
                    v[m] = value;
                }
            }
            v
        };
        let mut prev = payoffs(&out.initial, &mut ctx);
        for step in &out.trace {
            let cur = payoffs(&step.partition, &mut ctx);
            let mut strict = 0;
            for i in 0..n {
                assert!(cur[i] >= prev[i] - 1e-12, "case {case} step {}", step.step);
                if cur[i] > prev[i] + STRICT_IMPROVEMENT_EPS {
                    strict += 1;
                }
            }
            assert!(
                strict >= 1,
                "case {case} step {} lacks a strict gain",
                step.step
            );
            prev = cur;
        }

        // Feasible outcome, and a fixed point of both rules.
        for c in out.final_partition.coalitions() {
            let e = ctx.energy_model().coalition_energy(c.len()).unwrap();
            assert!(
                e < ctx.energy_model().budget,
                "case {case}: infeasible coalition"
            );
        }
        assert!(
            is_dhp_stable(&out.final_partition, &mut ctx).unwrap(),
            "case {case}: not stable"
        );
    });
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "runtime {elapsed:.2}s exceeds 5min");
    println!("criterion 06 (game properties on 500 fuzzed networks): PASS in {elapsed:.2}s");
}

#[test]
fn criterion_07_eight_sensor_experiment() {
    let t0 = Instant::now();
    let cfg = ExperimentConfig::from_toml(
        "experiment = \"eight_sensor_game\"\nseed = 20240811\n\
         [task]\nkind = \"estimation\"\ntheta_eval = \"prior\"\n\
         [energy]\nrequests_per_unit = 1.0\ntransmit_energy = 1.0\nbudget = 4.0\nbarrier_t = 1.0\n\
         [network]\ncount = 8\nregion = [1.5, 1.5]\nsource = [0.75, 0.75]\n\
         gaussian_sigma = \"source_distance\"\nvariance_policy = \"inverse_distance\"\n\
         [copula]\nfamily = \"gaussian\"",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions::new(dir.path().to_path_buf());
    let out = run_eight_sensor_game(&cfg, &opts).unwrap();

    assert!(
        out.summary.final_sizes.iter().all(|&s| s <= 4),
        "coalition larger than the feasible maximum: {:?}",
        out.summary.final_sizes
    );
    for w in out.summary.average_payoffs.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "average payoff decreased");
    }
    assert!(out.summary.dhp_stable);
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "runtime {elapsed:.2}s exceeds 5s");
    println!(
        "criterion 07 (eight-sensor experiment, {} ops, sizes {:?}): PASS in {elapsed:.2}s",
        out.summary.operations, out.summary.final_sizes
    );
}

#[test]
fn criterion_09_curve_properties() {
    let t0 = Instant::now();

    // Identical-marginal dependence-FI curve: nonpositive for rho > 0 and
    // strictly decreasing.
    let gafi_cfg = ExperimentConfig::from_toml("experiment = \"gafi_vs_rho\"\nseed = 909").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = run_gafi_vs_rho(&gafi_cfg, &RunOptions::new(dir.path().to_path_buf())).unwrap();
    let mut prev = f64::INFINITY;
    for (rho, v) in out.summary.rhos.iter().zip(&out.summary.identical) {
        if *rho > 0.0 {
            assert!(*v <= 0.0, "identical curve positive at rho = {rho}");
        }
        assert!(
            *v < prev,
            "identical curve not strictly decreasing at {rho}"
        );
        prev = *v;
    }
    // The default heterogeneous parameters put the second zero crossing at
    // rho = 0.8, which lies on the grid.
    let at_root = out
        .summary
        .rhos
        .iter()
        .position(|&r| (r - 0.8).abs() < 1e-12)
        .map(|i| out.summary.heterogeneous[i])
        .expect("0.8 is a grid point");
    assert!(
        at_root.abs() < 1e-10,
        "heterogeneous curve at its root: {at_root}"
    );

    // Equal-variance Gaussian GKLD: negative for all tau > 0, vanishing in
    // the independence limit; every Monte-Carlo family crosses zero at most
    // once at the three-standard-error resolution.
    let gkld_cfg = ExperimentConfig::from_toml(
        "experiment = \"gkld_vs_tau\"\nseed = 910\n\
         [task]\nkind = \"detection\"\ntheta0 = 0.0\ntheta1 = 1.4142135623730951\n\
         [gkld_curve]\nfamilies = [\"gaussian\", \"student_t\", \"clayton\", \"gumbel\"]\n\
         nu = 4.0\ntau_min = 0.02\ntau_max = 0.95\ntau_step = 0.03\nsigmas = [1.0, 1.0]\n\
         [mc]\nn_samples = 200000",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = run_gkld_vs_tau(&gkld_cfg, &RunOptions::new(dir.path().to_path_buf())).unwrap();
    for curve in &out.summary.curves {
        if curve.family == "gaussian" {
            for (tau, v) in out.summary.taus.iter().zip(&curve.values) {
                assert!(*v < 0.0, "gaussian curve not negative at tau = {tau}");
            }
            // Independence limit of the closed form.
            let at_zero = pairwise_gkld_gaussian(
                1.0,
                1.0,
                0.0,
                std::f64::consts::SQRT_2,
                coalsim_core::copula::tau_to_param(
                    coalsim_core::copula::CopulaKind::Gaussian,
                    1e-8,
                )
                .unwrap(),
            )
            .unwrap();
            assert!(
                at_zero.abs() < 1e-6,
                "gaussian curve does not vanish at tau -> 0"
            );
        } else {
            let changes = curve.significant_sign_changes();
            assert!(
                changes <= 1,
                "{} crosses zero {changes} times",
                curve.family
            );
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "runtime {elapsed:.2}s exceeds 5min");
    println!("criterion 09 (curve shape properties): PASS in {elapsed:.2}s");
}

#[test]
fn criterion_10_reproducibility() {
    let t0 = Instant::now();

    let read =
        |dir: &std::path::Path, name: &str| -> Vec<u8> { std::fs::read(dir.join(name)).unwrap() };

    // The sweep with one thread versus two threads, same config and seed.
    let sweep_cfg = ExperimentConfig::from_toml(
        "experiment = \"alpha_sweep\"\nseed = 1010\ntrials = 2\n\
         [energy]\nbudget_list = [2.0, 3.0]\n\
         [network]\ncount = 10\ngaussian_count = 5\ngaussian_sigma = \"unit\"\n\
         [copula]\nfamily = \"student_t\"\nnu = 4.0\n\
         [task]\ntheta0 = 1.0\ntheta1 = 2.4\ntheta_eval = \"grid\"\n\
         [mc]\nn_samples = 2000",
    )
    .unwrap();
    let mut csvs: Vec<Vec<Vec<u8>>> = Vec::new();
    for threads in [1usize, 2] {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            out_dir: dir.path().to_path_buf(),
            seed_override: None,
            threads: Some(threads),
            write_svg: false,
        };
        let out = coalsim::experiments::run_alpha_sweep(&sweep_cfg, &opts).unwrap();
        assert_eq!(out.summary.excluded_trials, 0);
        csvs.push(vec![
            read(dir.path(), "alpha_sweep_payoff.csv"),
            read(dir.path(), "alpha_sweep_cost.csv"),
            read(dir.path(), "alpha_sweep_trials.csv"),
        ]);
    }
    assert_eq!(csvs[0], csvs[1], "sweep CSVs differ across thread counts");

    // Rerunning the small-network game reproduces byte-identical artifacts.
    let eight_cfg =
        ExperimentConfig::from_toml("experiment = \"eight_sensor_game\"\nseed = 1011").unwrap();
    let mut games: Vec<Vec<Vec<u8>>> = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions::new(dir.path().to_path_buf());
        run_eight_sensor_game(&eight_cfg, &opts).unwrap();
        games.push(vec![
            read(dir.path(), "deployment.csv"),
            read(dir.path(), "trace.csv"),
            read(dir.path(), "final_partition.csv"),
            read(dir.path(), "manifest.toml"),
        ]);
    }
    assert_eq!(games[0], games[1], "rerun artifacts differ");

    let elapsed = t0.elapsed().as_secs_f64();
    println!("criterion 10 (byte-identical reproducibility): PASS in {elapsed:.2}s");
}
