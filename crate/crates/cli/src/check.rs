//! The `check` subcommand: build the configured network and run the
//! invariant suite against it, printing one line per check.

use coalsim_core::game::barrier_cost;
use coalsim_core::metrics::individual_metric;
use coalsim_core::rng::RunSeed;

use crate::config::ExperimentConfig;
use crate::experiments::{build_network, ExperimentError};

#[derive(Debug)]
pub struct CheckReport {
    pub lines: Vec<(String, bool, String)>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|(_, ok, _)| *ok)
    }
}

pub fn run_checks(
    cfg: &ExperimentConfig,
    seed_override: Option<u64>,
) -> Result<CheckReport, ExperimentError> {
    let seed = RunSeed(seed_override.unwrap_or(cfg.seed));
    let mut lines: Vec<(String, bool, String)> = Vec::new();
    let mut push = |name: &str, ok: bool, detail: String| {
        lines.push((name.to_string(), ok, detail));
    };

    let net = match build_network(cfg, seed.child(1)) {
        Ok(net) => {
            push(
                "network construction",
                true,
                format!("{} sensors", net.len()),
            );
            net
        }
        Err(e) => {
            push("network construction", false, e.to_string());
            return Ok(CheckReport { lines });
        }
    };
    let n = net.len();

    // Tau matrix shape.
    let tau = net.tau();
    let mut tau_ok = true;
    let mut detail = String::new();
    for i in 0..n {
        if (tau[(i, i)] - 1.0).abs() > 1e-12 {
            tau_ok = false;
            detail = format!("diagonal entry {i} is {}", tau[(i, i)]);
        }
        for j in 0..i {
            if (tau[(i, j)] - tau[(j, i)]).abs() > 1e-12 {
                tau_ok = false;
                detail = format!("asymmetric at ({i},{j})");
            }
            if !(tau[(i, j)] > 0.0 && tau[(i, j)] <= 1.0) {
                tau_ok = false;
                detail = format!("entry ({i},{j}) = {} outside (0,1]", tau[(i, j)]);
            }
        }
    }
    push(
        "tau matrix symmetric unit-diagonal in (0,1]",
        tau_ok,
        detail,
    );

    // Correlation matrix conditioning.
    let eig = net.corr().clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.min();
    push(
        "correlation matrix positive semidefinite",
        min_eig >= -1e-10,
        format!("min eigenvalue {min_eig:e}"),
    );
    let diag_ok = (0..n).all(|i| (net.corr()[(i, i)] - 1.0).abs() < 1e-12);
    push("correlation matrix unit diagonal", diag_ok, String::new());

    // Deployment determinism.
    match build_network(cfg, seed.child(1)) {
        Ok(again) => {
            let same = (0..n).all(|i| net.sensor(i).location == again.sensor(i).location);
            push("deployment deterministic per seed", same, String::new());
        }
        Err(e) => push("deployment deterministic per seed", false, e.to_string()),
    }

    // Energy model.
    let e = net.energy();
    let singleton_zero = e.coalition_energy(1).map(|v| v == 0.0).unwrap_or(false);
    push("singleton energy is zero", singleton_zero, String::new());
    let mut increasing = true;
    if e.requests_per_unit * e.transmit_energy > 0.0 {
        for k in 1..n {
            if e.coalition_energy(k + 1).unwrap() <= e.coalition_energy(k).unwrap() {
                increasing = false;
            }
        }
    }
    push(
        "coalition energy increasing in size",
        increasing,
        String::new(),
    );
    push(
        "barrier cost zero at zero energy",
        barrier_cost(0.0, e) == 0.0,
        String::new(),
    );

    // Individual metrics are computable under the configured task.
    let task = cfg.task.to_task();
    let mut metrics_ok = true;
    let mut detail = String::new();
    for s in net.sensors() {
        if let Err(err) = individual_metric(&s.marginal, &task) {
            metrics_ok = false;
            detail = format!("sensor {}: {err}", s.id);
            break;
        }
    }
    push("individual metrics computable", metrics_ok, detail);

    Ok(CheckReport { lines })
}
