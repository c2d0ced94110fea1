//! Budget sweep over a heterogeneous network: per trial, deploy fresh
//! sensors, run the coalition formation game and the random max-size
//! baseline at every budget, for both the estimation and the detection
//! task; aggregate the per-sensor inference performance and the average
//! per-coalition communication cost across trials.
//!
//! Trials run in parallel with per-trial seeds and are aggregated in trial
//! order, so the outputs do not depend on the thread count.

use rayon::prelude::*;

use coalsim_core::baselines::random_partition;
use coalsim_core::game::{run_merge_split, GameContext, Partition, DEFAULT_OP_CAP};
use coalsim_core::metrics::{InferenceTask, McSettings};
use coalsim_core::rng::RunSeed;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::csvio::{csv_document, fmt_real};
use crate::manifest::OutputCollector;
use crate::svg::Plot;

use super::{
    build_network, effective_seed, energy_with_budget, net_dependence, ExperimentError,
    ExperimentOutput, RunOptions,
};

/// Trial means and standard errors of one method across the budget grid.
#[derive(Debug, Clone)]
pub struct MethodCurve {
    pub payoff_mean: Vec<f64>,
    pub payoff_se: Vec<f64>,
    pub cost_mean: Vec<f64>,
    pub cost_se: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TaskSweep {
    pub task: String,
    pub proposed: MethodCurve,
    pub random: MethodCurve,
}

#[derive(Debug, Clone)]
pub struct AlphaSummary {
    pub alphas: Vec<f64>,
    pub tasks: Vec<TaskSweep>,
    pub trials: usize,
    pub excluded_trials: usize,
}

/// Per-trial raw numbers: `[task][alpha] -> (proposed payoff, proposed
/// cost, random payoff, random cost)`.
struct TrialData {
    cells: Vec<Vec<[f64; 4]>>,
}

const TASK_NAMES: [&str; 2] = ["estimation", "detection"];

pub fn run_alpha_sweep(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<ExperimentOutput<AlphaSummary>, ExperimentError> {
    cfg.expect_experiment(ExperimentKind::AlphaSweep)?;
    let seed = effective_seed(cfg, opts);
    let root = RunSeed(seed);
    let alphas = cfg.energy.budget_list.clone();
    let trials = cfg.trials;
    let dep = net_dependence(cfg)?;
    let mc = McSettings {
        n_samples: cfg.mc.n_samples,
        fd_step: cfg.mc.fd_step,
    };
    let tasks: [InferenceTask; 2] = [
        InferenceTask::Estimation {
            eval: cfg.task.theta_eval(),
        },
        InferenceTask::Detection {
            theta0: cfg.task.theta0,
            theta1: cfg.task.theta1,
        },
    ];

    let run_trial = |trial: usize| -> Result<TrialData, String> {
        let tseed = root.child(1000 + trial as u64);
        let net = build_network(cfg, tseed.child(0)).map_err(|e| e.to_string())?;
        let n = net.len();

        // The baseline partition depends on the trial and the budget, not
        // on the task.
        let mut baselines = Vec::with_capacity(alphas.len());
        for (ai, &alpha) in alphas.iter().enumerate() {
            let energy = energy_with_budget(cfg, alpha).map_err(|e| e.to_string())?;
            let mut rng = tseed.child(9000 + ai as u64).stream();
            baselines.push(random_partition(n, &energy, &mut rng));
        }

        let mut cells = Vec::with_capacity(tasks.len());
        for (ti, task) in tasks.iter().enumerate() {
            let mut ctx = GameContext::new(&net, task.clone(), dep, mc, tseed.child(1 + ti as u64))
                .map_err(|e| e.to_string())?;
            let mut row = Vec::with_capacity(alphas.len());
            for (ai, &alpha) in alphas.iter().enumerate() {
                let energy = energy_with_budget(cfg, alpha).map_err(|e| e.to_string())?;
                ctx.set_energy_model(energy);
                let outcome = run_merge_split(Partition::singletons(n), &mut ctx, DEFAULT_OP_CAP)
                    .map_err(|e| e.to_string())?;
                let (ppay, pcost) = partition_performance(&outcome.final_partition, &mut ctx)
                    .map_err(|e| e.to_string())?;
                let (rpay, rcost) =
                    partition_performance(&baselines[ai], &mut ctx).map_err(|e| e.to_string())?;
                row.push([ppay, pcost, rpay, rcost]);
            }
            cells.push(row);
        }
        Ok(TrialData { cells })
    };

    let results: Vec<Result<TrialData, String>> = match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| ExperimentError::Numerical(e.to_string()))?
            .install(|| (0..trials).into_par_iter().map(run_trial).collect()),
        None => (0..trials).into_par_iter().map(run_trial).collect(),
    };

    let mut out = OutputCollector::new(&opts.out_dir)?;
    let mut kept: Vec<&TrialData> = Vec::with_capacity(trials);
    let mut excluded = 0usize;
    for (trial, r) in results.iter().enumerate() {
        match r {
            Ok(data) => kept.push(data),
            Err(message) => {
                excluded += 1;
                out.warn(format!("trial {trial} excluded: {message}"));
            }
        }
    }
    if kept.is_empty() {
        return Err(ExperimentError::Numerical(
            "every trial failed; see the manifest warnings".into(),
        ));
    }

    // Aggregate in fixed trial order.
    let mean_se = |values: &[f64]| -> (f64, f64) {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        if values.len() < 2 {
            return (mean, 0.0);
        }
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
        (mean, (var / k).sqrt())
    };
    let mut task_sweeps = Vec::new();
    for (ti, name) in TASK_NAMES.iter().enumerate() {
        let mut curves = [
            MethodCurve {
                payoff_mean: vec![],
                payoff_se: vec![],
                cost_mean: vec![],
                cost_se: vec![],
            },
            MethodCurve {
                payoff_mean: vec![],
                payoff_se: vec![],
                cost_mean: vec![],
                cost_se: vec![],
            },
        ];
        for ai in 0..alphas.len() {
            for (mi, curve) in curves.iter_mut().enumerate() {
                let payoffs: Vec<f64> = kept.iter().map(|t| t.cells[ti][ai][2 * mi]).collect();
                let costs: Vec<f64> = kept.iter().map(|t| t.cells[ti][ai][2 * mi + 1]).collect();
                let (pm, ps) = mean_se(&payoffs);
                let (cm, cs) = mean_se(&costs);
                curve.payoff_mean.push(pm);
                curve.payoff_se.push(ps);
                curve.cost_mean.push(cm);
                curve.cost_se.push(cs);
            }
        }
        let [proposed, random] = curves;
        task_sweeps.push(TaskSweep {
            task: name.to_string(),
            proposed,
            random,
        });
    }

    // Summary tables.
    let mut payoff_rows = Vec::new();
    let mut cost_rows = Vec::new();
    for (ai, &alpha) in alphas.iter().enumerate() {
        let mut prow = vec![fmt_real(alpha)];
        let mut crow = vec![fmt_real(alpha)];
        for sweep in &task_sweeps {
            for curve in [&sweep.proposed, &sweep.random] {
                prow.push(fmt_real(curve.payoff_mean[ai]));
                prow.push(fmt_real(curve.payoff_se[ai]));
                crow.push(fmt_real(curve.cost_mean[ai]));
                crow.push(fmt_real(curve.cost_se[ai]));
            }
        }
        payoff_rows.push(prow);
        cost_rows.push(crow);
    }
    let header = [
        "alpha",
        "est_proposed",
        "est_proposed_se",
        "est_random",
        "est_random_se",
        "det_proposed",
        "det_proposed_se",
        "det_random",
        "det_random_se",
    ];
    out.write_file(
        "alpha_sweep_payoff.csv",
        &csv_document(&header, &payoff_rows),
    )?;
    out.write_file("alpha_sweep_cost.csv", &csv_document(&header, &cost_rows))?;

    // Long-form per-trial table.
    let mut trial_rows = Vec::new();
    let mut kept_index = 0usize;
    for (trial, r) in results.iter().enumerate() {
        let Ok(_) = r else { continue };
        let data = kept[kept_index];
        kept_index += 1;
        for (ti, name) in TASK_NAMES.iter().enumerate() {
            for (ai, &alpha) in alphas.iter().enumerate() {
                let cell = data.cells[ti][ai];
                for (mi, method) in ["proposed", "random"].iter().enumerate() {
                    trial_rows.push(vec![
                        trial.to_string(),
                        fmt_real(alpha),
                        name.to_string(),
                        method.to_string(),
                        fmt_real(cell[2 * mi]),
                        fmt_real(cell[2 * mi + 1]),
                    ]);
                }
            }
        }
    }
    out.write_file(
        "alpha_sweep_trials.csv",
        &csv_document(
            &["trial", "alpha", "task", "method", "payoff", "cost"],
            &trial_rows,
        ),
    )?;

    if opts.write_svg {
        for sweep in &task_sweeps {
            let payoff_plot = Plot::new(
                &format!("Overall {} performance vs budget", sweep.task),
                "energy budget",
                "average per-sensor performance",
            )
            .line(
                "coalition formation game",
                alphas
                    .iter()
                    .copied()
                    .zip(sweep.proposed.payoff_mean.iter().copied())
                    .collect(),
            )
            .line(
                "random max-size baseline",
                alphas
                    .iter()
                    .copied()
                    .zip(sweep.random.payoff_mean.iter().copied())
                    .collect(),
            );
            out.write_file(
                &format!("alpha_sweep_{}_payoff.svg", sweep.task),
                &payoff_plot.render(),
            )?;
            let cost_plot = Plot::new(
                &format!("Communication cost vs budget ({})", sweep.task),
                "energy budget",
                "average per-coalition energy",
            )
            .line(
                "coalition formation game",
                alphas
                    .iter()
                    .copied()
                    .zip(sweep.proposed.cost_mean.iter().copied())
                    .collect(),
            )
            .line(
                "random max-size baseline",
                alphas
                    .iter()
                    .copied()
                    .zip(sweep.random.cost_mean.iter().copied())
                    .collect(),
            );
            out.write_file(
                &format!("alpha_sweep_{}_cost.svg", sweep.task),
                &cost_plot.render(),
            )?;
        }
    }

    out.set_metadata("trials_kept", kept.len().to_string());
    let files = out.finish(cfg, seed, excluded)?;
    Ok(ExperimentOutput {
        out_dir: opts.out_dir.clone(),
        files,
        summary: AlphaSummary {
            alphas,
            tasks: task_sweeps,
            trials,
            excluded_trials: excluded,
        },
    })
}

/// Average per-sensor inference performance and average per-coalition
/// energy of a partition, under the context's task and cached metrics.
fn partition_performance(
    p: &Partition,
    ctx: &mut GameContext,
) -> Result<(f64, f64), ExperimentError> {
    let n = p.sensor_count() as f64;
    let mut payoff = 0.0;
    let mut energy = 0.0;
    for c in p.coalitions() {
        let metric = ctx.metric(c)?;
        payoff += metric.total * c.len() as f64;
        energy += ctx.energy_model().coalition_energy(c.len())?;
    }
    Ok((payoff / n, energy / p.coalitions().len() as f64))
}
