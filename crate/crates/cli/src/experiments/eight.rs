//! The small-network game experiment: deploy the configured sensors, run
//! merge-and-split from singletons, and emit the deployment, the accepted
//! operation trace, the final partition, and the two plots (payoff versus
//! operation, partition map).

use coalsim_core::game::{
    dominates_all_partitions, is_dhp_stable, run_merge_split, GameContext, Partition,
    DEFAULT_OP_CAP,
};
use coalsim_core::metrics::prior_fisher_information;
use coalsim_core::metrics::{InferenceTask, McSettings};
use coalsim_core::network::MarginalModel;
use coalsim_core::rng::RunSeed;

use crate::config::{ExperimentConfig, ExperimentKind, SigmaMode};
use crate::csvio::{csv_document, fmt_real};
use crate::manifest::OutputCollector;
use crate::svg::Plot;

use super::{
    build_network, effective_seed, net_dependence, ExperimentError, ExperimentOutput, RunOptions,
};

#[derive(Debug, Clone)]
pub struct EightSummary {
    pub sensor_count: usize,
    pub final_sizes: Vec<usize>,
    /// Average payoff at the start followed by the payoff after each
    /// accepted operation.
    pub average_payoffs: Vec<f64>,
    pub operations: usize,
    pub dhp_stable: bool,
    pub dominates_all: Option<bool>,
}

fn coalitions_field(p: &Partition) -> String {
    p.coalitions()
        .iter()
        .map(|c| {
            c.members()
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join("-")
        })
        .collect::<Vec<_>>()
        .join(";")
}

pub fn run_eight_sensor_game(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<ExperimentOutput<EightSummary>, ExperimentError> {
    cfg.expect_experiment(ExperimentKind::EightSensorGame)?;
    let seed = effective_seed(cfg, opts);
    let root = RunSeed(seed);
    let net = build_network(cfg, root.child(1))?;
    let dep = net_dependence(cfg)?;
    let task = cfg.task.to_task();
    let mc = McSettings {
        n_samples: cfg.mc.n_samples,
        fd_step: cfg.mc.fd_step,
    };
    let mut ctx = GameContext::new(&net, task.clone(), dep, mc, root.child(2))?;

    let outcome = run_merge_split(Partition::singletons(net.len()), &mut ctx, DEFAULT_OP_CAP)?;
    let stable = is_dhp_stable(&outcome.final_partition, &mut ctx)?;
    let dominates = dominates_all_partitions(&outcome.final_partition, &mut ctx)?;

    let mut out = OutputCollector::new(&opts.out_dir)?;

    // Deployment table.
    let deployment_rows: Vec<Vec<String>> = net
        .sensors()
        .iter()
        .map(|s| {
            let (marginal, sigma) = match s.marginal {
                MarginalModel::GaussianMean { sigma } => ("gaussian", fmt_real(sigma)),
                MarginalModel::ExponentialRate => ("exponential", String::new()),
            };
            vec![
                s.id.to_string(),
                fmt_real(s.location[0]),
                fmt_real(s.location[1]),
                marginal.to_string(),
                sigma,
            ]
        })
        .collect();
    out.write_file(
        "deployment.csv",
        &csv_document(&["id", "x", "y", "marginal", "sigma"], &deployment_rows),
    )?;

    // Accepted-operation trace.
    let trace_rows: Vec<Vec<String>> = outcome
        .trace
        .iter()
        .map(|s| {
            vec![
                s.step.to_string(),
                s.op.to_string(),
                coalitions_field(&s.partition),
                fmt_real(s.average_payoff),
                s.max_coalition_size.to_string(),
                fmt_real(s.total_energy),
            ]
        })
        .collect();
    out.write_file(
        "trace.csv",
        &csv_document(
            &[
                "step",
                "op",
                "coalitions",
                "average_payoff",
                "max_coalition_size",
                "total_energy",
            ],
            &trace_rows,
        ),
    )?;

    // Final partition with its value ledger.
    let mut final_rows = Vec::new();
    for (i, c) in outcome.final_partition.coalitions().iter().enumerate() {
        let v = ctx.coalition_value(c)?;
        final_rows.push(vec![
            i.to_string(),
            c.members()
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join("-"),
            c.len().to_string(),
            fmt_real(v.energy),
            fmt_real(v.cost),
            fmt_real(v.value),
        ]);
    }
    out.write_file(
        "final_partition.csv",
        &csv_document(
            &["coalition", "members", "size", "energy", "cost", "value"],
            &final_rows,
        ),
    )?;

    let mut average_payoffs = vec![outcome.initial_average_payoff];
    average_payoffs.extend(outcome.trace.iter().map(|s| s.average_payoff));

    if opts.write_svg {
        let payoff_points: Vec<(f64, f64)> = average_payoffs
            .iter()
            .enumerate()
            .map(|(i, &p)| (i as f64, p))
            .collect();
        let payoff_plot = Plot::new(
            "Average payoff per accepted operation",
            "operation",
            "average payoff",
        )
        .line("average payoff", payoff_points.clone())
        .scatter("operations", payoff_points);
        out.write_file("payoff_trace.svg", &payoff_plot.render())?;

        let mut map = Plot::new("Deployment and final partition", "x", "y");
        for c in outcome.final_partition.coalitions() {
            let label = c
                .members()
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join("-");
            let pts: Vec<(f64, f64)> = c
                .members()
                .iter()
                .map(|&m| (net.sensor(m).location[0], net.sensor(m).location[1]))
                .collect();
            map = map.scatter(&format!("coalition {label}"), pts);
        }
        for s in net.sensors() {
            map = map.annotate(s.location[0], s.location[1], &s.id.to_string());
        }
        let src = net.source();
        map = map.annotate(src[0], src[1], "source");
        out.write_file("partition_map.svg", &map.render())?;
    }

    out.set_metadata("dhp_stable", stable.to_string());
    out.set_metadata(
        "dominates_all_partitions",
        dominates
            .map(|d| d.to_string())
            .unwrap_or_else(|| "not_checked".into()),
    );
    out.set_metadata("operations", outcome.trace.len().to_string());
    out.set_metadata(
        "final_max_coalition_size",
        outcome.final_partition.max_coalition_size().to_string(),
    );
    if cfg.network.gaussian_sigma == SigmaMode::SourceDistance {
        out.set_metadata(
            "variance_policy",
            format!("{:?}", cfg.network.variance_policy),
        );
    }
    if let InferenceTask::Estimation { eval } = &task {
        if let Some(prior_fi) = prior_fisher_information(eval) {
            out.set_metadata("prior_fisher_information", fmt_real(prior_fi));
        }
    }

    let final_sizes: Vec<usize> = outcome
        .final_partition
        .coalitions()
        .iter()
        .map(|c| c.len())
        .collect();
    let summary = EightSummary {
        sensor_count: net.len(),
        final_sizes,
        average_payoffs,
        operations: outcome.trace.len(),
        dhp_stable: stable,
        dominates_all: dominates,
    };
    let files = out.finish(cfg, seed, 0)?;
    Ok(ExperimentOutput {
        out_dir: opts.out_dir.clone(),
        files,
        summary,
    })
}
