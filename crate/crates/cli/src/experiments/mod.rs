//! Config-driven experiment runners. Each runner writes CSV tables, SVG
//! plots and a manifest into the output directory and returns an in-memory
//! summary for tests and callers.

mod alpha;
mod eight;
mod gafi;
mod gkld;

pub use alpha::{run_alpha_sweep, AlphaSummary, MethodCurve, TaskSweep};
pub use eight::{run_eight_sensor_game, EightSummary};
pub use gafi::{run_gafi_vs_rho, GafiSummary};
pub use gkld::{run_gkld_vs_tau, FamilyCurve, GkldSummary};

use std::path::PathBuf;

use thiserror::Error;

use coalsim_core::copula::CopulaError;
use coalsim_core::game::GameError;
use coalsim_core::metrics::{MetricsError, NetDependence};
use coalsim_core::network::{
    deploy_uniform, sensor_variance, EnergyModel, MarginalModel, NetworkError, NetworkModel, Sensor,
};
use coalsim_core::rng::RunSeed;

use crate::config::{ConfigError, ExperimentConfig, FamilyKind, MarginalKind, SigmaMode};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("merge-and-split aborted: {0}")]
    IterationCap(String),
}

impl ExperimentError {
    /// Process exit code contract: 2 config, 3 numerical, 4 iteration cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Io(_) => 1,
            ExperimentError::Numerical(_) => 3,
            ExperimentError::IterationCap(_) => 4,
        }
    }
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}

impl From<GameError> for ExperimentError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::IterationCapExceeded { .. } | GameError::CycleDetected { .. } => {
                ExperimentError::IterationCap(e.to_string())
            }
            other => ExperimentError::Numerical(other.to_string()),
        }
    }
}

impl From<MetricsError> for ExperimentError {
    fn from(e: MetricsError) -> Self {
        ExperimentError::Numerical(e.to_string())
    }
}

impl From<NetworkError> for ExperimentError {
    fn from(e: NetworkError) -> Self {
        ExperimentError::Numerical(e.to_string())
    }
}

impl From<CopulaError> for ExperimentError {
    fn from(e: CopulaError) -> Self {
        ExperimentError::Numerical(e.to_string())
    }
}

/// Invocation options resolved by the CLI layer.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed_override: Option<u64>,
    pub threads: Option<usize>,
    pub write_svg: bool,
}

impl RunOptions {
    pub fn new(out_dir: PathBuf) -> Self {
        RunOptions {
            out_dir,
            seed_override: None,
            threads: None,
            write_svg: true,
        }
    }
}

/// Files written plus the experiment's in-memory summary.
#[derive(Debug, Clone)]
pub struct ExperimentOutput<S> {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub summary: S,
}

pub(crate) fn effective_seed(cfg: &ExperimentConfig, opts: &RunOptions) -> u64 {
    opts.seed_override.unwrap_or(cfg.seed)
}

/// Evenly spaced inclusive grid, computed by index so the values do not
/// accumulate rounding.
pub(crate) fn grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let count = ((max - min) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| min + step * i as f64).collect()
}

pub(crate) fn energy_with_budget(
    cfg: &ExperimentConfig,
    budget: f64,
) -> Result<EnergyModel, ExperimentError> {
    Ok(EnergyModel::new(
        cfg.energy.requests_per_unit,
        cfg.energy.transmit_energy,
        budget,
        cfg.energy.barrier_t,
    )?)
}

/// Network dependence structure from the copula section.
pub(crate) fn net_dependence(cfg: &ExperimentConfig) -> Result<NetDependence, ExperimentError> {
    match cfg.copula.family {
        FamilyKind::Gaussian => Ok(NetDependence::GaussianCopula),
        FamilyKind::StudentT => Ok(NetDependence::StudentTCopula { nu: cfg.copula.nu }),
        other => Err(ExperimentError::Numerical(format!(
            "copula family {} cannot parameterize a network",
            other.name()
        ))),
    }
}

/// Build the configured network: explicit sensors when given, otherwise a
/// uniform deployment drawn from `deploy_seed`.
pub(crate) fn build_network(
    cfg: &ExperimentConfig,
    deploy_seed: RunSeed,
) -> Result<NetworkModel, ExperimentError> {
    let nc = &cfg.network;
    let energy = energy_with_budget(cfg, cfg.energy.budget)?;
    let specs: Vec<(usize, [f64; 2], MarginalKind, Option<f64>)> = match &nc.sensors {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(id, s)| (id, s.location, s.marginal, s.sigma))
            .collect(),
        None => {
            let mut rng = deploy_seed.stream();
            let locations = deploy_uniform(nc.count, nc.region, &mut rng)?;
            let gaussian = nc.gaussian_count.unwrap_or(nc.count);
            locations
                .into_iter()
                .enumerate()
                .map(|(id, loc)| {
                    let kind = if id < gaussian {
                        MarginalKind::Gaussian
                    } else {
                        MarginalKind::Exponential
                    };
                    (id, loc, kind, None)
                })
                .collect()
        }
    };
    let sensors: Vec<Sensor> = specs
        .into_iter()
        .map(|(id, location, kind, sigma)| {
            let marginal = match kind {
                MarginalKind::Exponential => MarginalModel::ExponentialRate,
                MarginalKind::Gaussian => {
                    let sigma = match sigma {
                        Some(s) => s,
                        None => match nc.gaussian_sigma {
                            SigmaMode::Unit => 1.0,
                            SigmaMode::SourceDistance => sensor_variance(
                                location,
                                nc.source,
                                nc.variance_policy.to_policy(),
                                id,
                            )?
                            .sqrt(),
                        },
                    };
                    MarginalModel::GaussianMean { sigma }
                }
            };
            Ok(Sensor {
                id,
                location,
                marginal,
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok(NetworkModel::new(sensors, nc.source, energy)?)
}
