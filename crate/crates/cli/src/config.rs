//! Experiment configuration: a single TOML file per experiment, parsed with
//! defaults applied and every schema violation reported at once.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use coalsim_core::metrics::{InferenceTask, ThetaEval};
use coalsim_core::network::VariancePolicy;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Read(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config schema violations:\n{}", format_violations(.0))]
    Schema(Vec<Violation>),
    #[error("config is for experiment '{found}', but the command runs '{expected}'")]
    ExperimentMismatch { expected: String, found: String },
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| format!("  {}: {}", v.field, v.reason))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    GafiVsRho,
    GkldVsTau,
    EightSensorGame,
    AlphaSweep,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::GafiVsRho => "gafi_vs_rho",
            ExperimentKind::GkldVsTau => "gkld_vs_tau",
            ExperimentKind::EightSensorGame => "eight_sensor_game",
            ExperimentKind::AlphaSweep => "alpha_sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Estimation,
    Detection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaEvalKind {
    Prior,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Gaussian => "gaussian",
            FamilyKind::StudentT => "student_t",
            FamilyKind::Clayton => "clayton",
            FamilyKind::Gumbel => "gumbel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// Unit observation variance for every Gaussian sensor.
    Unit,
    /// Variance from the distance to the signal source under the configured
    /// variance policy.
    SourceDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariancePolicyKind {
    InverseDistance,
    DistanceProportional,
}

impl VariancePolicyKind {
    pub fn to_policy(self) -> VariancePolicy {
        match self {
            VariancePolicyKind::InverseDistance => VariancePolicy::InverseDistance,
            VariancePolicyKind::DistanceProportional => VariancePolicy::DistanceProportional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalKind {
    Gaussian,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    #[serde(default = "d_task_kind")]
    pub kind: TaskKind,
    /// Detection hypotheses.
    #[serde(default = "d_theta0")]
    pub theta0: f64,
    #[serde(default = "d_theta1")]
    pub theta1: f64,
    /// Estimation theta evaluation policy.
    #[serde(default = "d_theta_eval")]
    pub theta_eval: ThetaEvalKind,
    #[serde(default = "d_theta_grid")]
    pub theta_grid: Vec<f64>,
    #[serde(default)]
    pub prior_mean: f64,
    #[serde(default = "d_one")]
    pub prior_std: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

impl TaskConfig {
    pub fn theta_eval(&self) -> ThetaEval {
        match self.theta_eval {
            ThetaEvalKind::Prior => ThetaEval::GaussianPrior {
                mean: self.prior_mean,
                std: self.prior_std,
            },
            ThetaEvalKind::Grid => ThetaEval::FixedGrid(self.theta_grid.clone()),
        }
    }

    pub fn to_task(&self) -> InferenceTask {
        match self.kind {
            TaskKind::Estimation => InferenceTask::Estimation {
                eval: self.theta_eval(),
            },
            TaskKind::Detection => InferenceTask::Detection {
                theta0: self.theta0,
                theta1: self.theta1,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    /// Observation requests per sensor per unit time (r).
    #[serde(default = "d_one")]
    pub requests_per_unit: f64,
    /// Energy per transmission (E_t).
    #[serde(default = "d_one")]
    pub transmit_energy: f64,
    /// Strict per-coalition energy budget (alpha).
    #[serde(default = "d_budget")]
    pub budget: f64,
    /// Budgets for the sweep experiment; strictly increasing.
    #[serde(default = "d_budget_list")]
    pub budget_list: Vec<f64>,
    /// Barrier control parameter (t).
    #[serde(default = "d_one")]
    pub barrier_t: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub location: [f64; 2],
    #[serde(default = "d_marginal")]
    pub marginal: MarginalKind,
    #[serde(default)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Sensor count for generated deployments.
    #[serde(default = "d_count")]
    pub count: usize,
    /// Deployment region upper bounds (origin at zero).
    #[serde(default = "d_region")]
    pub region: [f64; 2],
    /// Signal source location.
    #[serde(default = "d_source")]
    pub source: [f64; 2],
    /// The first `gaussian_count` sensors get Gaussian marginals, the rest
    /// exponential; omitted means all Gaussian.
    #[serde(default)]
    pub gaussian_count: Option<usize>,
    #[serde(default = "d_sigma_mode")]
    pub gaussian_sigma: SigmaMode,
    #[serde(default = "d_variance_policy")]
    pub variance_policy: VariancePolicyKind,
    /// Explicit sensor list; overrides `count`/deployment when present.
    #[serde(default)]
    pub sensors: Option<Vec<SensorSpec>>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaConfig {
    #[serde(default = "d_family")]
    pub family: FamilyKind,
    /// Degrees of freedom for the Student-t family.
    #[serde(default = "d_nu")]
    pub nu: f64,
}

impl Default for CopulaConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "d_n_samples")]
    pub n_samples: usize,
    #[serde(default = "d_fd_step")]
    pub fd_step: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalSpec {
    pub sigma: f64,
    pub mu_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GafiCurveConfig {
    #[serde(default = "d_rho_min")]
    pub rho_min: f64,
    #[serde(default = "d_rho_max")]
    pub rho_max: f64,
    #[serde(default = "d_rho_step")]
    pub rho_step: f64,
    /// Marginal used for both sensors of the identical-marginal curve.
    #[serde(default = "d_identical")]
    pub identical: MarginalSpec,
    /// Two marginals for the heterogeneous curve.
    #[serde(default = "d_heterogeneous")]
    pub heterogeneous: [MarginalSpec; 2],
}

impl Default for GafiCurveConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkldCurveConfig {
    #[serde(default = "d_families")]
    pub families: Vec<FamilyKind>,
    #[serde(default = "d_nu")]
    pub nu: f64,
    #[serde(default = "d_tau_min")]
    pub tau_min: f64,
    #[serde(default = "d_tau_max")]
    pub tau_max: f64,
    #[serde(default = "d_tau_step")]
    pub tau_step: f64,
    /// Standard deviations of the two Gaussian marginals.
    #[serde(default = "d_sigmas")]
    pub sigmas: [f64; 2],
}

impl Default for GkldCurveConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub energy: EnergyConfig,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub copula: CopulaConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub gafi_curve: GafiCurveConfig,
    #[serde(default)]
    pub gkld_curve: GkldCurveConfig,
}

fn d_task_kind() -> TaskKind {
    TaskKind::Estimation
}
fn d_theta0() -> f64 {
    0.0
}
fn d_theta1() -> f64 {
    std::f64::consts::SQRT_2
}
fn d_theta_eval() -> ThetaEvalKind {
    ThetaEvalKind::Prior
}
fn d_theta_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn d_one() -> f64 {
    1.0
}
fn d_budget() -> f64 {
    4.0
}
fn d_budget_list() -> Vec<f64> {
    vec![2.0, 3.0, 4.0, 5.0, 6.0]
}
fn d_count() -> usize {
    8
}
fn d_region() -> [f64; 2] {
    [1.5, 1.5]
}
fn d_source() -> [f64; 2] {
    [0.75, 0.75]
}
fn d_sigma_mode() -> SigmaMode {
    SigmaMode::SourceDistance
}
fn d_variance_policy() -> VariancePolicyKind {
    VariancePolicyKind::InverseDistance
}
fn d_marginal() -> MarginalKind {
    MarginalKind::Gaussian
}
fn d_family() -> FamilyKind {
    FamilyKind::Gaussian
}
fn d_nu() -> f64 {
    4.0
}
fn d_n_samples() -> usize {
    200_000
}
fn d_fd_step() -> f64 {
    1e-3
}
fn d_trials() -> usize {
    1
}
fn d_rho_min() -> f64 {
    -0.95
}
fn d_rho_max() -> f64 {
    0.95
}
fn d_rho_step() -> f64 {
    0.01
}
fn d_identical() -> MarginalSpec {
    MarginalSpec {
        sigma: 1.0,
        mu_prime: 1.0,
    }
}
fn d_heterogeneous() -> [MarginalSpec; 2] {
    [
        MarginalSpec {
            sigma: 1.0,
            mu_prime: 1.0,
        },
        MarginalSpec {
            sigma: 2.0,
            mu_prime: 1.0,
        },
    ]
}
fn d_families() -> Vec<FamilyKind> {
    vec![
        FamilyKind::Gaussian,
        FamilyKind::StudentT,
        FamilyKind::Clayton,
        FamilyKind::Gumbel,
    ]
}
fn d_tau_min() -> f64 {
    0.02
}
fn d_tau_max() -> f64 {
    0.95
}
fn d_tau_step() -> f64 {
    0.03
}
fn d_sigmas() -> [f64; 2] {
    [1.0, 1.0]
}

impl ExperimentConfig {
    /// Parse a TOML string, apply defaults and validate.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and validate a config file, reporting all violations at once.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Number of sensors the configured network will have.
    pub fn sensor_count(&self) -> usize {
        self.network
            .sensors
            .as_ref()
            .map(|s| s.len())
            .unwrap_or(self.network.count)
    }

    fn has_exponential_sensors(&self) -> bool {
        match &self.network.sensors {
            Some(list) => list.iter().any(|s| s.marginal == MarginalKind::Exponential),
            None => self
                .network
                .gaussian_count
                .map(|g| g < self.network.count)
                .unwrap_or(false),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut v: Vec<Violation> = Vec::new();
        let mut push = |field: &str, reason: String| {
            v.push(Violation {
                field: field.to_string(),
                reason,
            });
        };

        if self.trials < 1 {
            push("trials", "must be >= 1".into());
        }

        // Energy.
        let e = &self.energy;
        if e.requests_per_unit < 0.0 {
            push("energy.requests_per_unit", "must be nonnegative".into());
        }
        if e.transmit_energy < 0.0 {
            push("energy.transmit_energy", "must be nonnegative".into());
        }
        if !(e.budget > 0.0) {
            push("energy.budget", "must be positive".into());
        }
        if !(e.barrier_t > 0.0) {
            push("energy.barrier_t", "must be positive".into());
        }
        if self.experiment == ExperimentKind::AlphaSweep {
            if e.budget_list.is_empty() {
                push("energy.budget_list", "must be nonempty".into());
            }
            if e.budget_list.iter().any(|&a| !(a > 0.0)) {
                push("energy.budget_list", "entries must be positive".into());
            }
            if e.budget_list.windows(2).any(|w| w[0] >= w[1]) {
                push("energy.budget_list", "must be strictly increasing".into());
            }
        }

        // Task.
        let t = &self.task;
        if t.kind == TaskKind::Detection && t.theta0 == t.theta1 {
            push("task.theta0", "detection requires theta0 != theta1".into());
        }
        if !(t.prior_std > 0.0) {
            push("task.prior_std", "must be positive".into());
        }
        if t.theta_grid.is_empty() {
            push("task.theta_grid", "must be nonempty".into());
        }

        // Network.
        let n = &self.network;
        match &n.sensors {
            Some(list) => {
                if list.is_empty() {
                    push("network.sensors", "must be nonempty when present".into());
                }
                for (i, s) in list.iter().enumerate() {
                    if let Some(sigma) = s.sigma {
                        if !(sigma > 0.0) {
                            push(
                                "network.sensors",
                                format!("sensor {i}: sigma must be positive"),
                            );
                        }
                    }
                    if s.marginal == MarginalKind::Exponential && s.sigma.is_some() {
                        push(
                            "network.sensors",
                            format!("sensor {i}: exponential marginals take no sigma"),
                        );
                    }
                }
            }
            None => {
                if n.count < 1 {
                    push("network.count", "must be >= 1".into());
                }
                if !(n.region[0] > 0.0 && n.region[1] > 0.0) {
                    push("network.region", "bounds must be positive".into());
                }
                if let Some(g) = n.gaussian_count {
                    if g > n.count {
                        push(
                            "network.gaussian_count",
                            format!("exceeds sensor count {}", n.count),
                        );
                    }
                }
            }
        }

        // Copula.
        if self.copula.family == FamilyKind::StudentT && !(self.copula.nu > 2.0) {
            push("copula.nu", "degrees of freedom must exceed 2".into());
        }
        let network_experiment = matches!(
            self.experiment,
            ExperimentKind::EightSensorGame | ExperimentKind::AlphaSweep
        );
        if network_experiment
            && matches!(self.copula.family, FamilyKind::Clayton | FamilyKind::Gumbel)
        {
            push(
                "copula.family",
                "network experiments need a matrix-parameterized family (gaussian or student_t)"
                    .into(),
            );
        }

        // Monte-Carlo settings.
        if self.mc.n_samples < 1000 {
            push("mc.n_samples", "must be >= 1000".into());
        }
        if !(self.mc.fd_step >= 1e-6) {
            push("mc.fd_step", "must be at least 1e-6".into());
        }

        // Exponential marginals constrain the theta values.
        if self.has_exponential_sensors() && network_experiment {
            let grid_needed =
                self.experiment == ExperimentKind::AlphaSweep || t.kind == TaskKind::Estimation;
            if grid_needed && t.theta_eval != ThetaEvalKind::Grid {
                push(
                    "task.theta_eval",
                    "exponential marginals require the fixed grid policy for estimation".into(),
                );
            }
            if t.theta_grid.iter().any(|&g| g <= self.mc.fd_step) {
                push(
                    "task.theta_grid",
                    "grid values must exceed mc.fd_step for exponential marginals".into(),
                );
            }
            let detection_involved =
                self.experiment == ExperimentKind::AlphaSweep || t.kind == TaskKind::Detection;
            if detection_involved && (!(t.theta0 > 0.0) || !(t.theta1 > 0.0)) {
                push(
                    "task.theta0",
                    "detection with exponential marginals needs positive rates".into(),
                );
            }
        }

        // Curve configs.
        if self.experiment == ExperimentKind::GafiVsRho {
            let g = &self.gafi_curve;
            if !(g.rho_min > -1.0 && g.rho_max < 1.0 && g.rho_min < g.rho_max) {
                push(
                    "gafi_curve.rho_min",
                    "need -1 < rho_min < rho_max < 1".into(),
                );
            }
            if !(g.rho_step > 0.0) {
                push("gafi_curve.rho_step", "must be positive".into());
            }
            for (name, spec) in [("identical", &g.identical)]
                .into_iter()
                .chain([("heterogeneous", &g.heterogeneous[0])])
                .chain([("heterogeneous", &g.heterogeneous[1])])
            {
                if !(spec.sigma > 0.0) {
                    push(
                        "gafi_curve",
                        format!("{name} marginal sigma must be positive"),
                    );
                }
            }
        }
        if self.experiment == ExperimentKind::GkldVsTau {
            let g = &self.gkld_curve;
            if g.families.is_empty() {
                push(
                    "gkld_curve.families",
                    "must name at least one family".into(),
                );
            }
            if !(g.tau_min > 0.0 && g.tau_max < 1.0 && g.tau_min < g.tau_max) {
                push(
                    "gkld_curve.tau_min",
                    "need 0 < tau_min < tau_max < 1".into(),
                );
            }
            if !(g.tau_step > 0.0) {
                push("gkld_curve.tau_step", "must be positive".into());
            }
            if !(g.nu > 2.0) {
                push("gkld_curve.nu", "degrees of freedom must exceed 2".into());
            }
            if g.sigmas.iter().any(|&s| !(s > 0.0)) {
                push("gkld_curve.sigmas", "must be positive".into());
            }
            if self.task.theta0 == self.task.theta1 {
                push("task.theta0", "the curve needs theta0 != theta1".into());
            }
        }

        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Schema(v))
        }
    }

    /// Check that the file's experiment matches what the command runs.
    pub fn expect_experiment(&self, expected: ExperimentKind) -> Result<(), ConfigError> {
        if self.experiment == expected {
            Ok(())
        } else {
            Err(ConfigError::ExperimentMismatch {
                expected: expected.name().to_string(),
                found: self.experiment.name().to_string(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml("experiment = \"eight_sensor_game\"").unwrap();
        assert_eq!(cfg.energy.barrier_t, 1.0);
        assert_eq!(cfg.mc.n_samples, 200_000);
        assert_eq!(cfg.mc.fd_step, 1e-3);
        assert_eq!(cfg.trials, 1);
        assert_eq!(cfg.network.count, 8);
        assert_eq!(cfg.energy.budget, 4.0);
        assert_eq!(cfg.network.source, [0.75, 0.75]);
    }

    #[test]
    fn zero_trials_is_a_schema_violation() {
        let err = ExperimentConfig::from_toml(
            "experiment = \"alpha_sweep\"\ntrials = 0\n\
             [network]\ncount = 28\ngaussian_count = 14\ngaussian_sigma = \"unit\"\n\
             [copula]\nfamily = \"student_t\"\n[task]\ntheta0 = 1.0\ntheta1 = 2.4\n\
             theta_eval = \"grid\"",
        )
        .unwrap_err();
        match err {
            ConfigError::Schema(vs) => {
                assert!(vs
                    .iter()
                    .any(|v| v.field == "trials" && v.reason.contains(">= 1")));
            }
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn sweep_config_echoes_paper_scale_settings() {
        let cfg = ExperimentConfig::from_toml(
            "experiment = \"alpha_sweep\"\nseed = 9\ntrials = 100\n\
             [network]\ncount = 28\ngaussian_count = 14\ngaussian_sigma = \"unit\"\n\
             [copula]\nfamily = \"student_t\"\nnu = 4.0\n\
             [task]\ntheta0 = 1.0\ntheta1 = 2.4\ntheta_eval = \"grid\"\n\
             [mc]\nn_samples = 20000",
        )
        .unwrap();
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.copula.nu, 4.0);
        assert_eq!(cfg.energy.budget_list, vec![2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn all_violations_are_reported_together() {
        let err = ExperimentConfig::from_toml(
            "experiment = \"gkld_vs_tau\"\ntrials = 0\n\
             [gkld_curve]\ntau_min = 0.9\ntau_max = 0.1\nsigmas = [0.0, 1.0]\n\
             [mc]\nn_samples = 10",
        )
        .unwrap_err();
        match err {
            ConfigError::Schema(vs) => assert!(vs.len() >= 4, "got {vs:?}"),
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn unknown_fields_are_parse_errors() {
        assert!(matches!(
            ExperimentConfig::from_toml("experiment = \"gafi_vs_rho\"\nbogus = 1"),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn experiment_mismatch_is_detected() {
        let cfg = ExperimentConfig::from_toml("experiment = \"gafi_vs_rho\"").unwrap();
        assert!(cfg.expect_experiment(ExperimentKind::GafiVsRho).is_ok());
        assert!(matches!(
            cfg.expect_experiment(ExperimentKind::AlphaSweep),
            Err(ConfigError::ExperimentMismatch { .. })
        ));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg =
            ExperimentConfig::from_toml("experiment = \"eight_sensor_game\"\nseed = 3").unwrap();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
