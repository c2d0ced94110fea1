//! Coalition inference metrics.
//!
//! For a coalition `S` the average Fisher information (estimation) or the
//! Kullback-Leibler divergence between the two hypotheses (detection)
//! decomposes through the copula factorization of the joint density into
//!
//! ```text
//! metric(S) = sum of individual metrics + copula part
//! ```
//!
//! where the copula part may be negative. For Gaussian coalitions the total
//! has the closed form `1^T Sigma^-1 1` (times `(theta1-theta0)^2/2` for
//! detection) and the copula part splits further along a D-vine into signed
//! pairwise conditional terms: positive terms accumulate into the diversity
//! gain, negative ones into the redundancy loss. Non-Gaussian coalitions are
//! handled by Monte-Carlo estimators.

mod mc;

pub use mc::{
    coalition_metric, fi_curvature_term, mc_coalition_fi, mc_coalition_kld, McSettings,
    NetDependence,
};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::copula::{partial_correlation, CopulaError};
use crate::network::{MarginalModel, NetworkModel};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("invalid theta: {0}")]
    InvalidTheta(String),
    #[error("correlation coefficient {rho} is degenerate (|rho| >= 1)")]
    DegenerateCorrelation { rho: f64 },
    #[error("coalition covariance matrix is numerically singular")]
    SingularCovariance,
    #[error("conditioning set leads to a numerically singular matrix")]
    SingularConditioningSet,
    #[error("finite-difference step {fd_step:e} is below 1e-6; second differences would cancel catastrophically")]
    StepTooSmall { fd_step: f64 },
    #[error("Monte-Carlo sample count {n} is below the minimum {min}")]
    InvalidSampleCount { n: usize, min: usize },
    #[error("operation requires Gaussian marginals for every member")]
    NonGaussianMember,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Copula(#[from] CopulaError),
}

/// Where the estimation metric evaluates theta: averaged over a Gaussian
/// prior, or averaged uniformly over a fixed positive grid. The grid policy
/// exists because exponential marginals require positive rates while the
/// Gaussian prior puts mass on the negative axis.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaEval {
    GaussianPrior { mean: f64, std: f64 },
    FixedGrid(Vec<f64>),
}

impl ThetaEval {
    pub fn standard_prior() -> Self {
        ThetaEval::GaussianPrior {
            mean: 0.0,
            std: 1.0,
        }
    }

    pub fn default_grid() -> Self {
        ThetaEval::FixedGrid(vec![0.5, 1.0, 2.0])
    }
}

/// The inference task a coalition is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub enum InferenceTask {
    Estimation { eval: ThetaEval },
    Detection { theta0: f64, theta1: f64 },
}

/// Fisher information contributed by the prior itself; reported alongside
/// estimation results but never included in coalition values.
pub fn prior_fisher_information(eval: &ThetaEval) -> Option<f64> {
    match eval {
        ThetaEval::GaussianPrior { std, .. } => Some(1.0 / (std * std)),
        ThetaEval::FixedGrid(_) => None,
    }
}

/// How a metric value was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricMethod {
    ClosedForm,
    MonteCarlo { samples: usize, std_error: f64 },
}

/// A coalition metric together with its decomposition ledger.
#[derive(Debug, Clone)]
pub struct MetricValue {
    /// `I(S)` or `D(S)`.
    pub total: f64,
    /// Sum of the members' individual metrics.
    pub individual_sum: f64,
    /// `total - individual_sum`; the dependence-induced part, may be negative.
    pub copula_part: f64,
    pub diversity_gain: f64,
    pub redundancy_loss: f64,
    pub method: MetricMethod,
}

impl MetricValue {
    pub fn std_error(&self) -> f64 {
        match self.method {
            MetricMethod::ClosedForm => 0.0,
            MetricMethod::MonteCarlo { std_error, .. } => std_error,
        }
    }

    fn closed(total: f64, individual_sum: f64, diversity_gain: f64, redundancy_loss: f64) -> Self {
        MetricValue {
            total,
            individual_sum,
            copula_part: total - individual_sum,
            diversity_gain,
            redundancy_loss,
            method: MetricMethod::ClosedForm,
        }
    }
}

/// Metric achieved by a single sensor on its own.
pub fn individual_metric(
    marginal: &MarginalModel,
    task: &InferenceTask,
) -> Result<f64, MetricsError> {
    match (marginal, task) {
        (MarginalModel::GaussianMean { sigma }, InferenceTask::Estimation { .. }) => {
            Ok(1.0 / (sigma * sigma))
        }
        (MarginalModel::ExponentialRate, InferenceTask::Estimation { eval }) => match eval {
            ThetaEval::FixedGrid(grid) => {
                if grid.is_empty() {
                    return Err(MetricsError::InvalidParameter("empty theta grid".into()));
                }
                let mut acc = 0.0;
                for &t in grid {
                    if !(t > 0.0) {
                        return Err(MetricsError::InvalidTheta(format!(
                            "exponential rate must be positive, grid contains {t}"
                        )));
                    }
                    acc += 1.0 / (t * t);
                }
                Ok(acc / grid.len() as f64)
            }
            ThetaEval::GaussianPrior { .. } => Err(MetricsError::InvalidTheta(
                "a Gaussian prior puts mass on nonpositive rates; use a fixed positive grid \
                 for exponential marginals"
                    .into(),
            )),
        },
        (MarginalModel::GaussianMean { sigma }, InferenceTask::Detection { theta0, theta1 }) => {
            let d = theta1 - theta0;
            Ok(d * d / (2.0 * sigma * sigma))
        }
        (MarginalModel::ExponentialRate, InferenceTask::Detection { theta0, theta1 }) => {
            if !(*theta0 > 0.0 && *theta1 > 0.0) {
                return Err(MetricsError::InvalidTheta(format!(
                    "exponential rates must be positive, got theta0 = {theta0}, theta1 = {theta1}"
                )));
            }
            Ok((theta0 / theta1).ln() + theta1 / theta0 - 1.0)
        }
    }
}

/// Core quadratic of the bivariate Gaussian-copula dependence terms, in
/// standardized slopes `a = mu'_X / sigma_X`, `b = mu'_Y / sigma_Y`:
/// `(rho^2 (a^2 + b^2) - 2 rho a b) / (1 - rho^2)`.
fn gafi_quadratic(a: f64, b: f64, rho: f64) -> f64 {
    (rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / (1.0 - rho * rho)
}

/// Dependence-induced average Fisher information of a two-sensor Gaussian
/// coalition with observation scales `sigma_x`, `sigma_y`, mean derivatives
/// `mu_prime_x`, `mu_prime_y` and correlation `rho`.
pub fn pairwise_gafi_gaussian(
    sigma_x: f64,
    sigma_y: f64,
    mu_prime_x: f64,
    mu_prime_y: f64,
    rho: f64,
) -> Result<f64, MetricsError> {
    if !(sigma_x > 0.0 && sigma_y > 0.0) {
        return Err(MetricsError::InvalidParameter(
            "standard deviations must be positive".into(),
        ));
    }
    if rho.abs() >= 1.0 {
        return Err(MetricsError::DegenerateCorrelation { rho });
    }
    Ok(gafi_quadratic(
        mu_prime_x / sigma_x,
        mu_prime_y / sigma_y,
        rho,
    ))
}

/// Dependence-induced KLD of a two-sensor Gaussian coalition under a mean
/// shift from `theta0` to `theta1` with shared covariance.
pub fn pairwise_gkld_gaussian(
    sigma_x: f64,
    sigma_y: f64,
    theta0: f64,
    theta1: f64,
    rho: f64,
) -> Result<f64, MetricsError> {
    let shift = theta1 - theta0;
    Ok(0.5 * shift * shift * pairwise_gafi_gaussian(sigma_x, sigma_y, 1.0, 1.0, rho)?)
}

fn gaussian_sigmas(members: &[usize], net: &NetworkModel) -> Result<Vec<f64>, MetricsError> {
    members
        .iter()
        .map(|&i| match net.sensor(i).marginal {
            MarginalModel::GaussianMean { sigma } => Ok(sigma),
            MarginalModel::ExponentialRate => Err(MetricsError::NonGaussianMember),
        })
        .collect()
}

/// `1^T Sigma^-1 1` for the coalition covariance `Sigma = D R D`.
fn information_quadratic(sigmas: &[f64], corr: &DMatrix<f64>) -> Result<f64, MetricsError> {
    let m = sigmas.len();
    let cov = DMatrix::from_fn(m, m, |i, j| sigmas[i] * sigmas[j] * corr[(i, j)]);
    let chol = cov.cholesky().ok_or(MetricsError::SingularCovariance)?;
    let ones = DVector::from_element(m, 1.0);
    let solved = chol.solve(&ones);
    Ok(ones.dot(&solved))
}

/// Average Fisher information of an all-Gaussian coalition, closed form.
/// Members must be sorted ascending (the canonical coalition order).
pub fn coalition_fi_gaussian(
    members: &[usize],
    net: &NetworkModel,
) -> Result<MetricValue, MetricsError> {
    let sigmas = gaussian_sigmas(members, net)?;
    let individual: f64 = sigmas.iter().map(|s| 1.0 / (s * s)).sum();
    if members.len() == 1 {
        return Ok(MetricValue::closed(individual, individual, 0.0, 0.0));
    }
    let corr = net.sub_corr(members);
    let total = information_quadratic(&sigmas, &corr)?;
    let (dg, rl) = vine_gain_loss(&sigmas, &corr, 1.0, total - individual);
    Ok(MetricValue::closed(total, individual, dg, rl))
}

/// KLD of an all-Gaussian coalition under a mean shift with shared
/// covariance, closed form.
pub fn coalition_kld_gaussian(
    members: &[usize],
    net: &NetworkModel,
    theta0: f64,
    theta1: f64,
) -> Result<MetricValue, MetricsError> {
    let sigmas = gaussian_sigmas(members, net)?;
    let shift = theta1 - theta0;
    let scale = 0.5 * shift * shift;
    let individual: f64 = sigmas.iter().map(|s| scale / (s * s)).sum();
    if members.len() == 1 {
        return Ok(MetricValue::closed(individual, individual, 0.0, 0.0));
    }
    let corr = net.sub_corr(members);
    let total = scale * information_quadratic(&sigmas, &corr)?;
    let (dg, rl) = vine_gain_loss(&sigmas, &corr, scale, total - individual);
    Ok(MetricValue::closed(total, individual, dg, rl))
}

/// One signed term of the D-vine decomposition of the copula part.
#[derive(Debug, Clone)]
pub struct VineTerm {
    /// Sensor ids of the pair.
    pub first: usize,
    pub second: usize,
    /// Sensor ids of the conditioning set (the variables between the pair
    /// in the vine order).
    pub conditioning: Vec<usize>,
    pub value: f64,
}

/// D-vine decomposition of the copula part of an all-Gaussian coalition.
///
/// The vine orders the members ascending by sensor id. Each pair `(j, j+k)`
/// conditioned on the members strictly between them contributes one signed
/// term, evaluated at the conditional standard deviations, conditional mean
/// slopes and the partial correlation of the pair. The terms sum to the
/// coalition's copula part; the per-term attribution depends on the order,
/// the sum does not.
pub fn pairwise_decomposition_gaussian(
    members: &[usize],
    net: &NetworkModel,
    task: &InferenceTask,
) -> Result<Vec<VineTerm>, MetricsError> {
    let sigmas = gaussian_sigmas(members, net)?;
    let corr = net.sub_corr(members);
    let scale = match task {
        InferenceTask::Estimation { .. } => 1.0,
        InferenceTask::Detection { theta0, theta1 } => {
            let d = theta1 - theta0;
            0.5 * d * d
        }
    };
    let terms = vine_terms(&sigmas, &corr, scale)?;
    Ok(terms
        .into_iter()
        .map(|(j, k, cond, value)| VineTerm {
            first: members[j],
            second: members[k],
            conditioning: cond.into_iter().map(|c| members[c]).collect(),
            value,
        })
        .collect())
}

/// Local-index vine term: pair, conditioning set, signed value.
type LocalVineTerm = (usize, usize, Vec<usize>, f64);

/// Shared vine evaluation on local indices; `scale` is 1 for Fisher
/// information and `(theta1-theta0)^2/2` for KLD.
fn vine_terms(
    sigmas: &[f64],
    corr: &DMatrix<f64>,
    scale: f64,
) -> Result<Vec<LocalVineTerm>, MetricsError> {
    let m = sigmas.len();
    let cov = DMatrix::from_fn(m, m, |i, j| sigmas[i] * sigmas[j] * corr[(i, j)]);
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for j in 0..m.saturating_sub(1) {
        for k in (j + 1)..m {
            let cond: Vec<usize> = ((j + 1)..k).collect();
            let rho_p = partial_correlation(corr, j, k, &cond).map_err(|e| match e {
                CopulaError::SingularConditioningSet => MetricsError::SingularConditioningSet,
                other => MetricsError::Copula(other),
            })?;
            if rho_p.abs() >= 1.0 {
                return Err(MetricsError::DegenerateCorrelation { rho: rho_p });
            }
            let (sig_j, slope_j) = conditional_params(&cov, j, &cond)?;
            let (sig_k, slope_k) = conditional_params(&cov, k, &cond)?;
            let value = scale * gafi_quadratic(slope_j / sig_j, slope_k / sig_k, rho_p);
            out.push((j, k, cond, value));
        }
    }
    Ok(out)
}

/// Conditional standard deviation and conditional mean slope of variable
/// `target` given the variables in `cond`, for a mean vector `theta * 1`:
/// the Schur complement of the covariance and `1 - Sigma_tc Sigma_cc^-1 1`.
fn conditional_params(
    cov: &DMatrix<f64>,
    target: usize,
    cond: &[usize],
) -> Result<(f64, f64), MetricsError> {
    if cond.is_empty() {
        return Ok((cov[(target, target)].sqrt(), 1.0));
    }
    let c = cond.len();
    let cc = DMatrix::from_fn(c, c, |i, j| cov[(cond[i], cond[j])]);
    let tc = DVector::from_fn(c, |i, _| cov[(target, cond[i])]);
    let chol = cc.cholesky().ok_or(MetricsError::SingularConditioningSet)?;
    let w = chol.solve(&tc);
    let var = cov[(target, target)] - tc.dot(&w);
    if !(var > 0.0) {
        return Err(MetricsError::SingularConditioningSet);
    }
    let slope = 1.0 - w.sum();
    Ok((var.sqrt(), slope))
}

/// Diversity gain and redundancy loss: positive vine terms versus the
/// magnitudes of the negative ones. Near-singular dependence can push a
/// conditional correlation onto the boundary; the vine split then falls
/// back to the aggregate sign split of the copula part, whose difference is
/// all the game needs.
fn vine_gain_loss(sigmas: &[f64], corr: &DMatrix<f64>, scale: f64, copula_part: f64) -> (f64, f64) {
    match vine_terms(sigmas, corr, scale) {
        Ok(terms) => {
            let mut dg = 0.0;
            let mut rl = 0.0;
            for (_, _, _, value) in terms {
                if value >= 0.0 {
                    dg += value;
                } else {
                    rl -= value;
                }
            }
            (dg, rl)
        }
        Err(_) => (copula_part.max(0.0), (-copula_part).max(0.0)),
    }
}
